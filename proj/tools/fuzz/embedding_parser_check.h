/*
 * Copyright 2026 The contrastmap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CONTRASTMAP_TOOLS_FUZZ_EMBEDDING_PARSER_CHECK_H_
#define CONTRASTMAP_TOOLS_FUZZ_EMBEDDING_PARSER_CHECK_H_

#include <cmath>
#include <string>
#include <string_view>

#include "contrastmap/embedding_io.h"
#include "contrastmap/errors.h"

namespace contrastmap::fuzz {

// Parses `data` and returns a description of the first broken table
// invariant, or an empty string. Rejecting the input with InputError is
// fine; any other exception is reported.
inline std::string CheckEmbeddingParse(std::string_view data) {
  try {
    ParseStats stats;
    const EmbeddingTable table = ParseEmbeddingText(data, &stats);
    if (table.empty()) return "empty table returned";
    if (table.dimension() == 0) return "zero dimension";
    for (size_t i = 0; i < table.size(); ++i) {
      const std::string& word = table.word(i);
      if (word.empty()) return "empty word";
      if (word.find_first_of(" \t\r\n\v\f") != std::string::npos) return "whitespace in word";
      if (table.IndexOf(word) != i) return "word index mismatch";
      const auto row = table.row(i);
      if (row.size() != table.dimension()) return "row arity";
      for (double v : row) {
        if (!std::isfinite(v)) return "non-finite value";
      }
      bool any_nonzero = false;
      for (double v : row) any_nonzero |= v != 0.0;
      if (!any_nonzero) return "zero vector";
    }
    const EmbeddingTable back = ParseEmbeddingText(EmbeddingTextString(table));
    if (!back.SameContents(table) || back.words() != table.words()) return "round trip changed the table";
  } catch (const InputError&) {
  } catch (const std::exception& e) {
    return std::string("unexpected exception: ") + e.what();
  }
  return {};
}

}  // namespace contrastmap::fuzz

#endif  // CONTRASTMAP_TOOLS_FUZZ_EMBEDDING_PARSER_CHECK_H_
