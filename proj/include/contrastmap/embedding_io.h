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

#ifndef CONTRASTMAP_EMBEDDING_IO_H_
#define CONTRASTMAP_EMBEDDING_IO_H_

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace contrastmap {

// Word -> dense vector table with a fixed dimension. Insertion order is kept
// and is the order used for serialization. Every stored vector has exactly
// `dimension()` finite components and a nonzero Euclidean norm.
class EmbeddingTable {
 public:
  enum class InsertResult { kInserted, kDuplicate, kWrongArity, kNonFinite, kZeroNorm, kBadWord };

  EmbeddingTable(size_t dimension, std::string source_label = {});

  // Validates and appends. A duplicate word is never overwritten.
  InsertResult Insert(std::string_view word, std::span<const double> values);

  size_t dimension() const { return dimension_; }
  size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& source_label() const { return source_label_; }
  void set_source_label(std::string label) { source_label_ = std::move(label); }

  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(size_t index) const { return words_[index]; }
  std::span<const double> row(size_t index) const {
    return {values_.data() + index * dimension_, dimension_};
  }

  std::optional<size_t> IndexOf(std::string_view word) const;
  bool Contains(std::string_view word) const { return IndexOf(word).has_value(); }

  // Exact, case-sensitive lookup. Returns nullopt for absent words.
  std::optional<std::span<const double>> Lookup(std::string_view word) const;

  // Same words in any order with bit-identical vectors.
  bool SameContents(const EmbeddingTable& other) const;

 private:
  struct StringHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  size_t dimension_;
  std::string source_label_;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, size_t, StringHash, std::equal_to<>> index_;
};

// Counters for rows the parser skipped.
struct ParseStats {
  bool header_skipped = false;
  size_t lines_read = 0;
  size_t duplicate_words = 0;
  size_t wrong_arity = 0;
  size_t unparsable = 0;
  size_t non_finite = 0;
  size_t zero_norm = 0;

  size_t skipped() const { return duplicate_words + wrong_arity + unparsable + non_finite + zero_norm; }
};

// Reads the whitespace-separated text format `word v1 ... vd`, one word per
// line, with an optional `count dim` header line. Dimension comes from the
// first content line. Throws InputError("no vectors") when nothing survives
// and InputError("bad format") when the first content line cannot be parsed.
EmbeddingTable ParseEmbeddingText(std::istream& in, ParseStats* stats = nullptr);
EmbeddingTable ParseEmbeddingText(std::string_view text, ParseStats* stats = nullptr);
EmbeddingTable LoadEmbeddingFile(const std::string& path, ParseStats* stats = nullptr);

// Writes `count dim` followed by one row per word, shortest round-trip
// decimal rendering, LF line endings. Returns the number of bytes written.
size_t WriteEmbeddingText(const EmbeddingTable& table, std::ostream& out);
std::string EmbeddingTextString(const EmbeddingTable& table);
void SaveEmbeddingFile(const EmbeddingTable& table, const std::string& path);

// 1 - cos(u, v), clamped to [0, 2]. Throws InputError on a zero-norm input
// ("degenerate vector") or a dimension mismatch.
double CosineDistance(std::span<const double> u, std::span<const double> v);

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);

}  // namespace contrastmap

#endif  // CONTRASTMAP_EMBEDDING_IO_H_
