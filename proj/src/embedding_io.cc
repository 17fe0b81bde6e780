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

#include "contrastmap/embedding_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <sstream>

#include "contrastmap/errors.h"

namespace contrastmap {
namespace {

bool IsSpace(char c) { return c == ' ' || c == '\t'; }

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    const size_t start = i;
    while (i < line.size() && !IsSpace(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool ParseDouble(std::string_view token, double* out) {
  // from_chars rejects a leading '+', which some exporters emit.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, *out);
  // Overflow is reported as out-of-range; treat it as non-finite input.
  if (ec == std::errc::result_out_of_range) {
    *out = std::numeric_limits<double>::infinity();
    return ptr == end;
  }
  return ec == std::errc() && ptr == end;
}

bool ParseCount(std::string_view token) {
  if (token.empty()) return false;
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

bool ValidWord(std::string_view word) {
  if (word.empty()) return false;
  return std::none_of(word.begin(), word.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == '\0';
  });
}

}  // namespace

EmbeddingTable::EmbeddingTable(size_t dimension, std::string source_label)
    : dimension_(dimension), source_label_(std::move(source_label)) {
  if (dimension == 0) throw InputError("embedding dimension must be positive");
}

EmbeddingTable::InsertResult EmbeddingTable::Insert(std::string_view word,
                                                    std::span<const double> values) {
  if (!ValidWord(word)) return InsertResult::kBadWord;
  if (values.size() != dimension_) return InsertResult::kWrongArity;
  double norm_sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) return InsertResult::kNonFinite;
    norm_sq += v * v;
  }
  if (!(norm_sq > 0.0)) return InsertResult::kZeroNorm;
  if (index_.find(word) != index_.end()) return InsertResult::kDuplicate;
  index_.emplace(std::string(word), words_.size());
  words_.emplace_back(word);
  values_.insert(values_.end(), values.begin(), values.end());
  return InsertResult::kInserted;
}

std::optional<size_t> EmbeddingTable::IndexOf(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const double>> EmbeddingTable::Lookup(std::string_view word) const {
  auto index = IndexOf(word);
  if (!index) return std::nullopt;
  return row(*index);
}

bool EmbeddingTable::SameContents(const EmbeddingTable& other) const {
  if (dimension_ != other.dimension_ || size() != other.size()) return false;
  for (size_t i = 0; i < size(); ++i) {
    auto theirs = other.Lookup(words_[i]);
    if (!theirs) return false;
    auto mine = row(i);
    for (size_t j = 0; j < dimension_; ++j) {
      // Bitwise comparison so -0.0 and 0.0 are distinguished.
      if (std::memcmp(&mine[j], &(*theirs)[j], sizeof(double)) != 0) return false;
    }
  }
  return true;
}

EmbeddingTable ParseEmbeddingText(std::istream& in, ParseStats* stats) {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  st = ParseStats{};

  std::optional<EmbeddingTable> table;
  std::vector<double> values;
  std::string line;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++st.lines_read;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    auto fields = SplitFields(view);
    if (fields.empty()) continue;

    if (!seen_content && !table && !st.header_skipped && fields.size() == 2 &&
        ParseCount(fields[0]) && ParseCount(fields[1])) {
      st.header_skipped = true;
      continue;
    }

    values.clear();
    bool numeric = fields.size() >= 2;
    for (size_t i = 1; numeric && i < fields.size(); ++i) {
      double v = 0.0;
      numeric = ParseDouble(fields[i], &v);
      values.push_back(v);
    }

    if (!seen_content) {
      seen_content = true;
      if (!numeric) throw InputError("bad format");
      table.emplace(values.size());
    }
    if (!numeric) {
      ++st.unparsable;
      continue;
    }
    switch (table->Insert(fields[0], values)) {
      case EmbeddingTable::InsertResult::kInserted: break;
      case EmbeddingTable::InsertResult::kDuplicate: ++st.duplicate_words; break;
      case EmbeddingTable::InsertResult::kWrongArity: ++st.wrong_arity; break;
      case EmbeddingTable::InsertResult::kNonFinite: ++st.non_finite; break;
      case EmbeddingTable::InsertResult::kZeroNorm: ++st.zero_norm; break;
      case EmbeddingTable::InsertResult::kBadWord: ++st.unparsable; break;
    }
  }
  if (!table || table->empty()) throw InputError("no vectors");
  return std::move(*table);
}

EmbeddingTable ParseEmbeddingText(std::string_view text, ParseStats* stats) {
  std::istringstream in{std::string(text)};
  return ParseEmbeddingText(in, stats);
}

EmbeddingTable LoadEmbeddingFile(const std::string& path, ParseStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings file: " + path);
  EmbeddingTable table = ParseEmbeddingText(in, stats);
  table.set_source_label(path);
  return table;
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("FormatDouble failed");
  return std::string(buffer, ptr);
}

size_t WriteEmbeddingText(const EmbeddingTable& table, std::ostream& out) {
  size_t bytes = 0;
  std::string line = std::to_string(table.size()) + ' ' + std::to_string(table.dimension()) + '\n';
  out << line;
  bytes += line.size();
  char buffer[64];
  for (size_t i = 0; i < table.size(); ++i) {
    line = table.word(i);
    for (double v : table.row(i)) {
      line.push_back(' ');
      auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
      line.append(buffer, ptr);
    }
    line.push_back('\n');
    out << line;
    bytes += line.size();
  }
  out.flush();
  if (!out) throw std::ios_base::failure("embedding write failed");
  return bytes;
}

std::string EmbeddingTextString(const EmbeddingTable& table) {
  std::ostringstream out;
  WriteEmbeddingText(table, out);
  return std::move(out).str();
}

void SaveEmbeddingFile(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open for writing: " + path);
  WriteEmbeddingText(table, out);
}

double CosineDistance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw InputError("degenerate vector");
  const double distance = 1.0 - dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(distance, 0.0, 2.0);
}

}  // namespace contrastmap
