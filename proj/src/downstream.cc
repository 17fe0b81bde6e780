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

#include "contrastmap/downstream.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "contrastmap/errors.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

// Splits one CSV record starting at `pos`. Returns false on an unterminated
// quote. Advances `pos` past the record's line break.
bool ReadCsvRecord(std::string_view data, size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  while (pos < data.size()) {
    const char c = data[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < data.size() && data[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        in_quotes = false;
        ++pos;
        continue;
      }
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && field.empty() && !quoted_field) {
      in_quotes = true;
      quoted_field = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      quoted_field = false;
      ++pos;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (in_quotes) return false;
  fields.push_back(std::move(field));
  return true;
}

uint64_t Fnv1a(uint64_t hash, uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    hash ^= (value >> (8 * i)) & 0xff;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

struct ArmOutput {
  double accuracy = 0.0;
  double oov_rate = 0.0;
  uint64_t split_hash = 0;
  std::vector<double> probabilities;
};

// Column z-scores from `fit` applied to each matrix; constant columns become 0.
void Standardize(const Matrix& fit, std::initializer_list<Matrix*> targets) {
  const size_t d = fit.cols();
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  const double n = static_cast<double>(fit.rows());
  for (size_t r = 0; r < fit.rows(); ++r) {
    for (size_t k = 0; k < d; ++k) mean[k] += fit(r, k);
  }
  for (double& m : mean) m /= n;
  for (size_t r = 0; r < fit.rows(); ++r) {
    for (size_t k = 0; k < d; ++k) scale[k] += (fit(r, k) - mean[k]) * (fit(r, k) - mean[k]);
  }
  for (double& s : scale) {
    s = std::sqrt(s / n);
    s = s > 1e-12 ? 1.0 / s : 0.0;
  }
  for (Matrix* m : targets) {
    for (size_t r = 0; r < m->rows(); ++r) {
      for (size_t k = 0; k < d; ++k) (*m)(r, k) = ((*m)(r, k) - mean[k]) * scale[k];
    }
  }
}

ArmOutput RunArm(const EmbeddingTable& table, const std::vector<std::vector<std::string>>& tokens,
                 const TextDataset& data, const StratifiedSplit& split, const DownstreamConfig& config) {
  ArmOutput out;
  out.split_hash = SplitHash(split);
  std::vector<DocumentVector> docs;
  docs.reserve(tokens.size());
  size_t token_count = 0, found = 0;
  for (const auto& t : tokens) {
    docs.push_back(EmbedDocument(table, t));
    token_count += docs.back().tokens;
    found += docs.back().found;
  }
  out.oov_rate = token_count ? static_cast<double>(token_count - found) / static_cast<double>(token_count) : 0.0;

  Matrix train_x, test_x;
  std::vector<int> train_y, test_y;
  for (size_t i : split.train) {
    train_x.AppendRow(docs[i].values);
    train_y.push_back(data.records[i].label);
  }
  for (size_t i : split.test) {
    test_x.AppendRow(docs[i].values);
    test_y.push_back(data.records[i].label);
  }
  if (config.standardize) {
    const Matrix fit = train_x;
    Standardize(fit, {&train_x, &test_x});
  }
  const PairClassifierModel model = TrainLinear(train_x, train_y, config.linear);
  out.accuracy = RowAccuracy(model, test_x, test_y);
  for (size_t r = 0; r < test_x.rows(); ++r) out.probabilities.push_back(model.Probability(test_x.row(r)));
  return out;
}

}  // namespace

TextDataset LoadTextCsv(std::istream& in, std::string name) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return LoadTextCsv(buffer.str(), std::move(name));
}

TextDataset LoadTextCsv(std::string_view text, std::string name) {
  TextDataset data;
  data.name = std::move(name);
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  size_t pos = 0;
  std::vector<std::string> fields;
  if (!ReadCsvRecord(text, pos, fields) || fields.size() != 2 || fields[0] != "text" || fields[1] != "label") {
    throw InputError("missing text,label header");
  }
  while (pos < text.size()) {
    if (!ReadCsvRecord(text, pos, fields)) {
      ++data.malformed_rows;
      break;
    }
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != 2 || (fields[1] != "0" && fields[1] != "1")) {
      ++data.malformed_rows;
      continue;
    }
    data.records.push_back({std::move(fields[0]), fields[1] == "1" ? 1 : 0});
  }
  const bool has_pos = std::any_of(data.records.begin(), data.records.end(), [](auto& r) { return r.label == 1; });
  const bool has_neg = std::any_of(data.records.begin(), data.records.end(), [](auto& r) { return r.label == 0; });
  if (!has_pos || !has_neg) throw InputError("dataset needs both labels");
  return data;
}

TextDataset LoadTextCsvFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset: " + path);
  return LoadTextCsv(in, std::filesystem::path(path).filename().string());
}

std::string CsvEscape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void WriteTextCsv(const TextDataset& data, std::ostream& out) {
  out << "text,label\n";
  for (const auto& r : data.records) out << CsvEscape(r.text) << ',' << r.label << '\n';
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word_char = c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (word_char) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

DocumentVector EmbedDocument(const EmbeddingTable& table, const std::vector<std::string>& tokens) {
  DocumentVector doc;
  doc.values.assign(table.dimension(), 0.0);
  doc.tokens = tokens.size();
  for (const auto& t : tokens) {
    auto v = table.Lookup(t);
    if (!v) continue;
    ++doc.found;
    for (size_t i = 0; i < v->size(); ++i) doc.values[i] += (*v)[i];
  }
  if (doc.found == 0) {
    doc.all_oov = true;
    return doc;
  }
  const double inv = 1.0 / static_cast<double>(doc.found);
  for (double& x : doc.values) x *= inv;
  return doc;
}

StratifiedSplit StratifiedTrainTest(const TextDataset& data, double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 0.5)) throw InputError("test_fraction must be in (0, 0.5)");
  Rng rng(seed);
  StratifiedSplit split;
  for (int label : {0, 1}) {
    std::vector<size_t> members;
    for (size_t i = 0; i < data.records.size(); ++i) {
      if (data.records[i].label == label) members.push_back(i);
    }
    rng.Shuffle(members);
    const auto n_test = static_cast<size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());

  auto has_both = [&](const std::vector<size_t>& side) {
    bool pos = false, neg = false;
    for (size_t i : side) (data.records[i].label == 1 ? pos : neg) = true;
    return pos && neg;
  };
  if (!has_both(split.train) || !has_both(split.test)) throw InputError("degenerate split: a side has one class");
  return split;
}

uint64_t SplitHash(const StratifiedSplit& split) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i : split.train) h = Fnv1a(h, i);
  h = Fnv1a(h, UINT64_MAX);
  for (size_t i : split.test) h = Fnv1a(h, i);
  return h;
}

DownstreamResult RunDownstream(const EmbeddingTable& raw, const EmbeddingTable& concat, const TextDataset& data,
                               const DownstreamConfig& config) {
  const StratifiedSplit split = StratifiedTrainTest(data, config.test_fraction, config.seed);
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(data.records.size());
  for (const auto& r : data.records) tokens.push_back(Tokenize(r.text));

  const ArmOutput raw_arm = RunArm(raw, tokens, data, split, config);
  const ArmOutput concat_arm = RunArm(concat, tokens, data, split, config);
  if (raw_arm.split_hash != concat_arm.split_hash) throw std::logic_error("arms saw different splits");

  DownstreamResult result;
  result.dataset = data.name;
  result.accuracy_raw = raw_arm.accuracy;
  result.accuracy_concat = concat_arm.accuracy;
  result.relative_gain = raw_arm.accuracy > 0.0 ? (concat_arm.accuracy - raw_arm.accuracy) / raw_arm.accuracy : 0.0;
  result.train_size = split.train.size();
  result.test_size = split.test.size();
  result.oov_token_rate_raw = raw_arm.oov_rate;
  result.oov_token_rate_concat = concat_arm.oov_rate;
  result.split_hash_raw = raw_arm.split_hash;
  result.split_hash_concat = concat_arm.split_hash;
  result.test_indices = split.test;
  result.test_probability_raw = raw_arm.probabilities;
  result.test_probability_concat = concat_arm.probabilities;
  return result;
}

nlohmann::json DownstreamResult::ToJson() const {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(split_hash_raw));
  return {{"dataset", dataset},
          {"accuracy_raw", accuracy_raw},
          {"accuracy_concat", accuracy_concat},
          {"relative_gain", relative_gain},
          {"train_size", train_size},
          {"test_size", test_size},
          {"oov_token_rate_raw", oov_token_rate_raw},
          {"oov_token_rate_concat", oov_token_rate_concat},
          {"split_hash", hash}};
}

void DownstreamResult::WritePredictionsCsv(std::ostream& out, bool concat_arm) const {
  const auto& probs = concat_arm ? test_probability_concat : test_probability_raw;
  out << "record,probability,predicted\n";
  for (size_t i = 0; i < test_indices.size(); ++i) {
    out << test_indices[i] << ',' << FormatDouble(probs[i]) << ',' << (probs[i] >= 0.5 ? 1 : 0) << '\n';
  }
}

}  // namespace contrastmap
