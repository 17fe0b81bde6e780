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

#ifndef CONTRASTMAP_DOWNSTREAM_H_
#define CONTRASTMAP_DOWNSTREAM_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "contrastmap/classifiers.h"
#include "contrastmap/embedding_io.h"
#include "json.hpp"

namespace contrastmap {

struct TextRecord {
  std::string text;
  int label = 0;
};

struct TextDataset {
  std::string name;
  std::vector<TextRecord> records;
  size_t malformed_rows = 0;
};

// CSV with a `text,label` header, RFC 4180 quoting (quoted fields may hold
// commas, doubled quotes and newlines). Rows with a wrong field count or a
// label other than 0/1 are skipped and counted. Throws InputError on a
// missing header or when only one label is present.
TextDataset LoadTextCsv(std::istream& in, std::string name = {});
TextDataset LoadTextCsv(std::string_view text, std::string name = {});
// The dataset is named after the file, without its directory.
TextDataset LoadTextCsvFile(const std::string& path);

// Quotes a field when it contains a comma, quote or line break.
std::string CsvEscape(std::string_view field);
void WriteTextCsv(const TextDataset& data, std::ostream& out);

// ASCII letters are lowercased; every ASCII character that is not a letter or
// digit separates tokens. Bytes >= 0x80 are kept as word characters so UTF-8
// words are not torn apart.
std::vector<std::string> Tokenize(std::string_view text);

struct DocumentVector {
  std::vector<double> values;
  size_t tokens = 0;
  size_t found = 0;
  bool all_oov = false;  // no token in vocabulary; values are all zero
};

// Unweighted mean of the in-vocabulary token vectors.
DocumentVector EmbedDocument(const EmbeddingTable& table, const std::vector<std::string>& tokens);

struct DownstreamResult {
  std::string dataset;
  double accuracy_raw = 0.0;
  double accuracy_concat = 0.0;
  double relative_gain = 0.0;  // (concat - raw) / raw
  size_t train_size = 0;
  size_t test_size = 0;
  double oov_token_rate_raw = 0.0;
  double oov_token_rate_concat = 0.0;
  uint64_t split_hash_raw = 0;
  uint64_t split_hash_concat = 0;
  std::vector<size_t> test_indices;
  std::vector<double> test_probability_raw;
  std::vector<double> test_probability_concat;

  nlohmann::json ToJson() const;
  // record,probability,predicted for one arm.
  void WritePredictionsCsv(std::ostream& out, bool concat_arm) const;
};

struct DownstreamConfig {
  double test_fraction = 0.25;
  uint64_t seed = 0;
  // z-score each feature with training-split statistics before fitting.
  bool standardize = true;
  // Document vectors are few and nearly separable; 500 steps stop well short
  // of the optimum there.
  LinearConfig linear{.learning_rate = 0.1, .epochs = 5000, .l2 = 1e-4};
};

struct StratifiedSplit {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

// Per-label seeded shuffle; round(test_fraction * class size) of each label
// goes to test. Both index lists are sorted.
StratifiedSplit StratifiedTrainTest(const TextDataset& data, double test_fraction, uint64_t seed);

uint64_t SplitHash(const StratifiedSplit& split);

// Logistic regression on mean document vectors, once over `raw` and once
// over `concat`, on one shared stratified split.
DownstreamResult RunDownstream(const EmbeddingTable& raw, const EmbeddingTable& concat, const TextDataset& data,
                               const DownstreamConfig& config = {});

}  // namespace contrastmap

#endif  // CONTRASTMAP_DOWNSTREAM_H_
