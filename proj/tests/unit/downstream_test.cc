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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "contrastmap/contrast_trainer.h"
#include "contrastmap/errors.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

TEST(LoadTextCsv, QuotedFields) {
  auto data = LoadTextCsv(std::string_view("text,label\n\"a, \"\"b\"\"\nc\",1\nplain,0\n"));
  ASSERT_EQ(data.records.size(), 2u);
  EXPECT_EQ(data.records[0].text, "a, \"b\"\nc");
  EXPECT_EQ(data.records[0].label, 1);
  EXPECT_EQ(data.records[1].text, "plain");
  EXPECT_EQ(data.malformed_rows, 0u);
}

TEST(LoadTextCsv, CrlfBomAndBlankLines) {
  auto data = LoadTextCsv(std::string_view("\xEF\xBB\xBFtext,label\r\nx,1\r\n\r\ny,0"));
  ASSERT_EQ(data.records.size(), 2u);
  EXPECT_EQ(data.records[1].text, "y");
}

TEST(LoadTextCsv, MalformedRowsCounted) {
  auto data = LoadTextCsv(std::string_view("text,label\na,1\nb,2\nc,0,9\nd\ne,0\n\"open,1\n"));
  EXPECT_EQ(data.records.size(), 2u);
  EXPECT_EQ(data.malformed_rows, 4u);
}

TEST(LoadTextCsv, Rejections) {
  EXPECT_THROW(LoadTextCsv(std::string_view("a,1\nb,0\n")), InputError);
  EXPECT_THROW(LoadTextCsv(std::string_view("label,text\n1,a\n0,b\n")), InputError);
  EXPECT_THROW(LoadTextCsv(std::string_view("")), InputError);
  EXPECT_THROW(LoadTextCsv(std::string_view("text,label\na,1\nb,1\n")), InputError);
  EXPECT_THROW(LoadTextCsvFile("/nonexistent/data.csv"), InputError);
}

TEST(LoadTextCsvFile, NamedAfterFile) {
  const auto data = LoadTextCsvFile(std::string(CONTRASTMAP_DATA_DIR) + "/synthetic_sentiment.csv");
  EXPECT_EQ(data.name, "synthetic_sentiment.csv");
  EXPECT_EQ(data.records.size(), 200u);
}

TEST(WriteTextCsv, RoundTrip) {
  TextDataset data;
  data.records = {{"comma, here", 1}, {"quote \"q\"", 0}, {"line\nbreak", 1}, {"cr\r", 0}, {"", 1}, {"plain", 0}};
  std::ostringstream out;
  WriteTextCsv(data, out);
  auto back = LoadTextCsv(std::string_view(out.str()));
  ASSERT_EQ(back.records.size(), data.records.size());
  for (size_t i = 0; i < data.records.size(); ++i) {
    EXPECT_EQ(back.records[i].text, data.records[i].text);
    EXPECT_EQ(back.records[i].label, data.records[i].label);
  }
  EXPECT_EQ(CsvEscape("abc"), "abc");
  EXPECT_EQ(CsvEscape("a\"b"), "\"a\"\"b\"");
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(Tokenize("It's FAST!"), (std::vector<std::string>{"it", "s", "fast"}));
  EXPECT_EQ(Tokenize(""), std::vector<std::string>{});
  EXPECT_EQ(Tokenize("co-operate 2x"), (std::vector<std::string>{"co", "operate", "2x"}));
  EXPECT_EQ(Tokenize("  ,,;  "), std::vector<std::string>{});
  EXPECT_EQ(Tokenize("caf\xC3\xA9 Na\xC3\xAFve"), (std::vector<std::string>{"caf\xC3\xA9", "na\xC3\xAFve"}));
}

TEST(EmbedDocument, MeanOfKnownTokens) {
  auto table = ParseEmbeddingText("good 1 3\nbad -1 1\n");
  auto doc = EmbedDocument(table, {"good", "zzz", "bad", "good"});
  EXPECT_EQ(doc.tokens, 4u);
  EXPECT_EQ(doc.found, 3u);
  EXPECT_FALSE(doc.all_oov);
  EXPECT_DOUBLE_EQ(doc.values[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(doc.values[1], 7.0 / 3.0);
}

TEST(EmbedDocument, AllOutOfVocabulary) {
  auto table = ParseEmbeddingText("good 1 3\n");
  auto doc = EmbedDocument(table, {"x", "y"});
  EXPECT_TRUE(doc.all_oov);
  EXPECT_EQ(doc.values, (std::vector<double>{0, 0}));
  EXPECT_TRUE(EmbedDocument(table, {}).all_oov);
}

TEST(EmbedDocument, PermutationInvariant) {
  Rng rng(2);
  EmbeddingTable table(6);
  std::vector<double> v(6);
  for (int i = 0; i < 30; ++i) {
    for (double& x : v) x = rng.Normal();
    table.Insert("t" + std::to_string(i), v);
  }
  std::vector<std::string> tokens;
  for (int i = 0; i < 40; ++i) tokens.push_back("t" + std::to_string(rng.UniformIndex(35)));
  const auto a = EmbedDocument(table, tokens);
  for (int trial = 0; trial < 10; ++trial) {
    rng.Shuffle(tokens);
    const auto b = EmbedDocument(table, tokens);
    for (size_t k = 0; k < 6; ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-12);
  }
}

TextDataset Labels(size_t pos, size_t neg) {
  TextDataset d;
  for (size_t i = 0; i < pos + neg; ++i) d.records.push_back({"doc" + std::to_string(i), i < pos ? 1 : 0});
  Rng rng(99);
  rng.Shuffle(d.records);
  return d;
}

TEST(StratifiedTrainTest, ClassProportions) {
  const auto data = Labels(30, 70);
  const auto split = StratifiedTrainTest(data, 0.25, 5);
  size_t test_pos = 0;
  for (size_t i : split.test) test_pos += data.records[i].label;
  EXPECT_EQ(test_pos, 8u);  // round(7.5) away from zero
  EXPECT_EQ(split.test.size(), 8u + 18u);
  EXPECT_TRUE(std::is_sorted(split.train.begin(), split.train.end()));
  EXPECT_TRUE(std::is_sorted(split.test.begin(), split.test.end()));
  std::set<size_t> all(split.train.begin(), split.train.end());
  for (size_t i : split.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 100u);
}

TEST(StratifiedTrainTest, SeedDeterminism) {
  const auto data = Labels(50, 50);
  const auto a = StratifiedTrainTest(data, 0.2, 1), b = StratifiedTrainTest(data, 0.2, 1);
  const auto c = StratifiedTrainTest(data, 0.2, 2);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(SplitHash(a), SplitHash(b));
  EXPECT_NE(a.test, c.test);
  EXPECT_NE(SplitHash(a), SplitHash(c));
}

TEST(StratifiedTrainTest, BoundsAndDegenerate) {
  const auto data = Labels(10, 10);
  for (double f : {0.0, -0.1, 0.5, 0.9}) EXPECT_THROW(StratifiedTrainTest(data, f, 0), InputError);
  EXPECT_THROW(StratifiedTrainTest(Labels(1, 10), 0.2, 0), InputError);
}

// FNV-1a 64 over little-endian index bytes, with an all-ones separator.
uint64_t OracleHash(const StratifiedSplit& s) {
  std::vector<unsigned char> bytes;
  auto put = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  for (size_t i : s.train) put(i);
  put(~uint64_t{0});
  for (size_t i : s.test) put(i);
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

TEST(SplitHash, MatchesReferenceFnv) {
  StratifiedSplit empty;
  EXPECT_EQ(SplitHash(empty), OracleHash(empty));
  const auto s = StratifiedTrainTest(Labels(40, 25), 0.3, 11);
  EXPECT_EQ(SplitHash(s), OracleHash(s));
  StratifiedSplit moved = s;
  moved.train.push_back(moved.test.back());
  moved.test.pop_back();
  EXPECT_NE(SplitHash(moved), SplitHash(s));
}

// Positive documents use p-words, negative ones n-words; both share fillers.
struct Toy {
  EmbeddingTable table{3};
  TextDataset data;
};

Toy MakeToy(uint64_t seed) {
  Toy toy;
  Rng rng(seed);
  for (int i = 0; i < 20; ++i) {
    toy.table.Insert("p" + std::to_string(i), std::vector<double>{1.0 + rng.Uniform(), rng.Normal(), rng.Normal()});
    toy.table.Insert("n" + std::to_string(i), std::vector<double>{-1.0 - rng.Uniform(), rng.Normal(), rng.Normal()});
    toy.table.Insert("f" + std::to_string(i), std::vector<double>{0.1 * rng.Normal(), rng.Normal(), rng.Normal()});
  }
  for (int d = 0; d < 200; ++d) {
    const int label = d % 2;
    std::string text;
    for (int t = 0; t < 6; ++t) {
      const char prefix = t < 3 ? (label ? 'p' : 'n') : 'f';
      text += std::string(1, prefix) + std::to_string(rng.UniformIndex(20)) + (t % 2 ? ", " : " ");
    }
    toy.data.records.push_back({text + "unknownword", label});
  }
  toy.data.name = "toy";
  return toy;
}

TEST(RunDownstream, SeparableToy) {
  auto toy = MakeToy(4);
  auto r = RunDownstream(toy.table, ConcatEmbeddings(toy.table, toy.table), toy.data, {});
  EXPECT_EQ(r.accuracy_raw, 1.0);
  EXPECT_EQ(r.accuracy_concat, 1.0);
  EXPECT_EQ(r.relative_gain, 0.0);
  EXPECT_EQ(r.train_size + r.test_size, 200u);
  EXPECT_EQ(r.test_size, 50u);
  EXPECT_EQ(r.split_hash_raw, r.split_hash_concat);
  EXPECT_DOUBLE_EQ(r.oov_token_rate_raw, 1.0 / 7.0);
  EXPECT_EQ(r.test_probability_raw.size(), r.test_size);
  EXPECT_EQ(r.ToJson()["dataset"], "toy");
  EXPECT_EQ(r.ToJson()["split_hash"].get<std::string>().size(), 16u);
}

TEST(RunDownstream, SameTableTwiceIsIdentical) {
  auto toy = MakeToy(5);
  auto r = RunDownstream(toy.table, toy.table, toy.data, {});
  EXPECT_EQ(r.accuracy_raw, r.accuracy_concat);
  EXPECT_EQ(r.test_probability_raw, r.test_probability_concat);
  auto again = RunDownstream(toy.table, toy.table, toy.data, {});
  EXPECT_EQ(again.test_probability_raw, r.test_probability_raw);
}

TEST(RunDownstream, RelativeGainAndPredictionsCsv) {
  auto toy = MakeToy(6);
  EmbeddingTable noise(3);
  Rng rng(1);
  for (const auto& word : toy.table.words()) noise.Insert(word, std::vector<double>{rng.Normal(), rng.Normal(), rng.Normal()});
  auto r = RunDownstream(noise, toy.table, toy.data, {});
  EXPECT_DOUBLE_EQ(r.relative_gain, (r.accuracy_concat - r.accuracy_raw) / r.accuracy_raw);
  EXPECT_GT(r.accuracy_concat, r.accuracy_raw);

  std::ostringstream csv;
  r.WritePredictionsCsv(csv, true);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "record,probability,predicted");
  size_t rows = 0, correct = 0;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const size_t record = std::stoul(line.substr(0, c1));
    const double p = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const int predicted = std::stoi(line.substr(c2 + 1));
    EXPECT_EQ(record, r.test_indices[rows]);
    EXPECT_EQ(predicted, p >= 0.5 ? 1 : 0);
    correct += predicted == toy.data.records[record].label;
    ++rows;
  }
  EXPECT_EQ(rows, r.test_size);
  EXPECT_DOUBLE_EQ(static_cast<double>(correct) / static_cast<double>(rows), r.accuracy_concat);
}

}  // namespace
}  // namespace contrastmap
