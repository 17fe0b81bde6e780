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

#include "contrastmap/cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "contrastmap/embedding_io.h"
#include "contrastmap/manifest.h"
#include "json.hpp"

namespace contrastmap {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> DirContents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) files[entry.path().filename().string()] = Slurp(entry.path());
  return files;
}

void Put(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("contrastmap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string P(const std::string& name) const { return (root_ / name).string(); }

  // Small planted world plus its split, used by the pipeline tests.
  void Synth() {
    ASSERT_EQ(Cli({"--seed", "4", "--out", P("w"), "--quiet", "synth", "--words", "400", "--dimension", "10",
                   "--documents", "80"})
                  .code,
              0);
    ASSERT_EQ(Cli({"--out", P("s"), "--quiet", "split", "--pairs", P("w/pairs.tsv")}).code, 0);
  }

  fs::path root_;
};

// Prefix of the one-line diagnostic and the matching exit code.
void ExpectError(const Outcome& o, int code, const std::string& prefix) {
  EXPECT_EQ(o.code, code) << o.err;
  EXPECT_EQ(o.err.substr(0, prefix.size()), prefix) << o.err;
  EXPECT_EQ(std::count(o.err.begin(), o.err.end(), '\n'), 1) << o.err;
}

TEST_F(CliTest, UsageErrors) {
  ExpectError(Cli({}), cli::kExitUsage, "E1 ");
  ExpectError(Cli({"--out", P("o")}), cli::kExitUsage, "E1 ");
  ExpectError(Cli({"--out", P("o"), "frobnicate"}), cli::kExitUsage, "E1 ");
  ExpectError(Cli({"split", "--pairs", P("x")}), cli::kExitUsage, "E1 ");
  ExpectError(Cli({"--out", P("o"), "split"}), cli::kExitUsage, "E1 ");
  ExpectError(Cli({"--out", P("o"), "--seed", "abc", "stats", "--pairs", P("x")}), cli::kExitUsage, "E1 ");
  ExpectError(Cli({"--out", P("o"), "train", "--embeddings", P("e"), "--pairs", P("p"), "--mode", "other"}),
              cli::kExitUsage, "E1 ");
  EXPECT_FALSE(fs::exists(P("o")));
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

TEST_F(CliTest, InputErrors) {
  ExpectError(Cli({"--out", P("o"), "stats", "--pairs", P("missing.tsv")}), cli::kExitInput, "E2 ");
  EXPECT_FALSE(fs::exists(P("o")));
  Put(P("empty.tsv"), "# nothing\n");
  ExpectError(Cli({"--out", P("o"), "stats", "--pairs", P("empty.tsv")}), cli::kExitInput, "E2 ");
  Put(P("bad.txt"), "a 1 2\nb 1\n");
  Put(P("pairs.tsv"), "a\tb\tsynonym\n");
  ExpectError(Cli({"--out", P("o2"), "eval-distances", "--embeddings", P("bad.txt"), "--pairs", P("pairs.tsv")}),
              cli::kExitInput, "E2 ");
  ExpectError(Cli({"--out", P("o3"), "split", "--pairs", P("pairs.tsv"), "--test-every", "1"}), cli::kExitInput,
              "E2 ");
  ExpectError(Cli({"--out", P("o4"), "stats", "--pairs", root_.string()}), cli::kExitInput, "E2 ");
}

TEST_F(CliTest, DivergenceIsNumericError) {
  Put(P("huge.txt"), "a 1.5e308 1.5e308 1.5e308\nb -1.5e308 1.5e308 1.5e308\nc 1.5e308 -1.5e308 1.5e308\n"
                     "d 1.5e308 1.5e308 -1.5e308\n");
  Put(P("pairs.tsv"), "a\tb\tsynonym\na\tc\tantonym\nd\tb\tsynonym\nd\tc\tantonym\n");
  const auto o = Cli({"--out", P("o"), "train", "--embeddings", P("huge.txt"), "--pairs", P("pairs.tsv"),
                      "--layers", "3,4,2", "--activation", "relu", "--epochs", "2"});
  ExpectError(o, cli::kExitNumeric, "E3 ");
}

TEST_F(CliTest, SplitOutputsAndManifest) {
  Put(P("pairs.tsv"), "a\tb\tsynonym\nc\td\tantonym\ne\tf\tsynonym\ng\th\tantonym\nb\ti\tsynonym\n");
  const std::string before = Slurp(P("pairs.tsv"));
  const auto o = Cli({"--out", P("o"), "split", "--pairs", P("pairs.tsv")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(Slurp(P("pairs.tsv")), before);
  for (const char* f : {"train.tsv", "test.tsv", "split.json", "split_trace.tsv", "run.json"}) {
    EXPECT_TRUE(fs::exists(root_ / "o" / f)) << f;
  }
  std::string problem;
  EXPECT_TRUE(VerifyManifest(root_ / "o", &problem)) << problem;
  const auto run = nlohmann::json::parse(Slurp(P("o/run.json")));
  EXPECT_EQ(run["subcommand"], "split");
  EXPECT_EQ(run["inputs"][0]["sha256"], Sha256Hex(before));
  EXPECT_EQ(run["outputs"].size(), 4u);

  Put(P("o/train.tsv"), "tampered\n");
  EXPECT_FALSE(VerifyManifest(root_ / "o", &problem));
  EXPECT_EQ(problem, "hash mismatch: train.tsv");
}

TEST_F(CliTest, RefusesToOverwriteInput) {
  fs::create_directories(P("o"));
  Put(P("o/train.tsv"), "a\tb\tsynonym\nc\td\tantonym\ne\tf\tsynonym\ng\th\tantonym\n");
  const std::string before = Slurp(P("o/train.tsv"));
  ExpectError(Cli({"--out", P("o"), "split", "--pairs", P("o/train.tsv")}), cli::kExitInput, "E2 ");
  EXPECT_EQ(Slurp(P("o/train.tsv")), before);
}

TEST_F(CliTest, PipelineIsByteReproducible) {
  Synth();
  auto pipeline = [&](const std::string& d) {
    std::vector<std::vector<std::string>> steps = {
        {"--seed", "7", "--out", P(d + "/t"), "train", "--embeddings", P("w/embeddings.txt"), "--pairs",
         P("s/train.tsv"), "--layers", "10,16,4", "--epochs", "3"},
        {"--out", P(d + "/x"), "transform", "--model", P(d + "/t/model.json"), "--embeddings",
         P("w/embeddings.txt")},
        {"--out", P(d + "/d"), "eval-distances", "--embeddings", P(d + "/x/new.txt"), "--pairs", P("s/test.tsv"),
         "--label", "new"},
        {"--out", P(d + "/h"), "eval-shifts", "--before", P("w/embeddings.txt"), "--after", P(d + "/x/new.txt"),
         "--pairs", P("s/test.tsv")},
        {"--out", P(d + "/e"), "eval-extremes", "--embeddings", P(d + "/x/new.txt"), "--pairs", P("s/test.tsv"),
         "-n", "3"},
        {"--out", P(d + "/c"), "eval-classifiers", "--raw", P("w/embeddings.txt"), "--new", P(d + "/x/new.txt"),
         "--concat", P(d + "/x/concat.txt"), "--train", P("s/train.tsv"), "--test", P("s/test.tsv"), "--rounds",
         "10"},
        {"--seed", "3", "--out", P(d + "/ds"), "downstream", "--raw", P("w/embeddings.txt"), "--concat",
         P(d + "/x/concat.txt"), "--data", P("w/corpus.csv"), "--predictions"},
        {"--out", P(d + "/st"), "stats", "--pairs", P("w/pairs.tsv")},
    };
    for (auto& s : steps) {
      s.push_back("--quiet");
      const auto o = Cli(s);
      ASSERT_EQ(o.code, 0) << s[s.size() - 2] << ": " << o.err;
      EXPECT_EQ(o.out, "");
    }
  };
  pipeline("a");
  pipeline("b");
  for (const char* sub : {"t", "x", "d", "h", "e", "c", "ds", "st"}) {
    const auto a = DirContents(root_ / "a" / sub), b = DirContents(root_ / "b" / sub);
    ASSERT_EQ(a.size(), b.size()) << sub;
    for (const auto& [name, content] : a) {
      if (name == "run.json") continue;  // records input paths, which differ between a/ and b/
      EXPECT_EQ(content, b.at(name)) << sub << "/" << name;
    }
    std::string problem;
    EXPECT_TRUE(VerifyManifest(root_ / "a" / sub, &problem)) << problem;
  }
  EXPECT_TRUE(fs::exists(P("a/ds/predictions_concat.csv")));
  const auto transform = nlohmann::json::parse(Slurp(P("a/x/transform.json")));
  EXPECT_EQ(transform["new_dimension"], 4);
  EXPECT_EQ(transform["concat_dimension"], 14);
}

TEST_F(CliTest, RerunIntoSameDirectoryIsIdentical) {
  Synth();
  const auto first = DirContents(root_ / "s");
  ASSERT_EQ(Cli({"--out", P("s"), "--quiet", "split", "--pairs", P("w/pairs.tsv")}).code, 0);
  EXPECT_EQ(DirContents(root_ / "s"), first);
}

TEST_F(CliTest, OutputsStayUnderOut) {
  Synth();
  std::vector<std::string> top;
  for (const auto& e : fs::directory_iterator(root_)) top.push_back(e.path().filename().string());
  std::sort(top.begin(), top.end());
  EXPECT_EQ(top, (std::vector<std::string>{"s", "w"}));
}

TEST_F(CliTest, TrainedModelRoundTripsThroughTransform) {
  Synth();
  ASSERT_EQ(Cli({"--out", P("t"), "--quiet", "train", "--embeddings", P("w/embeddings.txt"), "--pairs",
                 P("s/train.tsv"), "--layers", "10,8,3", "--epochs", "2", "--mode", "classifier-system"})
                .code,
            0);
  EXPECT_TRUE(fs::exists(P("t/head.json")));
  const auto report = nlohmann::json::parse(Slurp(P("t/train_report.json")));
  EXPECT_EQ(report["mode"], "classifier-system");
  ASSERT_EQ(Cli({"--out", P("x"), "--quiet", "transform", "--model", P("t/model.json"), "--embeddings",
                 P("w/embeddings.txt")})
                .code,
            0);
  const auto table = LoadEmbeddingFile(P("x/new.txt"));
  EXPECT_EQ(table.dimension(), 3u);
  EXPECT_EQ(EmbeddingTextString(table), Slurp(P("x/new.txt")));
  ExpectError(Cli({"--out", P("y"), "transform", "--model", P("t/model.json"), "--embeddings", P("s/train.tsv")}),
              cli::kExitInput, "E2 ");
}

TEST_F(CliTest, GlobalFlagsAfterSubcommand) {
  Put(P("pairs.tsv"), "a\tb\tsynonym\nc\td\tantonym\n");
  const auto o = Cli({"stats", "--pairs", P("pairs.tsv"), "--out", P("o"), "--seed", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("stats: 2 components"), std::string::npos) << o.out;
  const auto stats = nlohmann::json::parse(Slurp(P("o/stats.json")));
  EXPECT_EQ(stats["components"], 2);
  EXPECT_EQ(nlohmann::json::parse(Slurp(P("o/run.json")))["options"]["seed"], 2);
}

}  // namespace
}  // namespace contrastmap
