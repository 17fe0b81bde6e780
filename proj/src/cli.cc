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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "contrastmap/contrast_trainer.h"
#include "contrastmap/downstream.h"
#include "contrastmap/embedding_io.h"
#include "contrastmap/errors.h"
#include "contrastmap/evaluation.h"
#include "contrastmap/manifest.h"
#include "contrastmap/pair_dataset.h"
#include "contrastmap/planted.h"

namespace contrastmap::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  uint64_t seed = 0;
  std::string out;
  bool quiet = false;
};

// Everything a subcommand needs once parsing is done.
struct Context {
  const Globals& globals;
  RunManifest& manifest;
  std::ostream& log;

  void Info(const std::string& line) const {
    if (!globals.quiet) log << line << '\n';
  }
};

std::string JsonText(const json& j) { return j.dump(2) + "\n"; }

std::string PairsText(const PairSet& pairs) {
  std::ostringstream s;
  WritePairs(pairs, s);
  return s.str();
}

json SizesJson(const std::vector<size_t>& v) { return json(v); }

void RequireReadable(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw InputError("cannot read " + path);
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw InputError("cannot read " + path);
}

// --- subcommands -----------------------------------------------------------

struct SplitOptions {
  std::string pairs;
  size_t test_every = 4;
};

void RunSplit(const SplitOptions& o, Context& ctx) {
  ctx.manifest.AddInput("pairs", o.pairs);
  ctx.manifest.SetOption("test_every", o.test_every);
  if (o.test_every < 2) throw InputError("--test-every must be at least 2");
  const PairSet pairs = LoadPairFile(o.pairs);
  const SplitResult split = SplitPairs(pairs, o.test_every);

  json summary = SplitSummaryJson(split);
  summary["input_pairs"] = pairs.size();
  summary["input_dropped_duplicates"] = pairs.dropped_duplicates;
  summary["input_dropped_conflicts"] = pairs.dropped_conflicts;
  summary["input_malformed_lines"] = pairs.malformed_lines;

  std::string trace = "left\tright\tdecision\n";
  for (size_t i = 0; i < pairs.size(); ++i) {
    trace += pairs.pairs[i].left + '\t' + pairs.pairs[i].right + '\t' +
             std::string(SplitDecisionName(split.trace[i])) + '\n';
  }
  ctx.manifest.WriteArtifact("train.tsv", PairsText(split.train));
  ctx.manifest.WriteArtifact("test.tsv", PairsText(split.test));
  ctx.manifest.WriteArtifact("split.json", JsonText(summary));
  ctx.manifest.WriteArtifact("split_trace.tsv", trace);
  ctx.Info("split: " + std::to_string(split.train.size()) + " train, " + std::to_string(split.test.size()) +
           " test, " + std::to_string(split.dropped_spanning) + " dropped");
}

struct StatsOptions {
  std::string pairs;
};

void RunStats(const StatsOptions& o, Context& ctx) {
  ctx.manifest.AddInput("pairs", o.pairs);
  const PairSet pairs = LoadPairFile(o.pairs);
  const RelationGraph graph = BuildGraph(pairs);
  const ComponentStats stats = ComputeComponentStats(graph);

  std::vector<size_t> sizes = stats.component_vertex_counts;
  std::sort(sizes.rbegin(), sizes.rend());
  if (sizes.size() > 10) sizes.resize(10);

  json j = {{"pairs", pairs.size()},
            {"synonym_pairs", pairs.CountRelation(Relation::kSynonym)},
            {"antonym_pairs", pairs.CountRelation(Relation::kAntonym)},
            {"dropped_duplicates", pairs.dropped_duplicates},
            {"dropped_conflicts", pairs.dropped_conflicts},
            {"malformed_lines", pairs.malformed_lines},
            {"vocabulary", graph.vertices.size()},
            {"components", stats.component_count},
            {"giant_vertices", stats.giant_vertices},
            {"giant_edges", stats.giant_edges},
            {"giant_share_of_pairs", stats.giant_share_of_pairs},
            {"largest_component_sizes", SizesJson(sizes)}};
  ctx.manifest.WriteArtifact("stats.json", JsonText(j));
  ctx.Info("stats: " + std::to_string(stats.component_count) + " components, giant has " +
           std::to_string(stats.giant_vertices) + " words");
}

struct TrainOptions {
  std::string embeddings;
  std::string pairs;
  std::string mode = "baseline";
  std::vector<size_t> layers;
  std::vector<size_t> head_layers;
  std::string activation = "tanh";
  double learning_rate = 1e-3;
  size_t batch_size = 256;
  size_t epochs = 50;
  size_t patience = 5;
  double validation_fraction = 0.1;
  size_t cap_per_anchor = 20;
};

void RunTrain(const TrainOptions& o, Context& ctx) {
  ctx.manifest.AddInput("embeddings", o.embeddings);
  ctx.manifest.AddInput("pairs", o.pairs);

  TrainConfig config;
  config.mode = ParseTrainMode(o.mode);
  config.layer_dims = o.layers;
  config.head_dims = o.head_layers;
  config.hidden_activation = ParseActivation(o.activation);
  config.learning_rate = o.learning_rate;
  config.batch_size = o.batch_size;
  config.max_epochs = o.epochs;
  config.early_stop_patience = o.patience;
  config.validation_fraction = o.validation_fraction;
  config.seed = ctx.globals.seed;
  config.Validate();
  if (o.cap_per_anchor == 0) throw InputError("--cap-per-anchor must be positive");
  ctx.manifest.SetOption("train_config", config.ToJson());
  ctx.manifest.SetOption("cap_per_anchor", o.cap_per_anchor);

  const EmbeddingTable table = LoadEmbeddingFile(o.embeddings);
  const PairSet pairs = LoadPairFile(o.pairs);
  const auto triplets = BuildTriplets(pairs, o.cap_per_anchor, ctx.globals.seed);
  ctx.Info("train: " + std::to_string(triplets.size()) + " triplets over " + std::to_string(table.size()) +
           " words");

  const TrainResult result = Train(table, triplets, config);
  ctx.manifest.WriteArtifact("model.json", ModelToJson(result.map).dump(1) + "\n");
  if (result.head) ctx.manifest.WriteArtifact("head.json", ModelToJson(*result.head).dump(1) + "\n");
  json report = result.report.ToJson();
  report["mode"] = TrainModeName(config.mode);
  ctx.manifest.WriteArtifact("train_report.json", JsonText(report));
  ctx.Info("train: stopped after epoch " + std::to_string(result.report.stopped_epoch) + ", kept epoch " +
           std::to_string(result.report.best_epoch));
}

struct TransformOptions {
  std::string model;
  std::string embeddings;
};

void RunTransform(const TransformOptions& o, Context& ctx) {
  ctx.manifest.AddInput("model", o.model);
  ctx.manifest.AddInput("embeddings", o.embeddings);
  const MlpParams map = LoadModelFile(o.model);
  EmbeddingTable raw = LoadEmbeddingFile(o.embeddings);
  if (map.layer_dims.front() != raw.dimension()) {
    throw InputError("model expects dimension " + std::to_string(map.layer_dims.front()) + ", embeddings have " +
                     std::to_string(raw.dimension()));
  }
  size_t degenerate = 0, missing = 0;
  const EmbeddingTable transformed = TransformVocabulary(map, raw, &degenerate);
  const EmbeddingTable concat = ConcatEmbeddings(raw, transformed, &missing);
  ctx.manifest.WriteArtifact("new.txt", EmbeddingTextString(transformed));
  ctx.manifest.WriteArtifact("concat.txt", EmbeddingTextString(concat));
  json j = {{"raw_words", raw.size()},
            {"raw_dimension", raw.dimension()},
            {"new_words", transformed.size()},
            {"new_dimension", transformed.dimension()},
            {"concat_words", concat.size()},
            {"concat_dimension", concat.dimension()},
            {"dropped_degenerate", degenerate}};
  ctx.manifest.WriteArtifact("transform.json", JsonText(j));
  ctx.Info("transform: " + std::to_string(transformed.size()) + " words mapped, " + std::to_string(degenerate) +
           " degenerate");
}

struct DistanceOptions {
  std::string embeddings;
  std::string pairs;
  std::string label = "raw";
};

void RunEvalDistances(const DistanceOptions& o, Context& ctx) {
  ctx.manifest.AddInput("embeddings", o.embeddings);
  ctx.manifest.AddInput("pairs", o.pairs);
  ctx.manifest.SetOption("label", o.label);
  const DistanceReport report = BuildDistanceReport(LoadEmbeddingFile(o.embeddings), LoadPairFile(o.pairs), o.label);
  std::ostringstream csv;
  report.WriteCsv(csv);
  ctx.manifest.WriteArtifact("distances.csv", csv.str());
  ctx.manifest.WriteArtifact("distances.json", JsonText(report.SummaryJson()));
  ctx.Info("eval-distances: " + std::to_string(report.synonym_pairs) + " synonym, " +
           std::to_string(report.antonym_pairs) + " antonym pairs");
}

struct ShiftOptions {
  std::string before;
  std::string after;
  std::string pairs;
};

void RunEvalShifts(const ShiftOptions& o, Context& ctx) {
  ctx.manifest.AddInput("before", o.before);
  ctx.manifest.AddInput("after", o.after);
  ctx.manifest.AddInput("pairs", o.pairs);
  const ShiftReport report =
      BuildShiftReport(LoadEmbeddingFile(o.before), LoadEmbeddingFile(o.after), LoadPairFile(o.pairs));
  std::ostringstream csv;
  report.WriteCsv(csv);
  ctx.manifest.WriteArtifact("shifts.csv", csv.str());
  ctx.manifest.WriteArtifact("shifts.json", JsonText(report.SummaryJson()));
  ctx.Info("eval-shifts: mean synonym shift " + FormatDouble(report.mean_synonym_shift) + ", antonym " +
           FormatDouble(report.mean_antonym_shift));
}

struct ExtremeOptions {
  std::string embeddings;
  std::string pairs;
  size_t count = 10;
};

void RunEvalExtremes(const ExtremeOptions& o, Context& ctx) {
  ctx.manifest.AddInput("embeddings", o.embeddings);
  ctx.manifest.AddInput("pairs", o.pairs);
  ctx.manifest.SetOption("count", o.count);
  const DistanceReport report = BuildDistanceReport(LoadEmbeddingFile(o.embeddings), LoadPairFile(o.pairs));
  ctx.manifest.WriteArtifact("extremes.json", JsonText(FindExtremePairs(report, o.count).ToJson()));
  ctx.Info("eval-extremes: done");
}

struct ClassifierOptions {
  std::string raw;
  std::string transformed;
  std::string concat;
  std::string train;
  std::string test;
  size_t rounds = 200;
  double shrinkage = 0.1;
  size_t depth = 2;
};

void RunEvalClassifiers(const ClassifierOptions& o, Context& ctx) {
  ctx.manifest.AddInput("raw", o.raw);
  ctx.manifest.AddInput("new", o.transformed);
  ctx.manifest.AddInput("concat", o.concat);
  ctx.manifest.AddInput("train_pairs", o.train);
  ctx.manifest.AddInput("test_pairs", o.test);
  AccuracyConfig config;
  config.boosted.rounds = o.rounds;
  config.boosted.shrinkage = o.shrinkage;
  config.boosted.max_depth = o.depth;
  ctx.manifest.SetOption("classifiers", config.ToJson());

  const AccuracyTable table =
      BuildAccuracyTable(LoadEmbeddingFile(o.raw), LoadEmbeddingFile(o.transformed), LoadEmbeddingFile(o.concat),
                         LoadPairFile(o.train), LoadPairFile(o.test), config);
  ctx.manifest.WriteArtifact("accuracy.json", JsonText(table.ToJson()));
  ctx.manifest.WriteArtifact("accuracy.txt", table.ToText());
  if (!ctx.globals.quiet) ctx.log << table.ToText();
}

struct DownstreamOptions {
  std::string raw;
  std::string concat;
  std::string data;
  double test_fraction = 0.25;
  bool predictions = false;
};

void RunDownstreamCommand(const DownstreamOptions& o, Context& ctx) {
  ctx.manifest.AddInput("raw", o.raw);
  ctx.manifest.AddInput("concat", o.concat);
  ctx.manifest.AddInput("data", o.data);
  ctx.manifest.SetOption("test_fraction", o.test_fraction);
  DownstreamConfig config;
  config.test_fraction = o.test_fraction;
  config.seed = ctx.globals.seed;
  const DownstreamResult result =
      RunDownstream(LoadEmbeddingFile(o.raw), LoadEmbeddingFile(o.concat), LoadTextCsvFile(o.data), config);
  ctx.manifest.WriteArtifact("downstream.json", JsonText(result.ToJson()));
  if (o.predictions) {
    std::ostringstream raw_csv, concat_csv;
    result.WritePredictionsCsv(raw_csv, false);
    result.WritePredictionsCsv(concat_csv, true);
    ctx.manifest.WriteArtifact("predictions_raw.csv", raw_csv.str());
    ctx.manifest.WriteArtifact("predictions_concat.csv", concat_csv.str());
  }
  ctx.Info("downstream: raw " + FormatDouble(result.accuracy_raw) + ", concat " +
           FormatDouble(result.accuracy_concat));
}

struct SynthOptions {
  PlantedConfig planted;
  size_t documents = 200;
};

void RunSynth(SynthOptions o, Context& ctx) {
  o.planted.seed = ctx.globals.seed;
  ctx.manifest.SetOption("planted", o.planted.ToJson());
  ctx.manifest.SetOption("documents", o.documents);
  const PlantedWorld world = GeneratePlantedWorld(o.planted);
  const TextDataset corpus = GenerateSentimentCorpus(world, o.documents, ctx.globals.seed + 1);
  std::ostringstream csv;
  WriteTextCsv(corpus, csv);
  ctx.manifest.WriteArtifact("embeddings.txt", EmbeddingTextString(world.embeddings));
  ctx.manifest.WriteArtifact("pairs.tsv", PairsText(world.pairs));
  ctx.manifest.WriteArtifact("corpus.csv", csv.str());
  json j = {{"config", o.planted.ToJson()},
            {"words", world.embeddings.size()},
            {"pairs", world.pairs.size()},
            {"synonym_pairs", world.pairs.CountRelation(Relation::kSynonym)},
            {"antonym_pairs", world.pairs.CountRelation(Relation::kAntonym)},
            {"documents", corpus.records.size()}};
  ctx.manifest.WriteArtifact("synth.json", JsonText(j));
  ctx.Info("synth: " + std::to_string(world.embeddings.size()) + " words, " + std::to_string(world.pairs.size()) +
           " pairs");
}

std::string OneLine(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn and evaluate a contrasting map over word embeddings", "contrastmap"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all");

  Globals globals;
  app.add_option("--seed", globals.seed, "Random seed")->capture_default_str();
  app.add_option("--out", globals.out, "Output directory")->required();
  app.add_flag("--quiet", globals.quiet, "Suppress progress lines");

  std::vector<std::string> inputs;  // checked before any work starts
  std::function<void(Context&)> action;

  SplitOptions split;
  auto* cmd = app.add_subcommand("split", "Leakage-free train/test split of a pair file");
  cmd->add_option("--pairs", split.pairs, "Pair file (left<TAB>right<TAB>relation)")->required();
  cmd->add_option("--test-every", split.test_every, "Cycle length; one pair in N goes to test")->capture_default_str();
  cmd->callback([&] {
    inputs = {split.pairs};
    action = [&](Context& ctx) { RunSplit(split, ctx); };
  });

  StatsOptions stats;
  cmd = app.add_subcommand("stats", "Relation graph and component report");
  cmd->add_option("--pairs", stats.pairs, "Pair file")->required();
  cmd->callback([&] {
    inputs = {stats.pairs};
    action = [&](Context& ctx) { RunStats(stats, ctx); };
  });

  TrainOptions train;
  cmd = app.add_subcommand("train", "Train the contrasting map on triplets from training pairs");
  cmd->add_option("--embeddings", train.embeddings, "Embedding text file")->required();
  cmd->add_option("--pairs", train.pairs, "Training pair file")->required();
  cmd->add_option("--mode", train.mode, "baseline or classifier-system")
      ->check(CLI::IsMember({"baseline", "classifier-system"}))
      ->capture_default_str();
  cmd->add_option("--layers", train.layers, "Map layer sizes, e.g. 300,128,40")->delimiter(',');
  cmd->add_option("--head-layers", train.head_layers, "Classifier head sizes (classifier-system)")->delimiter(',');
  cmd->add_option("--activation", train.activation, "Hidden activation")
      ->check(CLI::IsMember({"tanh", "relu"}))
      ->capture_default_str();
  cmd->add_option("--lr", train.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", train.batch_size)->capture_default_str();
  cmd->add_option("--epochs", train.epochs, "Maximum epochs")->capture_default_str();
  cmd->add_option("--patience", train.patience, "Early-stopping patience")->capture_default_str();
  cmd->add_option("--validation-fraction", train.validation_fraction)->capture_default_str();
  cmd->add_option("--cap-per-anchor", train.cap_per_anchor, "Triplets kept per anchor word")->capture_default_str();
  cmd->callback([&] {
    inputs = {train.embeddings, train.pairs};
    action = [&](Context& ctx) { RunTrain(train, ctx); };
  });

  TransformOptions transform;
  cmd = app.add_subcommand("transform", "Apply a trained map to a vocabulary");
  cmd->add_option("--model", transform.model, "model.json from train")->required();
  cmd->add_option("--embeddings", transform.embeddings, "Embedding text file")->required();
  cmd->callback([&] {
    inputs = {transform.model, transform.embeddings};
    action = [&](Context& ctx) { RunTransform(transform, ctx); };
  });

  DistanceOptions distances;
  cmd = app.add_subcommand("eval-distances", "Cosine-distance histograms by relation");
  cmd->add_option("--embeddings", distances.embeddings)->required();
  cmd->add_option("--pairs", distances.pairs)->required();
  cmd->add_option("--label", distances.label, "Name of the space")->capture_default_str();
  cmd->callback([&] {
    inputs = {distances.embeddings, distances.pairs};
    action = [&](Context& ctx) { RunEvalDistances(distances, ctx); };
  });

  ShiftOptions shifts;
  cmd = app.add_subcommand("eval-shifts", "Per-pair distance change between two spaces");
  cmd->add_option("--before", shifts.before)->required();
  cmd->add_option("--after", shifts.after)->required();
  cmd->add_option("--pairs", shifts.pairs)->required();
  cmd->callback([&] {
    inputs = {shifts.before, shifts.after, shifts.pairs};
    action = [&](Context& ctx) { RunEvalShifts(shifts, ctx); };
  });

  ExtremeOptions extremes;
  cmd = app.add_subcommand("eval-extremes", "Closest antonyms and farthest synonyms");
  cmd->add_option("--embeddings", extremes.embeddings)->required();
  cmd->add_option("--pairs", extremes.pairs)->required();
  cmd->add_option("-n,--count", extremes.count)->capture_default_str();
  cmd->callback([&] {
    inputs = {extremes.embeddings, extremes.pairs};
    action = [&](Context& ctx) { RunEvalExtremes(extremes, ctx); };
  });

  ClassifierOptions classifiers;
  cmd = app.add_subcommand("eval-classifiers", "Pair-classifier accuracy on raw, new and concatenated spaces");
  cmd->add_option("--raw", classifiers.raw)->required();
  cmd->add_option("--new", classifiers.transformed)->required();
  cmd->add_option("--concat", classifiers.concat)->required();
  cmd->add_option("--train", classifiers.train, "Training pair file")->required();
  cmd->add_option("--test", classifiers.test, "Test pair file")->required();
  cmd->add_option("--rounds", classifiers.rounds, "Boosting rounds")->capture_default_str();
  cmd->add_option("--shrinkage", classifiers.shrinkage)->capture_default_str();
  cmd->add_option("--depth", classifiers.depth, "Tree depth")->capture_default_str();
  cmd->callback([&] {
    inputs = {classifiers.raw, classifiers.transformed, classifiers.concat, classifiers.train, classifiers.test};
    action = [&](Context& ctx) { RunEvalClassifiers(classifiers, ctx); };
  });

  DownstreamOptions downstream;
  cmd = app.add_subcommand("downstream", "Document classification with raw vs concatenated vectors");
  cmd->add_option("--raw", downstream.raw)->required();
  cmd->add_option("--concat", downstream.concat)->required();
  cmd->add_option("--data", downstream.data, "CSV with text,label")->required();
  cmd->add_option("--test-fraction", downstream.test_fraction)->capture_default_str();
  cmd->add_flag("--predictions", downstream.predictions, "Also write per-document predictions");
  cmd->callback([&] {
    inputs = {downstream.raw, downstream.concat, downstream.data};
    action = [&](Context& ctx) { RunDownstreamCommand(downstream, ctx); };
  });

  SynthOptions synth;
  cmd = app.add_subcommand("synth", "Write planted-structure fixtures");
  cmd->add_option("--words", synth.planted.words)->capture_default_str();
  cmd->add_option("--dimension", synth.planted.dimension)->capture_default_str();
  cmd->add_option("--axis-mixing", synth.planted.axis_mixing)->capture_default_str();
  cmd->add_option("--positive-rate", synth.planted.positive_rate)->capture_default_str();
  cmd->add_option("--documents", synth.documents)->capture_default_str();
  cmd->callback([&] { action = [&](Context& ctx) { RunSynth(synth, ctx); }; });

  std::vector<const char*> argv{"contrastmap"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "E1 usage: " << OneLine(e.what()) << '\n';
    return kExitUsage;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    for (const auto& path : inputs) RequireReadable(path);
    std::error_code ec;
    fs::create_directories(globals.out, ec);
    if (!fs::is_directory(globals.out)) throw InputError("cannot create output directory " + globals.out);

    RunManifest manifest(subcommand, globals.out);
    manifest.SetOption("seed", globals.seed);
    Context ctx{globals, manifest, out};
    action(ctx);
    manifest.Finish();
  } catch (const NumericError& e) {
    err << "E3 numeric: " << OneLine(e.what()) << '\n';
    return kExitNumeric;
  } catch (const InputError& e) {
    err << "E2 input: " << OneLine(e.what()) << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "E2 input: " << OneLine(e.what()) << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace contrastmap::cli
