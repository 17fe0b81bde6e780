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

#include "contrastmap/contrast_trainer.h"

#include <gtest/gtest.h>

#include <cmath>

#include "contrastmap/errors.h"
#include "contrastmap/planted.h"
#include "contrastmap/random.h"

namespace contrastmap {
namespace {

PlantedConfig SmallWorld() {
  PlantedConfig c;
  c.words = 1000;
  c.dimension = 20;
  c.seed = 17;
  return c;
}

struct Prepared {
  PlantedWorld world;
  SplitResult split;
  std::vector<Triplet> train_triplets;
  std::vector<Triplet> test_triplets;
};

const Prepared& Data() {
  static const Prepared* data = [] {
    auto* p = new Prepared{GeneratePlantedWorld(SmallWorld()), {}, {}, {}};
    p->split = SplitPairs(p->world.pairs);
    p->train_triplets = BuildTriplets(p->split.train, 20, 1);
    p->test_triplets = BuildTriplets(p->split.test, 20, 1);
    return p;
  }();
  return *data;
}

TrainConfig SmallConfig(TrainMode mode = TrainMode::kBaseline) {
  TrainConfig c;
  c.layer_dims = {20, 32, 8};
  c.max_epochs = 15;
  c.seed = 3;
  c.mode = mode;
  return c;
}

double MeanCosineGap(const MlpParams& map, const EmbeddingTable& table, const std::vector<Triplet>& triplets) {
  const TripletBatch batch = ResolveTriplets(table, triplets);
  double syn = 0.0, ant = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto fw = Forward(map, batch.anchors[i]);
    syn += GuardedCosine(fw, Forward(map, batch.synonyms[i]));
    ant += GuardedCosine(fw, Forward(map, batch.antonyms[i]));
  }
  return (syn - ant) / static_cast<double>(batch.size());
}

TEST(TrainConfig, Validation) {
  TrainConfig c = SmallConfig();
  c.max_epochs = 0;
  EXPECT_THROW(c.Validate(), InputError);
  EXPECT_THROW(TrainBaseline(Data().world.embeddings, Data().train_triplets, c), InputError);
  c = SmallConfig();
  c.validation_fraction = 0.0;
  EXPECT_THROW(c.Validate(), InputError);
  c = SmallConfig();
  c.layer_dims = {19, 8};
  EXPECT_THROW(TrainBaseline(Data().world.embeddings, Data().train_triplets, c), InputError);
}

TEST(TrainBaseline, OneEpoch) {
  TrainConfig c = SmallConfig();
  c.max_epochs = 1;
  auto r = TrainBaseline(Data().world.embeddings, Data().train_triplets, c);
  EXPECT_EQ(r.report.train_loss.size(), 1u);
  EXPECT_EQ(r.report.validation_loss.size(), 1u);
  EXPECT_EQ(r.report.stopped_epoch, 1u);
  EXPECT_EQ(r.report.best_epoch, 1u);
  EXPECT_FALSE(r.head.has_value());
  EXPECT_EQ(r.map.layer_dims, (std::vector<size_t>{20, 32, 8}));
}

TEST(TrainBaseline, LearnsPlantedStructure) {
  const auto& d = Data();
  auto r = TrainBaseline(d.world.embeddings, d.train_triplets, SmallConfig());
  const auto& val = r.report.validation_loss;
  ASSERT_FALSE(val.empty());
  EXPECT_LT(val[r.report.best_epoch - 1], 0.5 * val.front());
  EXPECT_LE(val[r.report.best_epoch - 1], val.front());
  for (double v : val) EXPECT_GE(v, val[r.report.best_epoch - 1]);
  EXPECT_GE(MeanCosineGap(r.map, d.world.embeddings, d.test_triplets), 0.2);
  EXPECT_EQ(r.report.triplets_total, d.train_triplets.size());
  EXPECT_EQ(r.report.triplets_validation, d.train_triplets.size() / 10);
}

TEST(TrainBaseline, NormalizedInputsAlsoLearn) {
  // Same task with unit-length inputs.
  const auto& d = Data();
  EmbeddingTable unit(d.world.embeddings.dimension());
  for (size_t i = 0; i < d.world.embeddings.size(); ++i) {
    auto row = d.world.embeddings.row(i);
    double norm = 0.0;
    for (double x : row) norm += x * x;
    std::vector<double> scaled(row.begin(), row.end());
    for (double& x : scaled) x /= std::sqrt(norm);
    unit.Insert(d.world.embeddings.word(i), scaled);
  }
  auto r = TrainBaseline(unit, d.train_triplets, SmallConfig());
  EXPECT_GE(MeanCosineGap(r.map, unit, d.test_triplets), 0.2);
}

TEST(TrainBaseline, Deterministic) {
  const auto& d = Data();
  TrainConfig c = SmallConfig();
  c.max_epochs = 3;
  auto a = TrainBaseline(d.world.embeddings, d.train_triplets, c);
  auto b = TrainBaseline(d.world.embeddings, d.train_triplets, c);
  EXPECT_EQ(a.map, b.map);
  EXPECT_EQ(a.report.train_loss, b.report.train_loss);
  EXPECT_EQ(a.report.validation_loss, b.report.validation_loss);
  EXPECT_EQ(a.report.ToJson().dump(), b.report.ToJson().dump());
  c.seed = 4;
  EXPECT_NE(TrainBaseline(d.world.embeddings, d.train_triplets, c).map, a.map);
}

TEST(TrainBaseline, EarlyStopping) {
  // Roles assigned at random: nothing generalizes, so validation stalls.
  const auto& d = Data();
  Rng rng(99);
  std::vector<Triplet> noise;
  for (int i = 0; i < 300; ++i) {
    noise.push_back({d.world.embeddings.word(rng.UniformIndex(1000)), d.world.embeddings.word(rng.UniformIndex(1000)),
                     d.world.embeddings.word(rng.UniformIndex(1000))});
  }
  TrainConfig c = SmallConfig();
  c.max_epochs = 200;
  c.early_stop_patience = 3;
  c.learning_rate = 0.01;
  auto r = TrainBaseline(d.world.embeddings, noise, c);
  EXPECT_LT(r.report.stopped_epoch, 200u);
  EXPECT_EQ(r.report.stopped_epoch, r.report.best_epoch + 3);
  EXPECT_EQ(r.report.validation_loss.size(), r.report.stopped_epoch);
}

TEST(TrainBaseline, UnresolvableTriplets) {
  std::vector<Triplet> ghosts = {{"nope", "nada", "zip"}};
  EXPECT_THROW(TrainBaseline(Data().world.embeddings, ghosts, SmallConfig()), InputError);
  auto mixed = Data().train_triplets;
  mixed.push_back({"nope", "nada", "zip"});
  TrainConfig c = SmallConfig();
  c.max_epochs = 1;
  EXPECT_EQ(TrainBaseline(Data().world.embeddings, mixed, c).report.triplets_dropped, 1u);
}

TEST(TrainBaseline, SingleTriplet) {
  TrainConfig c = SmallConfig();
  c.max_epochs = 2;
  std::vector<Triplet> one = {Data().train_triplets.front()};
  auto r = TrainBaseline(Data().world.embeddings, one, c);
  EXPECT_EQ(r.report.triplets_validation, 1u);
  EXPECT_EQ(r.report.validation_loss.size(), 2u);
}

TEST(TrainBaseline, OverflowDiverges) {
  EmbeddingTable table(4);
  const double big = 1.5e308;
  const double w[] = {big, big, big, big}, s[] = {big, -big, big, big}, a[] = {-big, big, -big, big};
  table.Insert("w", w);
  table.Insert("s", s);
  table.Insert("a", a);
  TrainConfig c;
  c.layer_dims = {4, 3, 2};
  c.hidden_activation = Activation::kRelu;
  std::vector<Triplet> triplets = {{"w", "s", "a"}, {"s", "w", "a"}};
  try {
    TrainBaseline(table, triplets, c);
    FAIL() << "expected divergence";
  } catch (const NumericError& e) {
    EXPECT_STREQ(e.what(), "diverged");
  }
}

TEST(ClassifierSystem, ZeroHeadGivesNoMapSignal) {
  const auto& d = Data();
  const size_t map_dims[] = {20, 32, 8};
  const size_t head_dims[] = {16, 32, 1};
  const auto map = InitParams(map_dims, Activation::kTanh, 1);
  const auto head = InitParams(head_dims, Activation::kTanh, 2).ZerosLike();
  const TripletBatch batch = ResolveTriplets(d.world.embeddings,
                                             std::span(d.train_triplets).subspan(0, 32));
  auto g = ClassifierSystemBackward(map, head, batch);
  for (double x : g.map_gradient.Flatten()) EXPECT_EQ(x, 0.0);
  EXPECT_NEAR(g.loss, std::log(2.0), 1e-12);
}

TEST(ClassifierSystem, LearnsPlantedStructure) {
  const auto& d = Data();
  TrainConfig c = SmallConfig(TrainMode::kClassifierSystem);
  c.max_epochs = 50;  // the default budget
  auto r = TrainClassifierSystem(d.world.embeddings, d.train_triplets, c);
  ASSERT_TRUE(r.head.has_value());
  EXPECT_EQ(r.head->layer_dims, (std::vector<size_t>{16, 32, 1}));
  const TripletBatch held_out = ResolveTriplets(d.world.embeddings, d.test_triplets);
  EXPECT_GT(HeadAccuracy(r.map, *r.head, held_out), 0.9);
}

TEST(ClassifierSystem, Deterministic) {
  const auto& d = Data();
  TrainConfig c = SmallConfig(TrainMode::kClassifierSystem);
  c.max_epochs = 2;
  auto a = Train(d.world.embeddings, d.train_triplets, c);
  auto b = Train(d.world.embeddings, d.train_triplets, c);
  EXPECT_EQ(a.map, b.map);
  EXPECT_EQ(*a.head, *b.head);
  EXPECT_EQ(a.report.validation_loss, b.report.validation_loss);
}

TEST(ClassifierSystem, ModeMismatch) {
  EXPECT_THROW(TrainClassifierSystem(Data().world.embeddings, Data().train_triplets, SmallConfig()), InputError);
  EXPECT_THROW(TrainBaseline(Data().world.embeddings, Data().train_triplets,
                             SmallConfig(TrainMode::kClassifierSystem)),
               InputError);
  EXPECT_EQ(ParseTrainMode("classifier-system"), TrainMode::kClassifierSystem);
  EXPECT_THROW(ParseTrainMode("siamese"), InputError);
}

TEST(TransformVocabulary, IdentityMap) {
  MlpParams id;
  id.layer_dims = {3, 3};
  id.weights = {Matrix(3, 3)};
  for (size_t i = 0; i < 3; ++i) id.weights[0](i, i) = 1.0;
  id.biases = {{0, 0, 0}};
  auto raw = ParseEmbeddingText("a 1 2 3\nb -1 0.5 2\nc 0 0 1e-300\n");
  size_t dropped = 9;
  auto out = TransformVocabulary(id, raw, &dropped);
  EXPECT_EQ(dropped, 0u);
  EXPECT_TRUE(out.SameContents(raw));
}

TEST(TransformVocabulary, DimensionAndDegenerateRows) {
  const size_t dims[] = {3, 2};
  MlpParams map = InitParams(dims, Activation::kTanh, 1);
  map.weights[0](0, 0) = map.weights[0](0, 1) = map.weights[0](0, 2) = 0.0;
  map.weights[0](1, 0) = map.weights[0](1, 1) = map.weights[0](1, 2) = 0.0;
  map.weights[0](0, 0) = 1.0;
  auto raw = ParseEmbeddingText("a 1 2 3\nb 0 5 5\n");
  size_t dropped = 0;
  auto out = TransformVocabulary(map, raw, &dropped);
  EXPECT_EQ(out.dimension(), 2u);
  EXPECT_EQ(dropped, 1u);
  EXPECT_TRUE(out.Contains("a"));
  EXPECT_FALSE(out.Contains("b"));
  EXPECT_THROW(TransformVocabulary(map, ParseEmbeddingText("a 1 2\n"), nullptr), InputError);
}

TEST(ConcatEmbeddings, Examples) {
  auto raw = ParseEmbeddingText("a 1 0\nb 0 1\n");
  auto fresh = ParseEmbeddingText("a 5\nz 1\n");
  size_t missing = 0;
  auto cat = ConcatEmbeddings(raw, fresh, &missing);
  EXPECT_EQ(cat.size(), 1u);
  EXPECT_EQ(cat.dimension(), 3u);
  auto row = *cat.Lookup("a");
  EXPECT_EQ(std::vector<double>(row.begin(), row.end()), (std::vector<double>{1, 0, 5}));
  EXPECT_EQ(missing, 2u);
  EXPECT_EQ(CosineDistance(row, row), 0.0);
  EXPECT_THROW(ConcatEmbeddings(raw, ParseEmbeddingText("q 1\n")), InputError);
}

}  // namespace
}  // namespace contrastmap
