/* Copyright 2026 The uabnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "uabnn/error.hpp"
#include "uabnn/experiments.hpp"
#include "uabnn/rng.hpp"

using namespace uabnn;
using nlohmann::json;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan p;
  p.samples_per_class = 72;  // four recordings of 18 windows
  p.train.epochs = 15;
  p.train.batch_size = 32;
  p.train.learning_rate = 1e-2;
  p.architecture.hidden = {16};
  p.eval_samples = 20;
  p.snr_grid_db = {10, -20};
  p.noise_train_snr_db = {10, -20};
  return p;
}

std::set<std::uint64_t> groups(const Dataset& d) { return {d.group_ids.begin(), d.group_ids.end()}; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("plan validation") {
  CHECK_NOTHROW(ExperimentPlan{}.validate());
  auto bad = [](auto mutate) {
    ExperimentPlan p;
    mutate(p);
    CHECK_THROWS_AS(p.validate(), ConfigError);
  };
  bad([](ExperimentPlan& p) { p.seen_classes = {FaultClass::kNoFault}; });
  bad([](ExperimentPlan& p) { p.seen_classes = {FaultClass::kNoFault, FaultClass::kNoFault}; });
  bad([](ExperimentPlan& p) { p.unseen_classes = {FaultClass::kNoFault}; });
  bad([](ExperimentPlan& p) { p.incremental_order = {FaultClass::kMissingTooth}; });
  bad([](ExperimentPlan& p) { p.incremental_order = {FaultClass::kRootCrack, FaultClass::kRootCrack}; });
  bad([](ExperimentPlan& p) { p.snr_grid_db = {0, 10}; });
  bad([](ExperimentPlan& p) { p.snr_grid_db = {}; });
  bad([](ExperimentPlan& p) { p.noise_train_snr_db = {}; });
  bad([](ExperimentPlan& p) { p.split_ratio = 1.0; });
  bad([](ExperimentPlan& p) { p.window_len = 8; });
  bad([](ExperimentPlan& p) { p.eval_samples = 1; });
  bad([](ExperimentPlan& p) { p.signal.gear_mesh_freq_hz = 600; });
  bad([](ExperimentPlan& p) { p.window_len = 6000; });
}

TEST_CASE("plan json round trip") {
  auto p = small_plan();
  p.master_seed = 0xFFFFFFFFFFFFFFF1ULL;
  p.warm_start = true;
  const json j = p;
  const auto back = j.get<ExperimentPlan>();
  CHECK(json(back) == j);
  CHECK(back.master_seed == p.master_seed);
  CHECK(back.seen_classes == p.seen_classes);
  CHECK(j["seen_classes"][1] == "MissingTooth");

  const auto partial = json::parse(R"({"samples_per_class": 50, "train": {"epochs": 3}})").get<ExperimentPlan>();
  CHECK(partial.samples_per_class == 50);
  CHECK(partial.train.epochs == 3);
  CHECK(partial.train.kl_weighting == KlWeighting::kPerExample);
  CHECK_THROWS_AS(json::parse(R"({"sample_per_class": 50})").get<ExperimentPlan>(), ConfigError);
  CHECK_THROWS_AS(json::parse(R"({"seen_classes": ["NoFault", "Bogus"]})").get<ExperimentPlan>(), ConfigError);
}

TEST_CASE("class datasets split by recording") {
  const auto p = small_plan();
  const auto train = make_class_dataset(p, FaultClass::kChippedTooth, DataSplit::kTrain, 10.0);
  const auto test = make_class_dataset(p, FaultClass::kChippedTooth, DataSplit::kTest, 10.0);
  CHECK(train.rows() == 54);
  CHECK(test.rows() == 18);
  CHECK(train.cols() == 13);
  CHECK(std::all_of(train.labels.begin(), train.labels.end(), [](int l) { return l == 2; }));
  CHECK(train.class_names.at(2) == "ChippedTooth");
  CHECK(groups(train) == std::set<std::uint64_t>{(2ULL << 32) | 0, (2ULL << 32) | 1, (2ULL << 32) | 2});
  CHECK(groups(test) == std::set<std::uint64_t>{(2ULL << 32) | 3});
  CHECK_FALSE(train.scaler.has_value());

  // A partial last recording.
  auto q = p;
  q.samples_per_class = 100;
  CHECK(make_class_dataset(q, FaultClass::kNoFault, DataSplit::kTrain, std::nullopt).rows() == 72);
  CHECK(make_class_dataset(q, FaultClass::kNoFault, DataSplit::kTest, std::nullopt).rows() == 28);
}

TEST_CASE("class datasets are reproducible and seed-sensitive") {
  const auto p = small_plan();
  const auto a = make_class_dataset(p, FaultClass::kMissingTooth, DataSplit::kTest, 0.0);
  const auto b = make_class_dataset(p, FaultClass::kMissingTooth, DataSplit::kTest, 0.0);
  CHECK(a.features == b.features);
  CHECK(make_class_dataset(p, FaultClass::kMissingTooth, DataSplit::kTest, -10.0).features != a.features);
  auto q = p;
  q.master_seed += 1;
  CHECK(make_class_dataset(q, FaultClass::kMissingTooth, DataSplit::kTest, 0.0).features != a.features);

  // The SNR cycle noises recording r at list[r % size].
  const std::vector<double> cycle = {0.0, -10.0};
  const auto mixed = make_class_dataset(p, FaultClass::kMissingTooth, DataSplit::kTrain, cycle);
  const auto at0 = make_class_dataset(p, FaultClass::kMissingTooth, DataSplit::kTrain, 0.0);
  const auto at10 = make_class_dataset(p, FaultClass::kMissingTooth, DataSplit::kTrain, -10.0);
  CHECK(mixed.features.topRows(18) == at0.features.topRows(18));
  CHECK(mixed.features.middleRows(18, 18) == at10.features.middleRows(18, 18));
  CHECK(mixed.features.bottomRows(18) == at0.features.bottomRows(18));

  const std::vector<FaultClass> two = {FaultClass::kNoFault, FaultClass::kSurfaceWear};
  const auto both = make_dataset(p, two, DataSplit::kTrain, 10.0);
  CHECK(both.rows() == 108);
  CHECK(both.class_count() == 2);
}

TEST_CASE("feature separability at the nominal noise level") {
  // A linear softmax classifier on the seen classes: the features must carry
  // the class signatures, independent of any hidden layer.
  ExperimentPlan p;
  p.samples_per_class = 360;
  const auto train_raw = make_dataset(p, p.seen_classes, DataSplit::kTrain, p.train_snr_db);
  const auto test_raw = make_dataset(p, p.seen_classes, DataSplit::kTest, p.train_snr_db);
  const auto s = fit_standardizer(train_raw);
  const auto train = apply_standardizer(train_raw, s);
  const auto test = apply_standardizer(test_raw, s);
  Architecture linear;
  linear.hidden = {};
  linear.activation = Activation::kIdentity;
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.learning_rate = 1e-2;
  cfg.seed = 3;
  const auto r = train_deterministic(DeterministicMlp::create(13, 3, linear, 3), train, cfg);
  const double acc = accuracy(forward(r.model, test.features), class_targets(test));
  MESSAGE("linear test accuracy " << acc);
  CHECK(acc > 0.8);
}

TEST_CASE("ood comparison on a small plan") {
  ExperimentRunner runner(small_plan());
  const auto r = runner.run_ood_comparison();
  CHECK(r.leakage_audit_passed);
  REQUIRE(r.bnn_models.size() == 1);
  REQUIRE(r.mlp_models.size() == 1);
  CHECK(r.bnn_models[0].checkpoint.class_count() == 3);
  REQUIRE(r.bnn.classes.size() == 4);
  for (const auto& c : r.bnn.classes) {
    CHECK(c.pu.size() == 18);
    CHECK(c.seen == (c.fault != FaultClass::kEccentricity));
    CHECK(c.accuracy.has_value() == c.seen);
    for (std::size_t i = 0; i < c.pu.size(); ++i) CHECK(std::abs(c.pu[i] - (c.au[i] + c.eu[i])) < 1e-12);
  }
  for (const auto& c : r.deterministic.classes)
    for (double e : c.eu) CHECK(e == 0.0);
  CHECK(r.eu_test.p_value >= 0.0);

  // The cache returns the same model for the same class set in any order.
  const auto& a = runner.bnn_for({FaultClass::kChippedTooth, FaultClass::kNoFault, FaultClass::kMissingTooth});
  CHECK(checkpoint_to_json(a.checkpoint) == checkpoint_to_json(r.bnn_models[0].checkpoint));

  const auto j = results_json(runner.plan(), r);
  CHECK(j.contains("median_eu_seen"));
  const auto csv = boxplot_csv(r);
  CHECK(csv.rfind("experiment,class,metric,value\n", 0) == 0);
}

TEST_CASE("incremental stages grow the class set") {
  auto p = small_plan();
  p.incremental_order = {FaultClass::kRootCrack, FaultClass::kSurfaceWear};
  const auto r = run_incremental(p);
  REQUIRE(r.stages.size() == 3);
  CHECK(r.stages[0].name == "BNN");
  CHECK(r.stages[1].name == "BNN-2");
  CHECK(r.stages[2].name == "BNN-3");
  CHECK_FALSE(r.stages[0].added.has_value());
  CHECK(r.stages[1].added == FaultClass::kRootCrack);
  for (std::size_t s = 0; s < r.stages.size(); ++s) {
    CHECK(r.stages[s].classes.size() == 3 + s);
    CHECK(r.models[s].checkpoint.class_count() == static_cast<int>(3 + s));
    CHECK(r.stages[s].evaluations.size() == 6);
  }
  // Each stage keeps the classes of the previous one.
  for (auto f : r.stages[1].classes)
    CHECK(std::find(r.stages[2].classes.begin(), r.stages[2].classes.end(), f) != r.stages[2].classes.end());
}

TEST_CASE("written experiments are reproducible") {
  auto p = small_plan();
  p.incremental_order = {FaultClass::kRootCrack};
  const auto base = std::filesystem::temp_directory_path() / ("uabnn_exp_" + std::to_string(::getpid()));
  const auto dirs = write_experiments(p, ExperimentKind::kAll, base / "a");
  REQUIRE(dirs.size() == 3);
  for (const char* sub : {"ood", "noise", "incremental"}) {
    for (const char* f : {"plan.json", "results.json", "boxplot_data.csv"})
      CHECK(std::filesystem::exists(base / "a" / sub / f));
  }
  CHECK(std::filesystem::exists(base / "a" / "ood" / "bnn.json"));
  CHECK(std::filesystem::exists(base / "a" / "ood" / "deterministic.json"));
  CHECK(std::filesystem::exists(base / "a" / "incremental" / "bnn-2.json"));
  write_experiments(p, ExperimentKind::kNoise, base / "b");
  CHECK(slurp(base / "a" / "noise" / "results.json") == slurp(base / "b" / "noise" / "results.json"));
  CHECK(json::parse(slurp(base / "a" / "ood" / "plan.json")).get<ExperimentPlan>().samples_per_class == 72);
  std::filesystem::remove_all(base);

  CHECK(parse_experiment_kind("noise") == ExperimentKind::kNoise);
  CHECK_THROWS_AS(parse_experiment_kind("sweep"), ConfigError);
}
