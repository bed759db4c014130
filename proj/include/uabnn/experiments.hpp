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

// The three studies: unseen-fault OOD comparison, SNR sweep and incremental
// class augmentation.
//
// Data: every fault class owns an infinite sequence of recordings. Recording r
// of class f has seed derive_seed(derive_seed(master, "recording/<FaultKey>"), r)
// and its shaft speed and amplitudes are jittered from that seed. Recordings
// are noised at the requested SNR, optionally gain-normalised to unit RMS,
// then windowed. The first round(split_ratio * R) recordings of a class are
// training recordings, the rest are test recordings, so overlapping windows
// never straddle the split.
//
// Seeds: every model, evaluation and noise realisation takes a seed derived
// from master_seed and a descriptive tag (class set, SNR level), never from a
// running counter, so adding or reordering stages leaves the others intact.

#ifndef UABNN_EXPERIMENTS_HPP_
#define UABNN_EXPERIMENTS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "uabnn/bnn.hpp"
#include "uabnn/checkpoint.hpp"
#include "uabnn/features.hpp"
#include "uabnn/signal.hpp"
#include "uabnn/stats.hpp"
#include "uabnn/train.hpp"
#include "uabnn/uncertainty.hpp"

namespace uabnn {

struct ExperimentPlan {
  std::vector<FaultClass> seen_classes = {FaultClass::kNoFault, FaultClass::kMissingTooth,
                                          FaultClass::kChippedTooth};
  std::vector<FaultClass> unseen_classes = {FaultClass::kEccentricity};
  std::vector<FaultClass> incremental_order = {FaultClass::kRootCrack, FaultClass::kSurfaceWear,
                                               FaultClass::kEccentricity};
  std::vector<double> snr_grid_db = {10.0, 0.0, -10.0, -20.0, -30.0};
  double train_snr_db = 10.0;  // OOD and incremental training and testing
  // Training conditions of the noise-sweep model: training recording r is
  // noised at noise_train_snr_db[r % size].
  std::vector<double> noise_train_snr_db = {10.0, 0.0, -10.0, -20.0, -30.0};
  int samples_per_class = 2000;  // windows
  double split_ratio = 0.7;      // training fraction of recordings
  SignalConfig signal;           // nominal operating point; seed unused
  double speed_jitter = 0.05;      // relative, uniform
  double amplitude_jitter = 0.2;   // relative, uniform
  bool normalize_gain = true;
  std::size_t window_len = kDefaultWindowLen;
  std::size_t hop = kDefaultHop;
  int band_count = kDefaultBandCount;
  TrainConfig train = [] {
    TrainConfig c;
    c.kl_weighting = KlWeighting::kPerExample;
    return c;
  }();
  Architecture architecture;
  int eval_samples = kDefaultEvalSamples;
  std::uint64_t master_seed = 20240601;
  bool warm_start = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentPlan& p);
void from_json(const nlohmann::json& j, ExperimentPlan& p);

enum class DataSplit { kTrain, kTest };

// Windows of one class; labels are fault ids, group_ids identify recordings
// as (fault_id << 32) | recording.
Dataset make_class_dataset(const ExperimentPlan& plan, FaultClass fault, DataSplit split,
                           std::optional<double> snr_db);
Dataset make_dataset(const ExperimentPlan& plan, std::span<const FaultClass> faults,
                     DataSplit split, std::optional<double> snr_db);
// Multi-condition variant: recording r is noised at snr_db[r % size].
Dataset make_class_dataset(const ExperimentPlan& plan, FaultClass fault, DataSplit split,
                           std::span<const double> snr_db);

// Per-class evaluation of one model on one class's test windows.
struct ClassEvaluation {
  FaultClass fault = FaultClass::kNoFault;
  bool seen = false;
  std::optional<double> accuracy;  // only for classes the model was trained on
  std::map<int, std::size_t> predicted_counts;  // predicted class id -> count
  std::vector<double> confidence;
  std::vector<double> pu, au, eu;  // all zeros in eu for point-estimate models
  std::vector<std::vector<double>> class_probs;  // [output index][sample]
  std::size_t eu_clamped = 0;
};

struct TrainedBnn {
  Checkpoint checkpoint;
  LossTrace trace;
  std::vector<FaultClass> classes;
};

struct TrainedMlp {
  Checkpoint checkpoint;
  LossTrace trace;
  std::vector<FaultClass> classes;
};

struct ModelEvaluation {
  std::string model;  // "bnn" or "deterministic"
  std::vector<ClassEvaluation> classes;
  double seen_accuracy = 0.0;  // over all seen test windows
};

struct OodComparisonResult {
  ModelEvaluation bnn;
  ModelEvaluation deterministic;
  double median_eu_seen = 0.0;
  double median_eu_unseen = 0.0;
  stats::MannWhitney eu_test;
  double bnn_unseen_mean_confidence = 0.0;
  double deterministic_unseen_mean_confidence = 0.0;
  bool leakage_audit_passed = false;
  std::vector<TrainedBnn> bnn_models;  // exactly one
  std::vector<TrainedMlp> mlp_models;  // exactly one
};

struct NoiseLevelResult {
  double snr_db = 0.0;
  double accuracy = 0.0;
  double mean_au = 0.0, median_au = 0.0;
  double mean_eu = 0.0, median_eu = 0.0;
  double mean_pu = 0.0, median_pu = 0.0;
  stats::FiveNumber confidence;
  bool au_exceeds_eu = false;  // by median
  double max_decomposition_error = 0.0;  // max |PU - (AU + EU)|
  std::vector<ClassEvaluation> classes;
};

struct NoiseSweepResult {
  std::vector<NoiseLevelResult> levels;
  double spearman_pu = 0.0;  // between -SNR and median PU
  double spearman_au = 0.0;  // between -SNR and median AU
  TrainedBnn model;          // trained under noise_train_snr_db
  // The same sweep applied to the model trained at train_snr_db only
  // (the OOD-study model); per-class detail omitted.
  std::vector<NoiseLevelResult> reference_levels;
  double reference_spearman_pu = 0.0;
  double reference_spearman_au = 0.0;
};

struct IncrementalStage {
  std::string name;  // BNN, BNN-2, ...
  std::vector<FaultClass> classes;
  std::optional<FaultClass> added;
  std::vector<ClassEvaluation> evaluations;  // every class in the plan
  double macro_accuracy = 0.0;               // over the stage's seen classes
  // For the newly added class: accuracy under this stage and median PU under
  // this and the previous stage.
  double added_accuracy = 0.0;
  double added_median_pu_before = 0.0;
  double added_median_pu_after = 0.0;
};

struct IncrementalResult {
  std::vector<IncrementalStage> stages;
  std::vector<TrainedBnn> models;
};

// Holds the trained-model cache so several studies in one process reuse the
// model of a given class set.
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ExperimentPlan plan);
  ~ExperimentRunner();
  ExperimentRunner(const ExperimentRunner&) = delete;
  ExperimentRunner& operator=(const ExperimentRunner&) = delete;

  const ExperimentPlan& plan() const noexcept { return plan_; }

  // Trained on the classes' training recordings at train_snr_db, or at the
  // given per-recording SNR cycle.
  const TrainedBnn& bnn_for(const std::vector<FaultClass>& classes);
  const TrainedBnn& bnn_for(const std::vector<FaultClass>& classes,
                            const std::vector<double>& train_snr_db);
  const TrainedMlp& mlp_for(const std::vector<FaultClass>& classes);

  ClassEvaluation evaluate(const TrainedBnn& model, FaultClass fault, std::optional<double> snr_db,
                           std::string_view tag);
  ClassEvaluation evaluate(const TrainedMlp& model, FaultClass fault, std::optional<double> snr_db);

  OodComparisonResult run_ood_comparison();
  NoiseSweepResult run_noise_sweep();
  IncrementalResult run_incremental();

 private:
  struct Cache;
  std::vector<NoiseLevelResult> sweep(const TrainedBnn& bnn, std::string_view tag, double& spearman_pu,
                                      double& spearman_au);

  ExperimentPlan plan_;
  std::unique_ptr<Cache> cache_;
};

OodComparisonResult run_ood_comparison(const ExperimentPlan& plan);
NoiseSweepResult run_noise_sweep(const ExperimentPlan& plan);
IncrementalResult run_incremental(const ExperimentPlan& plan);

nlohmann::json results_json(const ExperimentPlan& plan, const OodComparisonResult& r);
nlohmann::json results_json(const ExperimentPlan& plan, const NoiseSweepResult& r);
nlohmann::json results_json(const ExperimentPlan& plan, const IncrementalResult& r);

// Long format "experiment,class,metric,value".
std::string boxplot_csv(const OodComparisonResult& r);
std::string boxplot_csv(const NoiseSweepResult& r);
std::string boxplot_csv(const IncrementalResult& r);

enum class ExperimentKind { kOod, kNoise, kIncremental, kAll };
ExperimentKind parse_experiment_kind(std::string_view name);

// Writes <out_dir>/<ood|noise|incremental>/{plan.json, results.json,
// boxplot_data.csv, <model>.json...}. Returns the directories written.
std::vector<std::filesystem::path> write_experiments(const ExperimentPlan& plan,
                                                     ExperimentKind which,
                                                     const std::filesystem::path& out_dir);

}  // namespace uabnn

#endif  // UABNN_EXPERIMENTS_HPP_
