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

#ifndef UABNN_TRAIN_HPP_
#define UABNN_TRAIN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uabnn/bnn.hpp"
#include "uabnn/features.hpp"

namespace uabnn {

enum class KlWeighting {
  kUniform,  // 1 / num_batches on every minibatch
  kScalar,   // a fixed beta on every minibatch
  // 1 / N_train on every minibatch: with a mean NLL this is the per-example
  // ELBO, i.e. the full-data objective divided by N_train.
  kPerExample,
};

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int mc_train_samples = 1;
  KlWeighting kl_weighting = KlWeighting::kUniform;
  double kl_beta = 1.0;  // used by kScalar
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

std::string_view kl_weighting_name(KlWeighting k) noexcept;
KlWeighting parse_kl_weighting(std::string_view name);
std::string_view optimizer_name(OptimizerKind k) noexcept;
OptimizerKind parse_optimizer(std::string_view name);

struct EpochRecord {
  int epoch = 0;  // 1-based
  // Per-epoch objective: sum of applied KL terms plus the per-sample mean NLL.
  double elbo = 0.0;
  double kl = 0.0;   // KL after the last step of the epoch
  double nll = 0.0;  // per-sample mean over the epoch
  double kl_weight_sum = 0.0;
};

struct LossTrace {
  std::vector<EpochRecord> epochs;
  double final_train_accuracy = 0.0;  // at the posterior mean for BBB

  std::string to_csv() const;
};

// Targets for the model's outputs: position of each label in class_names.
std::vector<int> class_targets(const Dataset& d);

// Accuracy of argmax(logits) against targets.
double accuracy(const Matrix& logits, std::span<const int> targets);

struct BnnTrainResult {
  BnnModel model;
  LossTrace trace;
};

// The dataset must be standardised and its class count must match the model.
BnnTrainResult train_bbb(BnnModel model, const Dataset& train, const TrainConfig& config);

struct MlpTrainResult {
  DeterministicMlp model;
  LossTrace trace;
};

MlpTrainResult train_deterministic(DeterministicMlp mlp, const Dataset& train,
                                   const TrainConfig& config);

}  // namespace uabnn

#endif  // UABNN_TRAIN_HPP_
