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

// Monte-Carlo predictive distribution and its entropy decomposition
//
//   total     PU = H[ mean_s p_s ]
//   aleatoric AU = mean_s H[ p_s ]
//   epistemic EU = PU - AU        (mutual information between label and weights)
//
// All quantities are in nats.

#ifndef UABNN_UNCERTAINTY_HPP_
#define UABNN_UNCERTAINTY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uabnn/bnn.hpp"

namespace uabnn {

inline constexpr int kDefaultEvalSamples = 200;

struct PredictiveDistribution {
  Matrix probs;  // S x C, one softmax output per weight draw

  Eigen::Index sample_count() const noexcept { return probs.rows(); }
  Eigen::Index class_count() const noexcept { return probs.cols(); }
  void validate() const;
};

// Key of weight draw s for a given prediction seed. Draw s is the same for
// every input, so batched and per-input predictions agree exactly.
std::uint64_t draw_key(std::uint64_t seed, std::uint64_t draw);

PredictiveDistribution predict_mc(const BnnModel& model, std::span<const double> x, int samples,
                                  std::uint64_t seed);
// One distribution per row of x; row i equals predict_mc(model, x.row(i), ...).
std::vector<PredictiveDistribution> predict_mc(const BnnModel& model, const Matrix& x, int samples,
                                               std::uint64_t seed);

// -sum p ln p with 0 ln 0 = 0, clamped to [0, ln C].
double entropy(std::span<const double> p);

struct UncertaintyReport {
  double pu = 0.0;
  double au = 0.0;
  double eu = 0.0;
  std::vector<double> mean_probs;
  int predicted_class = 0;  // output index, lowest index wins ties
  double confidence = 0.0;
  // Set when PU - AU came out negative (finite-precision noise) and EU was
  // clamped to 0.
  bool eu_clamped = false;
  double eu_unclamped = 0.0;
};

UncertaintyReport decompose(const PredictiveDistribution& pd);
// Point-estimate model: a single softmax vector, EU = 0.
UncertaintyReport point_report(std::span<const double> probs);

enum class OodMetric { kEpistemic, kTotal };

OodMetric parse_ood_metric(std::string_view name);
double ood_score(const UncertaintyReport& report, OodMetric metric);

// {"pu":..,"au":..,"eu":..,"mean_probs":[..],"predicted_class":..,
//  "confidence":..,"eu_clamped":..}. `class_ids` maps output index to the
// reported class id; empty means identity.
std::string report_to_json(const UncertaintyReport& report, std::span<const int> class_ids = {});

}  // namespace uabnn

#endif  // UABNN_UNCERTAINTY_HPP_
