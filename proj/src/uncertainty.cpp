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

#include "uabnn/uncertainty.hpp"

#include <cmath>
#include <json.hpp>

#include "uabnn/error.hpp"

namespace uabnn {

void PredictiveDistribution::validate() const {
  require(probs.rows() >= 2, "predictive distribution needs at least two samples");
  require(probs.cols() >= 1, "predictive distribution needs at least one class");
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    require(std::abs(probs.row(s).sum() - 1.0) <= 1e-9, "sample rows must sum to 1");
    require((probs.row(s).array() >= 0.0).all() && (probs.row(s).array() <= 1.0).all(),
            "probabilities must lie in [0, 1]");
  }
}

std::uint64_t draw_key(std::uint64_t seed, std::uint64_t draw) {
  return derive_seed(derive_seed(seed, "predict"), draw);
}

std::vector<PredictiveDistribution> predict_mc(const BnnModel& model, const Matrix& x, int samples,
                                               std::uint64_t seed) {
  require(samples >= 2, "predict_mc needs at least two samples");
  model.validate();
  require(x.cols() == model.input_dim(), "input width does not match the model");
  require(x.allFinite(), "input must be finite");
  std::vector<PredictiveDistribution> out(static_cast<std::size_t>(x.rows()));
  for (auto& pd : out) pd.probs.resize(samples, model.class_count());
  for (int s = 0; s < samples; ++s) {
    const Matrix probs =
        softmax_rows(forward_sample(model, x, model.draw_noise(draw_key(seed, static_cast<std::uint64_t>(s)))));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)].probs.row(s) = probs.row(i);
  }
  return out;
}

PredictiveDistribution predict_mc(const BnnModel& model, std::span<const double> x, int samples,
                                  std::uint64_t seed) {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
  return std::move(predict_mc(model, row, samples, seed).front());
}

double entropy(std::span<const double> p) {
  require(!p.empty(), "entropy of an empty distribution");
  double sum = 0.0, h = 0.0;
  for (double v : p) {
    require(v >= 0.0, "probabilities must be non-negative");
    sum += v;
    if (v > 0) h -= v * std::log(v);
  }
  require(std::abs(sum - 1.0) <= 1e-6, "probabilities must sum to 1");
  return std::clamp(h, 0.0, std::log(static_cast<double>(p.size())));
}

UncertaintyReport decompose(const PredictiveDistribution& pd) {
  pd.validate();
  const auto s_count = pd.sample_count();
  const auto c_count = pd.class_count();
  UncertaintyReport r;
  r.mean_probs.assign(static_cast<std::size_t>(c_count), 0.0);
  double au = 0.0;
  std::vector<double> row(static_cast<std::size_t>(c_count));
  for (Eigen::Index s = 0; s < s_count; ++s) {
    for (Eigen::Index c = 0; c < c_count; ++c) {
      row[static_cast<std::size_t>(c)] = pd.probs(s, c);
      r.mean_probs[static_cast<std::size_t>(c)] += pd.probs(s, c);
    }
    au += entropy(row);
  }
  for (double& m : r.mean_probs) m /= static_cast<double>(s_count);
  r.au = au / static_cast<double>(s_count);
  const double total = entropy(r.mean_probs);
  r.eu_unclamped = total - r.au;
  if (r.eu_unclamped < 0.0) {
    r.eu = 0.0;
    r.eu_clamped = true;
  } else {
    r.eu = r.eu_unclamped;
  }
  // PU is assembled from its parts so PU == AU + EU holds bit-for-bit.
  r.pu = r.au + r.eu;
  int best = 0;
  for (int c = 1; c < static_cast<int>(c_count); ++c)
    if (r.mean_probs[static_cast<std::size_t>(c)] > r.mean_probs[static_cast<std::size_t>(best)]) best = c;
  r.predicted_class = best;
  r.confidence = r.mean_probs[static_cast<std::size_t>(best)];
  return r;
}

UncertaintyReport point_report(std::span<const double> probs) {
  UncertaintyReport r;
  r.mean_probs.assign(probs.begin(), probs.end());
  r.au = entropy(probs);
  r.eu = 0.0;
  r.pu = r.au;
  int best = 0;
  for (int c = 1; c < static_cast<int>(probs.size()); ++c)
    if (probs[static_cast<std::size_t>(c)] > probs[static_cast<std::size_t>(best)]) best = c;
  r.predicted_class = best;
  r.confidence = probs[static_cast<std::size_t>(best)];
  return r;
}

OodMetric parse_ood_metric(std::string_view name) {
  if (name == "epistemic") return OodMetric::kEpistemic;
  if (name == "total") return OodMetric::kTotal;
  throw ConfigError("unknown OOD metric '" + std::string(name) + "' (epistemic, total)");
}

double ood_score(const UncertaintyReport& report, OodMetric metric) {
  return metric == OodMetric::kEpistemic ? report.eu : report.pu;
}

std::string report_to_json(const UncertaintyReport& report, std::span<const int> class_ids) {
  nlohmann::json j;
  j["pu"] = report.pu;
  j["au"] = report.au;
  j["eu"] = report.eu;
  j["mean_probs"] = report.mean_probs;
  j["predicted_class"] =
      class_ids.empty() ? report.predicted_class
                        : class_ids[static_cast<std::size_t>(report.predicted_class)];
  j["confidence"] = report.confidence;
  j["eu_clamped"] = report.eu_clamped;
  return j.dump();
}

}  // namespace uabnn
