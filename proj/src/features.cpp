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

#include "uabnn/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "uabnn/error.hpp"
#include "uabnn/log.hpp"

namespace uabnn {

std::vector<std::span<const double>> window(const Waveform& w, std::size_t window_len,
                                            std::size_t hop) {
  require(window_len > 0 && hop > 0, "window length and hop must be positive");
  if (window_len > w.samples.size())
    throw DegenerateInputError("window length " + std::to_string(window_len) +
                               " exceeds waveform length " + std::to_string(w.samples.size()));
  std::vector<std::span<const double>> out;
  out.reserve((w.samples.size() - window_len) / hop + 1);
  const std::span<const double> all(w.samples);
  for (std::size_t off = 0; off + window_len <= all.size(); off += hop)
    out.push_back(all.subspan(off, window_len));
  return out;
}

std::vector<double> FeatureVector::values() const {
  std::vector<double> v = {rms, variance, skewness, kurtosis, crest_factor};
  v.insert(v.end(), band_energy.begin(), band_energy.end());
  return v;
}

std::vector<std::string> feature_names(int band_count) {
  std::vector<std::string> names = {"rms", "variance", "skewness", "kurtosis", "crest_factor"};
  for (int k = 1; k <= band_count; ++k) names.push_back("band" + std::to_string(k));
  return names;
}

FeatureVector extract_features(std::span<const double> segment, double sample_rate_hz,
                               double mesh_freq_hz, int band_count) {
  require(segment.size() >= 16, "segment must hold at least 16 samples");
  require(band_count >= 0, "band count must be non-negative");
  require(sample_rate_hz > 0 && mesh_freq_hz > 0, "frequencies must be positive");
  require(mesh_freq_hz * band_count < sample_rate_hz / 2,
          "highest feature band is above the Nyquist frequency");
  for (double v : segment) require(std::isfinite(v), "segment contains non-finite samples");

  const std::size_t n = segment.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  double mean = 0.0, peak = 0.0, sumsq = 0.0;
  for (double v : segment) {
    mean += v;
    sumsq += v * v;
    peak = std::max(peak, std::abs(v));
  }
  mean *= inv_n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : segment) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 *= inv_n;
  m3 *= inv_n;
  m4 *= inv_n;

  FeatureVector f;
  f.rms = std::sqrt(sumsq * inv_n);
  // Variance below round-off of the mean counts as a constant segment.
  const bool constant = m2 <= 1e-24 * std::max(mean * mean, 1e-300);
  f.variance = constant ? 0.0 : m2;
  f.skewness = constant ? 0.0 : m3 / std::pow(m2, 1.5);
  f.kurtosis = constant ? 0.0 : m4 / (m2 * m2) - 3.0;
  f.crest_factor = f.rms > 0 ? peak / f.rms : 1.0;

  // DFT bins evaluated directly; only bins inside a band are computed.
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = kTwoPi * static_cast<double>(i) * inv_n;
    cos_table[i] = std::cos(a);
    sin_table[i] = std::sin(a);
  }
  const double bin_hz = sample_rate_hz * inv_n;
  const std::size_t half = n / 2;
  f.band_energy.assign(static_cast<std::size_t>(band_count), 0.0);
  for (int k = 1; k <= band_count; ++k) {
    const double lo = 0.9 * k * mesh_freq_hz;
    const double hi = 1.1 * k * mesh_freq_hz;
    const auto first = static_cast<std::size_t>(std::max(1.0, std::ceil(lo / bin_hz)));
    const auto last = std::min(half, static_cast<std::size_t>(std::floor(hi / bin_hz)));
    double energy = 0.0;
    for (std::size_t j = first; j <= last; ++j) {
      double re = 0.0, im = 0.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n; ++i) {
        re += segment[i] * cos_table[idx];
        im -= segment[i] * sin_table[idx];
        idx += j;
        if (idx >= n) idx -= n;
      }
      // Bins other than DC and Nyquist stand for their negative-frequency twin too.
      const double weight = (2 * j == n) ? 1.0 : 2.0;
      energy += weight * (re * re + im * im) * inv_n;
    }
    f.band_energy[static_cast<std::size_t>(k - 1)] = energy;
  }
  return f;
}

int Dataset::class_index(int label) const {
  auto it = class_names.find(label);
  require(it != class_names.end(), "label " + std::to_string(label) + " has no class name");
  return static_cast<int>(std::distance(class_names.begin(), it));
}

std::vector<int> Dataset::class_ids() const {
  std::vector<int> ids;
  for (const auto& [id, name] : class_names) ids.push_back(id);
  return ids;
}

void Dataset::validate() const {
  require(labels.size() == rows(), "label count does not match feature rows");
  require(feature_names.empty() || feature_names.size() == cols(),
          "feature name count does not match feature columns");
  require(group_ids.empty() || group_ids.size() == rows(), "group id count does not match rows");
  for (int l : labels)
    require(class_names.count(l) == 1, "label " + std::to_string(l) + " has no class name");
  if (scaler) {
    require(scaler->size() == cols() && scaler->std.size() == cols(),
            "scaler width does not match feature columns");
    for (double s : scaler->std) require(s > 0, "scaler std entries must be positive");
  }
}

void append(Dataset& into, const Dataset& from) {
  if (into.rows() == 0 && into.cols() == 0) {
    into.feature_names = from.feature_names;
    into.features.resize(0, from.features.cols());
  }
  require(into.cols() == from.cols(), "cannot append datasets with different widths");
  require(into.feature_names.empty() || from.feature_names.empty() ||
              into.feature_names == from.feature_names,
          "cannot append datasets with different feature names");
  for (const auto& [id, name] : from.class_names) {
    auto [it, inserted] = into.class_names.emplace(id, name);
    require(inserted || it->second == name,
            "class id " + std::to_string(id) + " names differ between datasets");
  }
  const bool keep_groups =
      (into.rows() == 0 || !into.group_ids.empty()) && (from.group_ids.size() == from.rows());
  const auto old_rows = into.features.rows();
  into.features.conservativeResize(old_rows + from.features.rows(), Eigen::NoChange);
  into.features.bottomRows(from.features.rows()) = from.features;
  into.labels.insert(into.labels.end(), from.labels.begin(), from.labels.end());
  if (keep_groups) {
    into.group_ids.insert(into.group_ids.end(), from.group_ids.begin(), from.group_ids.end());
  } else {
    into.group_ids.clear();
  }
}

Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out;
  out.class_names = d.class_names;
  out.feature_names = d.feature_names;
  out.scaler = d.scaler;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), d.features.cols());
  out.labels.reserve(rows.size());
  const bool groups = d.group_ids.size() == d.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < d.rows(), "row index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) =
        d.features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(d.labels[rows[i]]);
    if (groups) out.group_ids.push_back(d.group_ids[rows[i]]);
  }
  return out;
}

Scaler fit_standardizer(const Dataset& d) {
  require(d.rows() >= 2, "standardizer needs at least two rows");
  Scaler s;
  const auto n = static_cast<double>(d.rows());
  for (Eigen::Index c = 0; c < d.features.cols(); ++c) {
    const auto col = d.features.col(c);
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    double sd = std::sqrt(var);
    if (!(sd > 0) || !std::isfinite(sd)) {
      const std::string name = static_cast<std::size_t>(c) < d.feature_names.size()
                                   ? d.feature_names[static_cast<std::size_t>(c)]
                                   : "#" + std::to_string(c);
      log_warning("feature '" + name + "' has zero variance; using std = 1");
      sd = 1.0;
    }
    s.mean.push_back(mean);
    s.std.push_back(sd);
  }
  return s;
}

Dataset apply_standardizer(const Dataset& d, const Scaler& s) {
  require(s.size() == d.cols() && s.std.size() == d.cols(), "scaler width does not match dataset");
  Dataset out = d;
  for (Eigen::Index c = 0; c < out.features.cols(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    out.features.col(c) = (out.features.col(c).array() - s.mean[i]) / s.std[i];
  }
  out.scaler = s;
  return out;
}

std::vector<double> apply_standardizer(std::span<const double> x, const Scaler& s) {
  require(x.size() == s.size(), "scaler width does not match input");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - s.mean[i]) / s.std[i];
  return out;
}

}  // namespace uabnn
