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

#ifndef UABNN_FEATURES_HPP_
#define UABNN_FEATURES_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uabnn/signal.hpp"

namespace uabnn {

inline constexpr int kDefaultBandCount = 8;
inline constexpr std::size_t kDefaultWindowLen = 512;
inline constexpr std::size_t kDefaultHop = 256;

// Views into w.samples; valid while w is alive and unmodified. Trailing
// partial windows are dropped. Throws DegenerateInputError when not even one
// full window fits.
std::vector<std::span<const double>> window(const Waveform& w, std::size_t window_len,
                                            std::size_t hop);

struct FeatureVector {
  double rms = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess
  double crest_factor = 0.0;
  std::vector<double> band_energy;

  std::size_t size() const noexcept { return 5 + band_energy.size(); }
  std::vector<double> values() const;
};

std::vector<std::string> feature_names(int band_count = kDefaultBandCount);

// Moments use 1/N normalisation. A constant segment has skewness = kurtosis =
// 0 and crest factor 1. Band k (1-based) is the two-sided DFT energy
// sum |X_j|^2 / N over bins within +-10% of k * mesh_freq_hz.
FeatureVector extract_features(std::span<const double> segment, double sample_rate_hz,
                               double mesh_freq_hz, int band_count = kDefaultBandCount);

struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t size() const noexcept { return mean.size(); }
};

struct Dataset {
  Eigen::MatrixXd features;  // one row per sample
  std::vector<int> labels;
  std::map<int, std::string> class_names;
  std::vector<std::string> feature_names;
  std::optional<Scaler> scaler;  // present when features are standardised
  // Provenance of each row (e.g. source recording); empty when unknown.
  // Not serialised.
  std::vector<std::uint64_t> group_ids;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(features.cols()); }
  std::size_t class_count() const noexcept { return class_names.size(); }
  // Position of a class id among the sorted ids of class_names.
  int class_index(int label) const;
  std::vector<int> class_ids() const;

  // Throws ContractViolation when the invariants do not hold.
  void validate() const;
};

// Appends rows. Feature names and class names must agree where both present.
void append(Dataset& into, const Dataset& from);

Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows);

// Zero-variance columns get std 1 and a warning.
Scaler fit_standardizer(const Dataset& d);
Dataset apply_standardizer(const Dataset& d, const Scaler& s);
std::vector<double> apply_standardizer(std::span<const double> x, const Scaler& s);

// The manifest for foo.csv is foo.manifest.json.
std::filesystem::path manifest_path(const std::filesystem::path& csv_path);
void dataset_to_csv(const Dataset& d, const std::filesystem::path& path);
Dataset dataset_from_csv(const std::filesystem::path& path);

}  // namespace uabnn

#endif  // UABNN_FEATURES_HPP_
