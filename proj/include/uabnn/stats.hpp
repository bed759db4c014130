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

#ifndef UABNN_STATS_HPP_
#define UABNN_STATS_HPP_

#include <span>
#include <vector>

namespace uabnn::stats {

double mean(std::span<const double> x);
// Linear interpolation between order statistics (R type 7).
double quantile(std::span<const double> x, double q);
double median(std::span<const double> x);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

FiveNumber five_number(std::span<const double> x);

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> ranks(std::span<const double> x);

struct MannWhitney {
  double u = 0.0;  // U statistic of the first sample
  double z = 0.0;
  double p_value = 1.0;
};

// One-sided test of H1: values in `greater` tend to exceed those in `lesser`.
// Normal approximation with tie correction and continuity correction.
MannWhitney mann_whitney_greater(std::span<const double> greater, std::span<const double> lesser);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace uabnn::stats

#endif  // UABNN_STATS_HPP_
