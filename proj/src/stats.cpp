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

#include "uabnn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uabnn/error.hpp"

namespace uabnn::stats {

double mean(std::span<const double> x) {
  require(!x.empty(), "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

namespace {

double sorted_quantile(const std::vector<double>& s, double q) {
  const double h = (static_cast<double>(s.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

double quantile(std::span<const double> x, double q) {
  require(!x.empty(), "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return sorted_quantile(s, q);
}

double median(std::span<const double> x) { return quantile(x, 0.5); }

FiveNumber five_number(std::span<const double> x) {
  require(!x.empty(), "summary of an empty sample");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return {s.front(), sorted_quantile(s, 0.25), sorted_quantile(s, 0.5), sorted_quantile(s, 0.75),
          s.back()};
}

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

MannWhitney mann_whitney_greater(std::span<const double> greater, std::span<const double> lesser) {
  require(!greater.empty() && !lesser.empty(), "Mann-Whitney needs two non-empty samples");
  const auto n1 = static_cast<double>(greater.size());
  const auto n2 = static_cast<double>(lesser.size());
  std::vector<double> pooled(greater.begin(), greater.end());
  pooled.insert(pooled.end(), lesser.begin(), lesser.end());
  const auto r = ranks(pooled);
  double r1 = 0.0;
  for (std::size_t i = 0; i < greater.size(); ++i) r1 += r[i];

  // Tie correction term sum(t^3 - t) over tie groups.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }

  MannWhitney out;
  out.u = r1 - n1 * (n1 + 1.0) / 2.0;
  const double n = n1 + n2;
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (!(var > 0)) {
    out.z = 0.0;
    out.p_value = 1.0;
    return out;
  }
  out.z = (out.u - mu - 0.5) / std::sqrt(var);
  out.p_value = 0.5 * std::erfc(out.z / std::sqrt(2.0));
  return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "spearman needs two equal samples of size >= 2");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace uabnn::stats
