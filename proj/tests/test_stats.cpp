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

#include <cmath>
#include <vector>

#include "uabnn/error.hpp"
#include "uabnn/rng.hpp"
#include "uabnn/stats.hpp"

using namespace uabnn;

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> x = {7, 1, 3, 9, 4};
  // Reference values from R quantile(type = 7).
  CHECK(stats::quantile(x, 0.1) == doctest::Approx(1.8));
  CHECK(stats::quantile(x, 0.25) == doctest::Approx(3.0));
  CHECK(stats::median(x) == 4.0);
  CHECK(stats::quantile(x, 0.9) == doctest::Approx(8.2));
  CHECK(stats::quantile(x, 0.0) == 1.0);
  CHECK(stats::quantile(x, 1.0) == 9.0);
  CHECK(stats::median(std::vector<double>{1, 2, 3, 10}) == 2.5);
  CHECK(stats::mean(x) == doctest::Approx(4.8));

  const auto f = stats::five_number(x);
  CHECK(f.min == 1);
  CHECK(f.q1 == 3);
  CHECK(f.median == 4);
  CHECK(f.q3 == 7);
  CHECK(f.max == 9);

  CHECK_THROWS_AS(stats::quantile(std::vector<double>{}, 0.5), ContractViolation);
  CHECK_THROWS_AS(stats::quantile(x, 1.5), ContractViolation);
}

TEST_CASE("ranks share ties") {
  const std::vector<double> x = {10, 20, 20, 5, 20};
  CHECK(stats::ranks(x) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("mann-whitney") {
  // Reference: one-sided asymptotic test with tie and continuity correction,
  // U = 26.5, p = 0.0208614.
  const std::vector<double> a = {3, 4, 5, 5, 7, 9}, b = {1, 2, 2, 3, 5};
  const auto r = stats::mann_whitney_greater(a, b);
  CHECK(r.u == 26.5);
  CHECK(r.p_value == doctest::Approx(0.020861355).epsilon(1e-6));

  const auto rev = stats::mann_whitney_greater(b, a);
  CHECK(rev.u == doctest::Approx(6 * 5 - 26.5));
  CHECK(rev.p_value > 0.95);

  const std::vector<double> c = {1, 1, 1};
  CHECK(stats::mann_whitney_greater(c, c).p_value == 1.0);

  // Fully separated large samples give a vanishing p-value.
  std::vector<double> lo, hi;
  const CounterRng rng(1);
  for (std::uint64_t i = 0; i < 500; ++i) {
    lo.push_back(rng.uniform(i));
    hi.push_back(2 + rng.uniform(i + 1000));
  }
  const auto sep = stats::mann_whitney_greater(hi, lo);
  CHECK(sep.u == 500.0 * 500.0);
  CHECK(sep.p_value < 1e-100);
}

TEST_CASE("spearman") {
  CHECK(stats::spearman(std::vector<double>{1, 2, 2, 4, 5}, std::vector<double>{3, 1, 4, 4, 9}) ==
        doctest::Approx(0.7631578947).epsilon(1e-9));
  CHECK(stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 8, 27}) == doctest::Approx(1.0));
  CHECK(stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(stats::spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}) == 0.0);
  CHECK_THROWS_AS(stats::spearman(std::vector<double>{1}, std::vector<double>{1}), ContractViolation);
}
