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

#include "uabnn/rng.hpp"

using namespace uabnn;

TEST_CASE("splitmix64 stream matches the published reference for seed 0") {
  // Reference outputs of SplitMix64 seeded with 0.
  const CounterRng rng(0);
  CHECK(rng.bits(0) == 0xE220A8397B1DCDAFULL);
  CHECK(rng.bits(1) == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.bits(2) == 0x06C45D188009454FULL);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a64("foobar") == 0x85944171F73967E8ULL);
}

TEST_CASE("derived seeds differ by index and tag") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, "noise") == derive_seed(7, fnv1a64("noise")));
  CHECK(derive_seed(7, "noise") != derive_seed(7, "floor"));
}

TEST_CASE("counter draws do not depend on evaluation order") {
  const CounterRng rng(99);
  std::vector<double> forward, backward(100);
  for (int i = 0; i < 100; ++i) forward.push_back(rng.normal(i));
  for (int i = 99; i >= 0; --i) backward[i] = rng.normal(i);
  CHECK(forward == backward);

  SequentialRng seq(99);
  for (int i = 0; i < 5; ++i) CHECK(seq.next_normal() == rng.normal(i));
}

TEST_CASE("uniform and normal moments") {
  const CounterRng rng(12345);
  const int n = 100000;
  double su = 0, sn = 0, sn2 = 0, umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(i);
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double z = rng.normal(i);
    sn += z;
    sn2 += z * z;
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  const double mean = sn / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sn2 / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("next_index is uniform over small ranges") {
  SequentialRng rng(5);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.next_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  CHECK(chi2 < 22.46);
}
