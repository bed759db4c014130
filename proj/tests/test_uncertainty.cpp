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
#include <json.hpp>
#include <vector>

#include "uabnn/error.hpp"
#include "uabnn/uncertainty.hpp"

using namespace uabnn;

namespace {

PredictiveDistribution dist(std::initializer_list<std::initializer_list<double>> rows) {
  PredictiveDistribution pd;
  pd.probs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) pd.probs(i, j++) = v;
    ++i;
  }
  return pd;
}

double h(std::initializer_list<double> p) {
  double s = 0;
  for (double v : p)
    if (v > 0) s -= v * std::log(v);
  return s;
}

BnnModel model_with_rho(double rho) {
  Architecture a;
  a.hidden = {16};
  auto m = BnnModel::create(3, 4, a, 11);
  for (auto& l : m.mutable_layers()) {
    l.rho.setConstant(rho);
    l.bias_rho.setConstant(rho);
  }
  return m;
}

}  // namespace

TEST_CASE("entropy") {
  CHECK(entropy(std::vector<double>{0.7, 0.2, 0.1}) == doctest::Approx(0.801819).epsilon(1e-6));
  CHECK(entropy(std::vector<double>{0, 1, 0}) == 0.0);
  CHECK(entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) <= std::log(3.0));
  CHECK_THROWS_AS(entropy(std::vector<double>{-0.1, 1.1}), ContractViolation);
  CHECK_THROWS_AS(entropy(std::vector<double>{0.5, 0.4}), ContractViolation);
  CHECK_THROWS_AS(entropy(std::vector<double>{}), ContractViolation);
}

TEST_CASE("decomposition") {
  // Reference: PU 0.657158, AU 0.622187, EU 0.034971.
  const auto r = decompose(dist({{0.8, 0.2}, {0.6, 0.4}, {0.5, 0.5}}));
  CHECK(r.pu == doctest::Approx(0.6571577615).epsilon(1e-9));
  CHECK(r.au == doctest::Approx(0.6221870904).epsilon(1e-9));
  CHECK(r.eu == doctest::Approx(0.0349706711).epsilon(1e-8));
  CHECK(r.pu == r.au + r.eu);
  CHECK(r.mean_probs[0] == doctest::Approx(19.0 / 30));
  CHECK(r.predicted_class == 0);
  CHECK(r.confidence == doctest::Approx(19.0 / 30));

  const auto oracle = h({0.5, 0.5});
  CHECK(oracle == doctest::Approx(std::log(2.0)));

  const auto same = decompose(dist({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}}));
  CHECK(std::abs(same.eu) < 1e-15);
  CHECK(same.au == doctest::Approx(h({0.3, 0.7})).epsilon(1e-14));

  const auto split = decompose(dist({{1, 0}, {0, 1}}));
  CHECK(split.au == 0.0);
  CHECK(split.eu == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(split.predicted_class == 0);  // tie goes to the lower index

  CHECK_THROWS_AS(decompose(dist({{0.5, 0.5}})), ContractViolation);
  CHECK_THROWS_AS(decompose(dist({{0.5, 0.6}, {0.5, 0.5}})), ContractViolation);
}

TEST_CASE("round-off below zero is clamped and flagged") {
  // Rows that differ in the last bits: PU - AU may fall a hair below 0.
  bool seen = false;
  for (int k = 0; k < 200 && !seen; ++k) {
    const double a = 0.1 + 1e-3 * k;
    const double b = std::nextafter(a, 1.0);
    const auto r = decompose(dist({{a, 1 - a}, {b, 1 - b}, {a, 1 - a}}));
    CHECK(r.eu >= 0.0);
    CHECK(r.eu_unclamped > -1e-14);
    if (r.eu_clamped) {
      seen = true;
      CHECK(r.eu == 0.0);
      CHECK(r.eu_unclamped < 0.0);
    }
  }
  CHECK(seen);
}

TEST_CASE("monte carlo prediction") {
  const auto m = model_with_rho(-2.0);
  Matrix x(5, 3);
  x << 0.1, 0.2, 0.3, -1, 0, 1, 2, 2, -2, 0, 0, 0, 0.5, -0.5, 0.25;

  const auto a = predict_mc(m, x, 50, 123);
  const auto b = predict_mc(m, x, 50, 123);
  const auto c = predict_mc(m, x, 50, 124);
  REQUIRE(a.size() == 5);
  CHECK(a[0].probs.rows() == 50);
  CHECK(a[0].probs.cols() == 4);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i].probs == b[i].probs);
  CHECK(a[0].probs != c[0].probs);

  // Batched rows equal single-input predictions.
  const std::vector<double> row = {2, 2, -2};
  CHECK(predict_mc(m, row, 50, 123).probs == a[2].probs);
  // Draw s uses the same weights for every input.
  const auto eps = m.draw_noise(draw_key(123, 7));
  const Matrix p = softmax_rows(forward_sample(m, x, eps));
  CHECK(a[4].probs.row(7) == p.row(4));

  for (const auto& pd : a) {
    const auto r = decompose(pd);
    CHECK(r.pu <= std::log(4.0) + 1e-12);
    CHECK(r.au >= 0.0);
    CHECK(r.eu_unclamped > -1e-12);  // Jensen
  }
  CHECK_THROWS_AS(predict_mc(m, x, 1, 0), ContractViolation);
  CHECK_THROWS_AS(predict_mc(m, Matrix::Zero(1, 2), 10, 0), ContractViolation);
}

TEST_CASE("posterior width drives epistemic uncertainty") {
  Matrix x(1, 3);
  x << 0.5, -1.0, 1.5;
  const auto collapsed = predict_mc(model_with_rho(-40.0), x, 30, 1)[0];
  for (Eigen::Index s = 1; s < 30; ++s) CHECK(collapsed.probs.row(s) == collapsed.probs.row(0));
  CHECK(decompose(collapsed).eu < 1e-12);

  double last = -1;
  for (double sigma : {0.01, 0.3, 3.0}) {
    const double eu = decompose(predict_mc(model_with_rho(softplus_inverse(sigma)), x, 400, 1)[0]).eu;
    CHECK(eu > last);
    last = eu;
  }
  // Weight scale 3 on 16 hidden units saturates the softmax: draws disagree
  // almost completely, so EU approaches the ln 4 ceiling.
  CHECK(last > 0.5 * std::log(4.0));
}

TEST_CASE("point report and json") {
  const std::vector<double> p = {0.1, 0.6, 0.3};
  const auto r = point_report(p);
  CHECK(r.eu == 0.0);
  CHECK(r.pu == r.au);
  CHECK(r.au == doctest::Approx(h({0.1, 0.6, 0.3})));
  CHECK(r.predicted_class == 1);
  CHECK(r.confidence == 0.6);

  const auto j = nlohmann::json::parse(report_to_json(r, std::vector<int>{0, 4, 5}));
  for (const char* k : {"pu", "au", "eu", "mean_probs", "predicted_class", "confidence", "eu_clamped"})
    CHECK(j.contains(k));
  CHECK(j["predicted_class"] == 4);
  CHECK(nlohmann::json::parse(report_to_json(r))["predicted_class"] == 1);
  CHECK(j["mean_probs"].size() == 3);

  CHECK(ood_score(r, OodMetric::kTotal) == r.pu);
  CHECK(ood_score(r, OodMetric::kEpistemic) == 0.0);
  CHECK(parse_ood_metric("epistemic") == OodMetric::kEpistemic);
  CHECK_THROWS_AS(parse_ood_metric("variance"), ConfigError);
}
