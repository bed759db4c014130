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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "uabnn/error.hpp"
#include "uabnn/features.hpp"
#include "uabnn/log.hpp"
#include "uabnn/rng.hpp"

using namespace uabnn;

namespace {

Waveform ramp(std::size_t n) {
  Waveform w;
  w.sample_rate_hz = 5000;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(static_cast<double>(i));
  return w;
}

Dataset small_dataset() {
  Dataset d;
  d.features.resize(4, 2);
  d.features << 1.0, 10.0,  //
      3.0, 20.0,            //
      5.0, 10.0,            //
      7.0, 40.0;
  d.labels = {0, 1, 0, 1};
  d.class_names = {{0, "NoFault"}, {1, "MissingTooth"}};
  d.feature_names = {"a", "b"};
  return d;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("uabnn_features_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("window offsets") {
  const auto ten = ramp(10);
  CHECK(window(ten, 10, 1).size() == 1);

  const auto segs = window(ten, 4, 2);
  REQUIRE(segs.size() == 4);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].size() == 4);
    CHECK(segs[i][0] == static_cast<double>(2 * i));
  }

  // Enumerate offsets 0, hop, ... while a full window fits.
  std::size_t expected = 0;
  for (std::size_t off = 0; off + 512 <= 5000; off += 256) ++expected;
  CHECK(window(ramp(5000), 512, 256).size() == expected);
  CHECK(expected == 18);

  CHECK_THROWS_AS(window(ten, 11, 1), DegenerateInputError);
}

TEST_CASE("each sample lies in at most ceil(len / hop) windows") {
  for (auto [len, hop] : {std::pair<std::size_t, std::size_t>{512, 256}, {100, 30}, {7, 7}, {9, 2}}) {
    const auto w = ramp(1000);
    std::vector<int> cover(1000, 0);
    for (auto s : window(w, len, hop))
      for (double v : s) ++cover[static_cast<std::size_t>(v)];
    const int bound = static_cast<int>((len + hop - 1) / hop);
    for (int c : cover) CHECK(c <= bound);
  }
}

TEST_CASE("constant segment") {
  const std::vector<double> seg(64, -2.5);
  const auto f = extract_features(seg, 5000, 280);
  CHECK(f.rms == doctest::Approx(2.5));
  CHECK(f.variance == 0.0);
  CHECK(f.skewness == 0.0);
  CHECK(f.kurtosis == 0.0);
  CHECK(f.crest_factor == doctest::Approx(1.0));
  CHECK(f.size() == 13);
  for (double e : f.band_energy) CHECK(e >= 0.0);
}

TEST_CASE("sine at the mesh frequency lands in band 1") {
  // 500 samples at 5 kHz hold exactly 28 periods of 280 Hz.
  std::vector<double> seg(500);
  double total = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    seg[i] = std::sin(2 * std::numbers::pi * 280.0 * static_cast<double>(i) / 5000.0);
    total += seg[i] * seg[i];  // Parseval: total spectral energy / N
  }
  const auto f = extract_features(seg, 5000, 280);
  CHECK(f.band_energy[0] > 0.99 * total);
  CHECK(f.band_energy[1] < 1e-9 * total);
  CHECK(f.rms == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(f.crest_factor == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("gaussian segment moments") {
  const CounterRng rng(77);
  std::vector<double> seg(100000);
  for (std::size_t i = 0; i < seg.size(); ++i) seg[i] = rng.normal(i);
  const auto f = extract_features(seg, 5000, 280, 0);
  CHECK(std::abs(f.kurtosis) < 0.1);
  CHECK(std::abs(f.skewness) < 0.05);
  CHECK(f.variance == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("moments use population normalisation") {
  const std::vector<double> seg = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4};
  const auto f = extract_features(seg, 5000, 280, 1);
  // Independent evaluation: mean 0.25, deviations -0.25 (x15) and 3.75.
  const double m2 = (15 * 0.0625 + 3.75 * 3.75) / 16;
  const double m3 = (15 * -0.015625 + std::pow(3.75, 3)) / 16;
  const double m4 = (15 * 0.00390625 + std::pow(3.75, 4)) / 16;
  CHECK(f.variance == doctest::Approx(m2).epsilon(1e-12));
  CHECK(f.skewness == doctest::Approx(m3 / std::pow(m2, 1.5)).epsilon(1e-12));
  CHECK(f.kurtosis == doctest::Approx(m4 / (m2 * m2) - 3).epsilon(1e-12));
  CHECK(f.crest_factor == doctest::Approx(4.0 / 1.0).epsilon(1e-12));
}

TEST_CASE("feature preconditions") {
  const std::vector<double> tiny(15, 1.0);
  CHECK_THROWS_AS(extract_features(tiny, 5000, 280), ContractViolation);
  const std::vector<double> seg(64, 1.0);
  CHECK_THROWS_AS(extract_features(seg, 5000, 400, 8), ContractViolation);
  std::vector<double> bad(64, 1.0);
  bad[3] = NAN;
  CHECK_THROWS_AS(extract_features(bad, 5000, 280), ContractViolation);
  CHECK(feature_names(2) == std::vector<std::string>{"rms", "variance", "skewness", "kurtosis",
                                                     "crest_factor", "band1", "band2"});
}

TEST_CASE("standardizer") {
  const auto d = small_dataset();
  const auto s = fit_standardizer(d);
  const auto z = apply_standardizer(d, s);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const double m = z.features.col(c).mean();
    const double sd = std::sqrt((z.features.col(c).array() - m).square().mean());
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(sd - 1) < 1e-9);
  }
  CHECK(z.scaler.has_value());

  Dataset two;
  two.features.resize(2, 1);
  two.features << 1.0, 3.0;
  two.labels = {0, 0};
  two.class_names = {{0, "NoFault"}};
  const auto t = apply_standardizer(two, fit_standardizer(two));
  CHECK(t.features(0, 0) == doctest::Approx(-1.0));
  CHECK(t.features(1, 0) == doctest::Approx(1.0));

  Dataset one = two;
  one.features.resize(1, 1);
  one.labels = {0};
  CHECK_THROWS_AS(fit_standardizer(one), ContractViolation);
}

TEST_CASE("zero-variance feature gets unit std and a warning") {
  Dataset d = small_dataset();
  d.features.col(1).setConstant(7.0);
  std::vector<std::string> messages;
  set_log_sink([&](LogLevel, std::string_view m) { messages.emplace_back(m); });
  const auto s = fit_standardizer(d);
  set_log_sink(nullptr);
  CHECK(s.std[1] == 1.0);
  REQUIRE(messages.size() == 1);
  CHECK(messages[0].find("'b'") != std::string::npos);
  const auto z = apply_standardizer(d, s);
  for (Eigen::Index r = 0; r < 4; ++r) CHECK(z.features(r, 1) == 0.0);
}

TEST_CASE("held-out data keeps the training statistics") {
  const auto train = small_dataset();
  Dataset test = small_dataset();
  test.features.array() += 5.0;
  const auto z = apply_standardizer(test, fit_standardizer(train));
  CHECK(std::abs(z.features.col(0).mean()) > 0.5);
}

TEST_CASE("csv round trip") {
  TempDir tmp;
  Dataset d = small_dataset();
  const CounterRng rng(3);
  for (Eigen::Index i = 0; i < d.features.size(); ++i) d.features.data()[i] = rng.normal(i) * 1e3 + 1e-7;
  const auto path = tmp.path / "d.csv";
  dataset_to_csv(d, path);
  CHECK(std::filesystem::exists(manifest_path(path)));
  CHECK(manifest_path(path).filename() == "d.manifest.json");
  const auto back = dataset_from_csv(path);
  REQUIRE(back.rows() == d.rows());
  REQUIRE(back.cols() == d.cols());
  CHECK((back.features - d.features).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.labels == d.labels);
  CHECK(back.class_names == d.class_names);
  CHECK(back.feature_names == d.feature_names);
  CHECK_FALSE(back.scaler.has_value());

  const auto z = apply_standardizer(d, fit_standardizer(d));
  dataset_to_csv(z, path);
  const auto zb = dataset_from_csv(path);
  REQUIRE(zb.scaler.has_value());
  CHECK(zb.scaler->mean == z.scaler->mean);
  CHECK(zb.scaler->std == z.scaler->std);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "a,b,label");
}

TEST_CASE("csv error contract") {
  TempDir tmp;
  const auto manifest = R"({"classes": {"0": "NoFault", "1": "MissingTooth"}, "scaler": null})";
  const auto csv = tmp.path / "x.csv";
  write(manifest_path(csv), manifest);

  write(csv, "");
  CHECK_THROWS_AS(dataset_from_csv(csv), ParseError);

  write(csv, "a,b,label\n1,2,0\n3,4,7\n");
  try {
    dataset_from_csv(csv);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }

  write(csv, "a,b,label\n1,2,0\n3,4\n");
  try {
    dataset_from_csv(csv);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  write(csv, "a,b,label\n1,x,0\n");
  CHECK_THROWS_AS(dataset_from_csv(csv), ParseError);
  write(csv, "a,b,label\n1,2,0.5\n");
  CHECK_THROWS_AS(dataset_from_csv(csv), ParseError);

  CHECK_THROWS_AS(dataset_from_csv(tmp.path / "missing.csv"), IoError);
}
