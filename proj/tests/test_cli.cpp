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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

// Scratch directory shared by every case in this binary.
const fs::path& work() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("uabnn_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    std::ofstream(d / "small.json") << R"({"eval_samples": 20, "architecture": {"hidden": [16]},
                                           "train": {"epochs": 15, "batch_size": 32, "learning_rate": 0.01}})";
    return d;
  }();
  return dir;
}

struct Cleanup {
  ~Cleanup() { fs::remove_all(work()); }
} cleanup;

// Runs the CLI with `args`; stdout and stderr go to files in the work dir.
int run(const std::string& args) {
  const std::string cmd = std::string("\"") + UABNN_CLI_PATH + "\" " + args + " >\"" +
                          (work() / "stdout.txt").string() + "\" 2>\"" + (work() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string at(const std::string& name) { return "\"" + (work() / name).string() + "\""; }

const std::string kSmall = " -c " + at("small.json");

}  // namespace

TEST_CASE("gen-data writes a reproducible dataset") {
  REQUIRE(run("gen-data -f NoFault,MissingTooth,ChippedTooth -n 100 --snr 10 -o " + at("d.csv")) == 0);
  const auto first = slurp(work() / "d.csv");
  CHECK(line_count(first) == 301);
  CHECK(first.rfind("rms,variance,skewness,kurtosis,crest_factor,band1", 0) == 0);
  CHECK(fs::exists(work() / "d.manifest.json"));
  REQUIRE(run("gen-data -f NoFault,MissingTooth,ChippedTooth -n 100 --snr 10 -o " + at("d2.csv")) == 0);
  CHECK(slurp(work() / "d2.csv") == first);
  REQUIRE(run("gen-data -f NoFault,MissingTooth,ChippedTooth -n 100 --snr 10 --seed 8 -o " + at("d3.csv")) == 0);
  CHECK(slurp(work() / "d3.csv") != first);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("gen-data -f NoFault,Wobble -o " + at("x.csv")) == 2);
  CHECK(slurp(work() / "stderr.txt").find("Wobble") != std::string::npos);
  CHECK(run("gen-data -f NoFault -o " + at("x.csv") + " --frobnicate") == 2);
  CHECK(run("gen-data -o " + at("x.csv")) == 2);
  CHECK(run("gen-data -f NoFault -o " + at("x.csv") + " --seed minus-one") == 2);
  CHECK(run("experiment sweep -o " + at("exp")) == 2);
  CHECK(run("") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("runtime errors exit with 1") {
  CHECK(run("train -d " + at("missing.csv") + " -o " + at("m.json")) == 1);
  CHECK(slurp(work() / "stderr.txt").find("missing.csv") != std::string::npos);
  CHECK(run("gen-data -f NoFault -o " + at("x.csv") + " -c " + at("nope.json")) == 1);
}

TEST_CASE("train and predict") {
  REQUIRE(run("gen-data -f NoFault,MissingTooth,ChippedTooth -n 100 --snr 10 -o " + at("t.csv")) == 0);
  REQUIRE(run("train -d " + at("t.csv") + " -o " + at("bnn.json") + kSmall) == 0);
  CHECK(fs::exists(work() / "bnn.json.trace.csv"));
  CHECK(line_count(slurp(work() / "bnn.json.trace.csv")) == 16);
  REQUIRE(run("train -d " + at("t.csv") + " -o " + at("mlp.json") + " --deterministic --epochs 5" + kSmall) == 0);
  CHECK(slurp(work() / "mlp.json").find("\"deterministic\"") != std::string::npos);

  REQUIRE(run("predict -m " + at("bnn.json") + " -d " + at("t.csv") + " -S 20") == 0);
  const auto out = slurp(work() / "stdout.txt");
  CHECK(line_count(out) == 300);
  CHECK(out.find("\"eu\":") != std::string::npos);
  REQUIRE(run("predict -m " + at("bnn.json") + " -d " + at("t.csv") + " -S 20 -o " + at("p.jsonl")) == 0);
  CHECK(slurp(work() / "p.jsonl") == out);

  REQUIRE(run("predict -m " + at("mlp.json") + " -d " + at("t.csv")) == 0);
  const auto mlp = slurp(work() / "stdout.txt");
  CHECK(line_count(mlp) == 300);
  CHECK(mlp.find("\"eu\":0.0,") != std::string::npos);

  CHECK(run("predict -m " + at("bnn.json") + " -d " + at("t.csv") + " -S 1") == 2);
}

TEST_CASE("experiments are byte-identical across runs") {
  const std::string args = " -n 72 --epochs 10" + kSmall;
  REQUIRE(run("experiment all -o " + at("e1") + args) == 0);
  for (const char* sub : {"ood", "noise", "incremental"}) {
    CHECK(fs::exists(work() / "e1" / sub / "results.json"));
    CHECK(fs::exists(work() / "e1" / sub / "boxplot_data.csv"));
    CHECK(fs::exists(work() / "e1" / sub / "plan.json"));
  }
  REQUIRE(run("experiment ood -o " + at("e2") + args) == 0);
  CHECK(slurp(work() / "e1" / "ood" / "results.json") == slurp(work() / "e2" / "ood" / "results.json"));

  // The environment seed applies, and --seed beats it.
  const std::string env = "UABNN_SEED=77 ";
  const std::string cmd = env + "\"" + UABNN_CLI_PATH + "\" experiment ood -o " + at("e3") + args + " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(work() / "e3" / "ood" / "results.json") != slurp(work() / "e1" / "ood" / "results.json"));
  const std::string cmd2 = env + "\"" + UABNN_CLI_PATH + "\" experiment ood --seed 20240601 -o " + at("e4") + args +
                           " >/dev/null 2>&1";
  REQUIRE(std::system(cmd2.c_str()) == 0);
  CHECK(slurp(work() / "e4" / "ood" / "results.json") == slurp(work() / "e1" / "ood" / "results.json"));
}
