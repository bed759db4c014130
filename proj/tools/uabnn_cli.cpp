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

// uabnn command-line tool. Talks to the library only through uabnn.h.
//
// Settings precedence: built-in defaults < --config file < UABNN_SEED < flags.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uabnn/uabnn.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Failure carrying its exit code.
struct CliError {
  int code;
  std::string message;
};

int exit_code_for(uabnn_status s) {
  return (s == UABNN_ERR_CONFIG || s == UABNN_ERR_CONTRACT) ? kExitUsage : kExitRuntime;
}

void check(uabnn_status s) {
  if (s != UABNN_OK) throw CliError{exit_code_for(s), std::string(uabnn_status_name(s)) + ": " + uabnn_last_error()};
}

// Owns a string returned by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { uabnn_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct DatasetHandle {
  uabnn_dataset* p = nullptr;
  ~DatasetHandle() { uabnn_dataset_free(p); }
};

struct ModelHandle {
  uabnn_model* p = nullptr;
  ~ModelHandle() { uabnn_model_free(p); }
};

// Options shared by all subcommands.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string log_level;
};

// Keys that the config file may carry besides the plan itself.
struct RunExtras {
  std::optional<std::string> output_dir;
  std::optional<std::string> log_level;
  std::optional<double> snr_db;
};

json load_config(const std::string& path, RunExtras& extras) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitRuntime, "cannot read config file '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw CliError{kExitUsage, "config file '" + path + "' is not valid JSON: " + e.what()};
  }
  if (!j.is_object()) throw CliError{kExitUsage, "config file must hold a JSON object"};
  try {
    if (j.contains("output_dir")) extras.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("log_level")) extras.log_level = j["log_level"].get<std::string>();
    if (j.contains("snr_db") && !j["snr_db"].is_null()) extras.snr_db = j["snr_db"].get<double>();
  } catch (const json::exception& e) {
    throw CliError{kExitUsage, std::string("config file has a bad run option: ") + e.what()};
  }
  j.erase("output_dir");
  j.erase("log_level");
  j.erase("snr_db");
  return j;
}

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw CliError{kExitUsage, std::string(what) + " must be an unsigned 64-bit integer, got '" + text + "'"};
  return v;
}

void apply_log_level(const std::string& name) {
  int level = -1;
  if (name == "quiet") level = 0;
  if (name == "warning") level = 1;
  if (name == "info") level = 2;
  if (name == "debug") level = 3;
  if (level < 0) throw CliError{kExitUsage, "unknown log level '" + name + "' (quiet, warning, info, debug)"};
  check(uabnn_set_log_level(level));
}

// Resolves the plan JSON for a subcommand: file, then env seed, then flags.
json resolve_plan(const Common& common, RunExtras& extras) {
  json plan = load_config(common.config_path, extras);
  std::optional<std::uint64_t> seed;
  if (const char* env = std::getenv("UABNN_SEED"); env != nullptr && *env != '\0')
    seed = parse_seed(env, "UABNN_SEED");
  if (common.seed) seed = common.seed;
  if (seed) {
    plan["master_seed"] = *seed;
    if (!plan.contains("train") || !plan["train"].is_object()) plan["train"] = json::object();
    plan["train"]["seed"] = *seed;
  }
  if (!common.log_level.empty()) {
    apply_log_level(common.log_level);
  } else if (extras.log_level) {
    apply_log_level(*extras.log_level);
  }
  return plan;
}

void set_train(json& plan, const char* key, const json& value) {
  if (!plan.contains("train") || !plan["train"].is_object()) plan["train"] = json::object();
  plan["train"][key] = value;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError{kExitRuntime, "cannot write '" + path + "'"};
  out << text;
  if (!out) throw CliError{kExitRuntime, "failed writing '" + path + "'"};
}

void add_common(CLI::App* cmd, Common& common, std::string& seed_text) {
  cmd->add_option("-c,--config", common.config_path, "JSON config file (experiment plan keys)");
  cmd->add_option("--seed", seed_text, "Seed; overrides master_seed and train.seed");
  cmd->add_option("--log-level", common.log_level, "quiet, warning, info or debug")
      ->check(CLI::IsMember({"quiet", "warning", "info", "debug"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware Bayesian neural networks for gearbox fault diagnosis"};
  app.set_version_flag("--version", std::string(uabnn_version()));
  app.require_subcommand(1);

  Common common;
  std::string seed_text;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a labelled feature dataset (CSV + manifest)");
  std::vector<std::string> faults;
  std::string gen_out;
  std::optional<int> windows;
  std::optional<double> snr;
  bool standardize = false;
  add_common(gen, common, seed_text);
  gen->add_option("-f,--faults", faults, "Fault classes, comma separated (e.g. NoFault,MissingTooth)")
      ->required();
  gen->add_option("-o,--out", gen_out, "Output CSV path; the manifest goes next to it")->required();
  gen->add_option("-n,--windows", windows, "Windows per class (samples_per_class)");
  gen->add_option("--snr", snr, "Added noise SNR in dB; omit for no added noise");
  gen->add_flag("--standardize", standardize, "Fit a scaler and store standardized features");

  // train
  auto* train = app.add_subcommand("train", "Train a BNN (or deterministic MLP) on a dataset");
  std::string train_data, train_out, trace_out;
  bool deterministic = false;
  std::optional<int> epochs, batch_size;
  std::optional<double> learning_rate;
  std::string kl_weighting;
  add_common(train, common, seed_text);
  train->add_option("-d,--data", train_data, "Dataset CSV")->required();
  train->add_option("-o,--out", train_out, "Checkpoint output path (JSON)")->required();
  train->add_option("--trace", trace_out, "Loss trace CSV (default: <out>.trace.csv)");
  train->add_flag("--deterministic", deterministic, "Train the deterministic MLP baseline");
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--batch-size", batch_size, "Minibatch size");
  train->add_option("--lr", learning_rate, "Learning rate");
  train->add_option("--kl-weighting", kl_weighting, "uniform, scalar or per_example")
      ->check(CLI::IsMember({"uniform", "scalar", "per_example"}));

  // predict
  auto* predict = app.add_subcommand("predict", "Per-sample uncertainty reports as JSON lines");
  std::string pred_model, pred_data, pred_out;
  std::optional<int> samples;
  add_common(predict, common, seed_text);
  predict->add_option("-m,--model", pred_model, "Checkpoint path")->required();
  predict->add_option("-d,--data", pred_data, "Dataset CSV")->required();
  predict->add_option("-S,--samples", samples, "Monte-Carlo weight draws (default eval_samples)");
  predict->add_option("-o,--out", pred_out, "Output file (default stdout)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run the OOD, noise and/or incremental studies");
  std::string which, exp_out;
  std::optional<int> exp_windows, exp_epochs;
  add_common(experiment, common, seed_text);
  experiment->add_option("which", which, "ood, noise, incremental or all")->required();
  experiment->add_option("-o,--out", exp_out, "Output directory (or output_dir in the config)");
  experiment->add_option("-n,--windows", exp_windows, "Windows per class (samples_per_class)");
  experiment->add_option("--epochs", exp_epochs, "Training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!seed_text.empty()) common.seed = parse_seed(seed_text, "--seed");
    RunExtras extras;
    json plan = resolve_plan(common, extras);

    if (gen->parsed()) {
      if (windows) plan["samples_per_class"] = *windows;
      if (snr) extras.snr_db = snr;
      const auto names = split_list(faults);
      std::vector<const char*> cnames;
      for (const auto& n : names) cnames.push_back(n.c_str());
      DatasetHandle ds;
      const double snr_value = extras.snr_db.value_or(0.0);
      check(uabnn_generate_dataset(plan.dump().c_str(), cnames.data(), cnames.size(),
                                   extras.snr_db ? &snr_value : nullptr, standardize ? 1 : 0, &ds.p));
      check(uabnn_dataset_save(ds.p, gen_out.c_str()));
      size_t rows = 0, cols = 0, classes = 0;
      check(uabnn_dataset_shape(ds.p, &rows, &cols, &classes));
      std::cout << "wrote " << rows << " rows x " << cols << " features, " << classes << " classes to "
                << gen_out << "\n";
    } else if (train->parsed()) {
      if (epochs) set_train(plan, "epochs", *epochs);
      if (batch_size) set_train(plan, "batch_size", *batch_size);
      if (learning_rate) set_train(plan, "learning_rate", *learning_rate);
      if (!kl_weighting.empty()) set_train(plan, "kl_weighting", kl_weighting);
      DatasetHandle ds;
      check(uabnn_dataset_load(train_data.c_str(), &ds.p));
      ModelHandle model;
      LibString trace;
      check(uabnn_train(ds.p, plan.dump().c_str(), deterministic ? 1 : 0, &model.p, &trace.p));
      check(uabnn_model_save(model.p, train_out.c_str()));
      const std::string trace_path = trace_out.empty() ? train_out + ".trace.csv" : trace_out;
      write_text(trace_path, trace.str());
      std::cout << "wrote " << (deterministic ? "deterministic" : "bnn") << " checkpoint " << train_out
                << " and trace " << trace_path << "\n";
    } else if (predict->parsed()) {
      LibString normalized;
      check(uabnn_plan_normalize(plan.dump().c_str(), &normalized.p));
      const json full = json::parse(normalized.str());
      const int s = samples.value_or(full.at("eval_samples").get<int>());
      const auto seed = full.at("master_seed").get<std::uint64_t>();
      ModelHandle model;
      check(uabnn_model_load(pred_model.c_str(), &model.p));
      DatasetHandle ds;
      check(uabnn_dataset_load(pred_data.c_str(), &ds.p));
      LibString lines;
      check(uabnn_predict(model.p, ds.p, s, seed, &lines.p));
      write_text(pred_out, lines.str());
    } else if (experiment->parsed()) {
      if (exp_windows) plan["samples_per_class"] = *exp_windows;
      if (exp_epochs) set_train(plan, "epochs", *exp_epochs);
      const std::string out_dir = !exp_out.empty() ? exp_out : extras.output_dir.value_or("");
      if (out_dir.empty()) throw CliError{kExitUsage, "experiment needs --out or output_dir in the config"};
      check(uabnn_run_experiment(plan.dump().c_str(), which.c_str(), out_dir.c_str()));
      std::cout << "wrote " << which << " results under " << out_dir << "\n";
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
