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

#include "uabnn/uabnn.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "uabnn/checkpoint.hpp"
#include "uabnn/config.hpp"
#include "uabnn/error.hpp"
#include "uabnn/experiments.hpp"
#include "uabnn/features.hpp"
#include "uabnn/log.hpp"
#include "uabnn/train.hpp"
#include "uabnn/uncertainty.hpp"

struct uabnn_dataset {
  uabnn::Dataset data;
};

struct uabnn_model {
  uabnn::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

uabnn_status status_of(uabnn::ErrorKind kind) {
  switch (kind) {
    case uabnn::ErrorKind::kConfig: return UABNN_ERR_CONFIG;
    case uabnn::ErrorKind::kIo: return UABNN_ERR_IO;
    case uabnn::ErrorKind::kParse: return UABNN_ERR_PARSE;
    case uabnn::ErrorKind::kDegenerate: return UABNN_ERR_DEGENERATE;
    case uabnn::ErrorKind::kContract: return UABNN_ERR_CONTRACT;
    case uabnn::ErrorKind::kNumeric: return UABNN_ERR_NUMERIC;
  }
  return UABNN_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
uabnn_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return UABNN_OK;
  } catch (const uabnn::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return UABNN_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw uabnn::ContractViolation(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

uabnn::ExperimentPlan plan_from(const char* text) {
  uabnn::ExperimentPlan plan;
  if (text != nullptr && *text != '\0') plan = uabnn::parse_config_text(text, "plan").get<uabnn::ExperimentPlan>();
  plan.validate();
  return plan;
}

// Standardised view of ds for model m: datasets carrying a scaler are
// already standardised, raw ones take the model's scaler.
uabnn::Dataset model_input(const uabnn::Checkpoint& ckpt, const uabnn::Dataset& ds) {
  if (static_cast<int>(ds.cols()) != ckpt.input_dim())
    throw uabnn::ContractViolation("dataset has " + std::to_string(ds.cols()) + " features, model expects " +
                                   std::to_string(ckpt.input_dim()));
  if (ds.scaler || !ckpt.scaler) return ds;
  return uabnn::apply_standardizer(ds, *ckpt.scaler);
}

std::vector<uabnn::UncertaintyReport> reports_for(const uabnn::Checkpoint& ckpt, const uabnn::Matrix& x,
                                                  int samples, std::uint64_t seed) {
  std::vector<uabnn::UncertaintyReport> out;
  if (const auto* bnn = std::get_if<uabnn::BnnModel>(&ckpt.model)) {
    for (const auto& pd : uabnn::predict_mc(*bnn, x, samples, seed)) out.push_back(uabnn::decompose(pd));
  } else {
    const uabnn::Matrix probs =
        uabnn::softmax_rows(uabnn::forward(std::get<uabnn::DeterministicMlp>(ckpt.model), x));
    std::vector<double> row(static_cast<std::size_t>(probs.cols()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      for (Eigen::Index c = 0; c < probs.cols(); ++c) row[static_cast<std::size_t>(c)] = probs(i, c);
      out.push_back(uabnn::point_report(row));
    }
  }
  return out;
}

}  // namespace

extern "C" {

const char* uabnn_version(void) { return "1.0.0"; }

const char* uabnn_last_error(void) { return g_last_error.c_str(); }

const char* uabnn_status_name(uabnn_status status) {
  switch (status) {
    case UABNN_OK: return "ok";
    case UABNN_ERR_CONFIG: return "configuration error";
    case UABNN_ERR_IO: return "I/O error";
    case UABNN_ERR_PARSE: return "parse error";
    case UABNN_ERR_DEGENERATE: return "degenerate input";
    case UABNN_ERR_CONTRACT: return "contract violation";
    case UABNN_ERR_NUMERIC: return "numeric error";
    case UABNN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void uabnn_string_free(char* s) { std::free(s); }

uabnn_status uabnn_set_log_level(int level) {
  return guarded([&] {
    if (level < 0 || level > 3) throw uabnn::ConfigError("log level must be 0..3");
    uabnn::set_log_level(static_cast<uabnn::LogLevel>(level));
  });
}

uabnn_status uabnn_plan_normalize(const char* plan_json, char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    *out_json = dup_string(nlohmann::json(plan_from(plan_json)).dump(2) + "\n");
  });
}

uabnn_status uabnn_generate_dataset(const char* plan_json, const char* const* faults, size_t fault_count,
                                    const double* snr_db, int standardize, uabnn_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    if (fault_count == 0) throw uabnn::ConfigError("at least one fault class is required");
    need(faults, "faults");
    const auto plan = plan_from(plan_json);
    std::vector<uabnn::FaultClass> classes;
    for (size_t i = 0; i < fault_count; ++i) {
      need(faults[i], "fault name");
      const auto f = uabnn::parse_fault(faults[i]);
      if (std::find(classes.begin(), classes.end(), f) != classes.end())
        throw uabnn::ConfigError("fault class '" + std::string(faults[i]) + "' listed twice");
      classes.push_back(f);
    }
    std::optional<double> snr;
    if (snr_db != nullptr) snr = *snr_db;
    auto ds = std::make_unique<uabnn_dataset>();
    for (auto f : classes) {
      // Training recordings first, then test recordings: recording order.
      uabnn::append(ds->data, uabnn::make_class_dataset(plan, f, uabnn::DataSplit::kTrain, snr));
      uabnn::append(ds->data, uabnn::make_class_dataset(plan, f, uabnn::DataSplit::kTest, snr));
    }
    if (standardize != 0) ds->data = uabnn::apply_standardizer(ds->data, uabnn::fit_standardizer(ds->data));
    *out = ds.release();
  });
}

uabnn_status uabnn_dataset_load(const char* csv_path, uabnn_dataset** out) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<uabnn_dataset>();
    ds->data = uabnn::dataset_from_csv(csv_path);
    *out = ds.release();
  });
}

uabnn_status uabnn_dataset_save(const uabnn_dataset* ds, const char* csv_path) {
  return guarded([&] {
    need(ds, "dataset");
    need(csv_path, "csv_path");
    uabnn::dataset_to_csv(ds->data, csv_path);
  });
}

uabnn_status uabnn_dataset_shape(const uabnn_dataset* ds, size_t* rows, size_t* cols, size_t* classes) {
  return guarded([&] {
    need(ds, "dataset");
    if (rows) *rows = static_cast<size_t>(ds->data.rows());
    if (cols) *cols = static_cast<size_t>(ds->data.cols());
    if (classes) *classes = ds->data.class_count();
  });
}

void uabnn_dataset_free(uabnn_dataset* ds) { delete ds; }

uabnn_status uabnn_train(const uabnn_dataset* ds, const char* plan_json, int deterministic, uabnn_model** out,
                         char** trace_csv) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    *out = nullptr;
    if (trace_csv) *trace_csv = nullptr;
    const auto plan = plan_from(plan_json);
    uabnn::Dataset train = ds->data;
    if (!train.scaler) train = uabnn::apply_standardizer(train, uabnn::fit_standardizer(train));
    const int d = static_cast<int>(train.cols());
    const int c = static_cast<int>(train.class_count());

    auto m = std::make_unique<uabnn_model>();
    uabnn::LossTrace trace;
    if (deterministic != 0) {
      auto r = uabnn::train_deterministic(uabnn::DeterministicMlp::create(d, c, plan.architecture, plan.train.seed),
                                          train, plan.train);
      m->checkpoint.model = std::move(r.model);
      trace = std::move(r.trace);
    } else {
      auto r = uabnn::train_bbb(uabnn::BnnModel::create(d, c, plan.architecture, plan.train.seed), train, plan.train);
      m->checkpoint.model = std::move(r.model);
      trace = std::move(r.trace);
    }
    m->checkpoint.class_ids = train.class_ids();
    m->checkpoint.class_names = train.class_names;
    m->checkpoint.feature_names = train.feature_names;
    m->checkpoint.scaler = train.scaler;
    m->checkpoint.train_config = plan.train;
    if (trace_csv) *trace_csv = dup_string(trace.to_csv());
    *out = m.release();
  });
}

uabnn_status uabnn_model_load(const char* path, uabnn_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<uabnn_model>();
    m->checkpoint = uabnn::load_checkpoint(path);
    *out = m.release();
  });
}

uabnn_status uabnn_model_save(const uabnn_model* m, const char* path) {
  return guarded([&] {
    need(m, "model");
    need(path, "path");
    uabnn::save_checkpoint(m->checkpoint, path);
  });
}

uabnn_status uabnn_model_is_bayesian(const uabnn_model* m, int* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    *out = m->checkpoint.is_bnn() ? 1 : 0;
  });
}

void uabnn_model_free(uabnn_model* m) { delete m; }

uabnn_status uabnn_predict(const uabnn_model* m, const uabnn_dataset* ds, int samples, uint64_t seed,
                           char** jsonl) {
  return guarded([&] {
    need(m, "model");
    need(ds, "dataset");
    need(jsonl, "jsonl");
    *jsonl = nullptr;
    const auto& ckpt = m->checkpoint;
    const uabnn::Dataset x = model_input(ckpt, ds->data);
    const auto reports = reports_for(ckpt, x.features, samples, seed);
    std::string text;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::string body = uabnn::report_to_json(reports[i], ckpt.class_ids);
      text += "{\"row\":" + std::to_string(i) + ",\"label\":" + std::to_string(x.labels[i]) + "," + body.substr(1);
      text += '\n';
    }
    *jsonl = dup_string(text);
  });
}

uabnn_status uabnn_predict_row(const uabnn_model* m, const double* x, size_t n, int samples, uint64_t seed,
                               char** json) {
  return guarded([&] {
    need(m, "model");
    need(x, "x");
    need(json, "json");
    *json = nullptr;
    const auto& ckpt = m->checkpoint;
    if (static_cast<int>(n) != ckpt.input_dim())
      throw uabnn::ContractViolation("feature vector has " + std::to_string(n) + " entries, model expects " +
                                     std::to_string(ckpt.input_dim()));
    std::vector<double> row(x, x + n);
    if (ckpt.scaler) row = uabnn::apply_standardizer(row, *ckpt.scaler);
    uabnn::Matrix mx(1, static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) mx(0, static_cast<Eigen::Index>(i)) = row[i];
    const auto reports = reports_for(ckpt, mx, samples, seed);
    *json = dup_string(uabnn::report_to_json(reports.front(), ckpt.class_ids));
  });
}

uabnn_status uabnn_run_experiment(const char* plan_json, const char* which, const char* out_dir) {
  return guarded([&] {
    need(which, "which");
    need(out_dir, "out_dir");
    const auto kind = uabnn::parse_experiment_kind(which);
    uabnn::write_experiments(plan_from(plan_json), kind, out_dir);
  });
}

}  // extern "C"
