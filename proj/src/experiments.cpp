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

#include "uabnn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "config_util.hpp"
#include "text.hpp"
#include "uabnn/config.hpp"
#include "uabnn/error.hpp"
#include "uabnn/log.hpp"

namespace uabnn {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Plan

void ExperimentPlan::validate() const {
  if (seen_classes.size() < 2) throw ConfigError("plan needs at least two seen classes");
  std::set<FaultClass> seen(seen_classes.begin(), seen_classes.end());
  if (seen.size() != seen_classes.size()) throw ConfigError("seen_classes has duplicates");
  for (auto f : unseen_classes)
    if (seen.count(f)) throw ConfigError("class " + std::string(fault_key(f)) + " is both seen and unseen");
  std::set<FaultClass> grown = seen;
  for (auto f : incremental_order)
    if (!grown.insert(f).second)
      throw ConfigError("incremental_order repeats or re-adds class " + std::string(fault_key(f)));
  if (snr_grid_db.empty()) throw ConfigError("snr_grid_db must not be empty");
  for (std::size_t i = 0; i < snr_grid_db.size(); ++i) {
    if (!std::isfinite(snr_grid_db[i])) throw ConfigError("snr_grid_db entries must be finite");
    if (i > 0 && !(snr_grid_db[i] < snr_grid_db[i - 1]))
      throw ConfigError("snr_grid_db must be strictly decreasing");
  }
  if (!std::isfinite(train_snr_db)) throw ConfigError("train_snr_db must be finite");
  if (noise_train_snr_db.empty()) throw ConfigError("noise_train_snr_db must not be empty");
  for (double v : noise_train_snr_db)
    if (!std::isfinite(v)) throw ConfigError("noise_train_snr_db entries must be finite");
  if (samples_per_class <= 0) throw ConfigError("samples_per_class must be positive");
  if (!(split_ratio > 0 && split_ratio < 1)) throw ConfigError("split_ratio must lie in (0, 1)");
  if (!(speed_jitter >= 0 && speed_jitter < 0.5)) throw ConfigError("speed_jitter must lie in [0, 0.5)");
  if (!(amplitude_jitter >= 0 && amplitude_jitter < 1))
    throw ConfigError("amplitude_jitter must lie in [0, 1)");
  if (window_len < 16 || hop == 0) throw ConfigError("window_len must be >= 16 and hop positive");
  if (band_count < 0) throw ConfigError("band_count must be non-negative");
  if (eval_samples < 2) throw ConfigError("eval_samples must be at least 2");
  signal.validate();
  const double top_mesh = signal.gear_mesh_freq_hz * (1.0 + speed_jitter);
  if (top_mesh * signal.n_harmonics >= signal.sample_rate_hz / 2 ||
      top_mesh * band_count >= signal.sample_rate_hz / 2)
    throw ConfigError("jittered mesh harmonics or feature bands reach the Nyquist frequency");
  if (signal.sample_count() < window_len)
    throw ConfigError("recordings are shorter than one window");
  train.validate();
  architecture.validate();
}

namespace {

std::vector<std::string> fault_keys(std::span<const FaultClass> fs) {
  std::vector<std::string> out;
  for (auto f : fs) out.emplace_back(fault_key(f));
  return out;
}

std::vector<FaultClass> parse_faults(const std::vector<std::string>& names) {
  std::vector<FaultClass> out;
  for (const auto& n : names) out.push_back(parse_fault(n));
  return out;
}

}  // namespace

void to_json(json& j, const ExperimentPlan& p) {
  j = json{{"seen_classes", fault_keys(p.seen_classes)},
           {"unseen_classes", fault_keys(p.unseen_classes)},
           {"incremental_order", fault_keys(p.incremental_order)},
           {"snr_grid_db", p.snr_grid_db},
           {"train_snr_db", p.train_snr_db},
           {"noise_train_snr_db", p.noise_train_snr_db},
           {"samples_per_class", p.samples_per_class},
           {"split_ratio", p.split_ratio},
           {"signal", p.signal},
           {"speed_jitter", p.speed_jitter},
           {"amplitude_jitter", p.amplitude_jitter},
           {"normalize_gain", p.normalize_gain},
           {"window_len", p.window_len},
           {"hop", p.hop},
           {"band_count", p.band_count},
           {"train", p.train},
           {"architecture", p.architecture},
           {"eval_samples", p.eval_samples},
           {"master_seed", p.master_seed},
           {"warm_start", p.warm_start}};
}

void from_json(const json& j, ExperimentPlan& p) {
  detail::ObjectReader r(j, "plan");
  std::vector<std::string> names;
  if (r.get("seen_classes", names)) p.seen_classes = parse_faults(names);
  if (r.get("unseen_classes", names)) p.unseen_classes = parse_faults(names);
  if (r.get("incremental_order", names)) p.incremental_order = parse_faults(names);
  r.get("snr_grid_db", p.snr_grid_db);
  r.get("train_snr_db", p.train_snr_db);
  r.get("noise_train_snr_db", p.noise_train_snr_db);
  r.get("samples_per_class", p.samples_per_class);
  r.get("split_ratio", p.split_ratio);
  r.get("signal", p.signal);
  r.get("speed_jitter", p.speed_jitter);
  r.get("amplitude_jitter", p.amplitude_jitter);
  r.get("normalize_gain", p.normalize_gain);
  r.get("window_len", p.window_len);
  r.get("hop", p.hop);
  r.get("band_count", p.band_count);
  r.get("train", p.train);
  r.get("architecture", p.architecture);
  r.get("eval_samples", p.eval_samples);
  r.get("master_seed", p.master_seed);
  r.get("warm_start", p.warm_start);
  r.finish();
}

// ---------------------------------------------------------------------------
// Data

namespace {

struct RecordingLayout {
  std::size_t windows_per_recording = 0;
  std::size_t recordings = 0;
  std::size_t train_recordings = 0;
};

RecordingLayout recording_layout(const ExperimentPlan& plan) {
  RecordingLayout l;
  const std::size_t n = plan.signal.sample_count();
  l.windows_per_recording = (n - plan.window_len) / plan.hop + 1;
  const auto spc = static_cast<std::size_t>(plan.samples_per_class);
  l.recordings = std::max<std::size_t>(2, (spc + l.windows_per_recording - 1) / l.windows_per_recording);
  const auto train = static_cast<std::size_t>(std::llround(plan.split_ratio * static_cast<double>(l.recordings)));
  l.train_recordings = std::clamp<std::size_t>(train, 1, l.recordings - 1);
  return l;
}

std::uint64_t recording_seed(const ExperimentPlan& plan, FaultClass fault, std::size_t r) {
  return derive_seed(derive_seed(plan.master_seed, "recording/" + std::string(fault_key(fault))),
                     static_cast<std::uint64_t>(r));
}

std::string snr_tag(std::optional<double> snr_db) {
  return snr_db ? "snr/" + detail::format_double(*snr_db) : std::string("snr/none");
}

// Adds the windows of one recording to `out`, at most `limit` of them.
void add_recording(const ExperimentPlan& plan, FaultClass fault, std::size_t r,
                   std::optional<double> snr_db, std::size_t limit, Dataset& out) {
  const std::uint64_t seed = recording_seed(plan, fault, r);
  SequentialRng jitter(derive_seed(seed, "jitter"));
  auto spread = [&jitter](double rel) { return 1.0 + rel * (2.0 * jitter.next_uniform() - 1.0); };

  SignalConfig cfg = plan.signal;
  cfg.seed = seed;
  const double speed = spread(plan.speed_jitter);
  cfg.shaft_freq_hz *= speed;
  cfg.gear_mesh_freq_hz *= speed;
  for (double& a : cfg.harmonic_amplitudes) a *= spread(plan.amplitude_jitter);
  FaultSignature sig = default_signature(fault, cfg);
  sig.impulse_amplitude *= spread(plan.amplitude_jitter);
  sig.sideband_depth = std::min(1.0, sig.sideband_depth * spread(plan.amplitude_jitter));
  sig.broadband_gain *= spread(plan.amplitude_jitter);

  Waveform w = generate_vibration(cfg, fault, sig);
  w = inject_noise(w, snr_db, derive_seed(seed, snr_tag(snr_db)));
  if (plan.normalize_gain) {
    const double rms = std::sqrt(w.power());
    if (rms > 0)
      for (double& v : w.samples) v /= rms;
  }
  const auto segments = window(w, plan.window_len, plan.hop);
  const std::size_t take = std::min(limit, segments.size());
  const auto first = out.features.rows();
  out.features.conservativeResize(first + static_cast<Eigen::Index>(take),
                                  static_cast<Eigen::Index>(5 + plan.band_count));
  const std::uint64_t group = (static_cast<std::uint64_t>(fault_id(fault)) << 32) | r;
  for (std::size_t s = 0; s < take; ++s) {
    const auto f = extract_features(segments[s], w.sample_rate_hz, cfg.gear_mesh_freq_hz,
                                    plan.band_count).values();
    for (std::size_t c = 0; c < f.size(); ++c)
      out.features(first + static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) = f[c];
    out.labels.push_back(fault_id(fault));
    out.group_ids.push_back(group);
  }
}

}  // namespace

namespace {

template <typename SnrOf>
Dataset build_class_dataset(const ExperimentPlan& plan, FaultClass fault, DataSplit split,
                            SnrOf snr_of) {
  const auto layout = recording_layout(plan);
  Dataset d;
  d.feature_names = feature_names(plan.band_count);
  d.features.resize(0, static_cast<Eigen::Index>(5 + plan.band_count));
  d.class_names[fault_id(fault)] = std::string(fault_key(fault));
  auto remaining = static_cast<std::size_t>(plan.samples_per_class);
  // Windows are allotted to recordings in order; the last one may be partial.
  for (std::size_t r = 0; r < layout.recordings && remaining > 0; ++r) {
    const std::size_t quota = std::min(remaining, layout.windows_per_recording);
    remaining -= quota;
    const bool is_train = r < layout.train_recordings;
    if (is_train == (split == DataSplit::kTrain)) add_recording(plan, fault, r, snr_of(r), quota, d);
  }
  for (double v : d.features.reshaped())
    if (!std::isfinite(v)) throw NumericError("non-finite feature for class " + std::string(fault_key(fault)));
  return d;
}

}  // namespace

Dataset make_class_dataset(const ExperimentPlan& plan, FaultClass fault, DataSplit split,
                           std::optional<double> snr_db) {
  return build_class_dataset(plan, fault, split, [&](std::size_t) { return snr_db; });
}

Dataset make_class_dataset(const ExperimentPlan& plan, FaultClass fault, DataSplit split,
                           std::span<const double> snr_db) {
  require(!snr_db.empty(), "SNR cycle must not be empty");
  return build_class_dataset(plan, fault, split, [&](std::size_t r) -> std::optional<double> {
    return snr_db[r % snr_db.size()];
  });
}

Dataset make_dataset(const ExperimentPlan& plan, std::span<const FaultClass> faults,
                     DataSplit split, std::optional<double> snr_db) {
  Dataset d;
  for (auto f : faults) append(d, make_class_dataset(plan, f, split, snr_db));
  return d;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

std::string class_set_tag(std::span<const FaultClass> classes) {
  std::vector<int> ids;
  for (auto f : classes) ids.push_back(fault_id(f));
  std::sort(ids.begin(), ids.end());
  std::string tag;
  for (int id : ids) tag += std::string(fault_key(static_cast<FaultClass>(id))) + "+";
  return tag;
}

std::vector<FaultClass> sorted_classes(std::vector<FaultClass> classes) {
  std::sort(classes.begin(), classes.end(),
            [](auto a, auto b) { return fault_id(a) < fault_id(b); });
  return classes;
}

std::map<int, std::string> class_name_map(std::span<const FaultClass> classes) {
  std::map<int, std::string> m;
  for (auto f : classes) m[fault_id(f)] = std::string(fault_key(f));
  return m;
}

struct StandardisedTrain {
  Dataset data;
  std::set<std::uint64_t> groups;
};

StandardisedTrain training_set(const ExperimentPlan& plan, std::span<const FaultClass> classes,
                               std::span<const double> snrs) {
  Dataset raw;
  for (auto f : classes) append(raw, make_class_dataset(plan, f, DataSplit::kTrain, snrs));
  StandardisedTrain out;
  out.groups.insert(raw.group_ids.begin(), raw.group_ids.end());
  out.data = apply_standardizer(raw, fit_standardizer(raw));
  return out;
}

// Adds rows to the output layer of `prev` for classes it has not seen,
// initialised like a fresh layer.
BnnModel widen_output(const BnnModel& prev, int class_count, const Architecture& arch,
                      std::uint64_t seed) {
  BnnModel fresh = BnnModel::create(prev.input_dim(), class_count, arch, seed);
  auto layers = prev.layers();
  auto& out = layers.back();
  const auto& fresh_out = fresh.layers().back();
  const auto old_rows = out.mu.rows();
  require(fresh_out.mu.cols() == out.mu.cols(), "warm start needs an unchanged hidden layout");
  VariationalLinear wide(out.in_dim(), class_count);
  wide.mu = fresh_out.mu;
  wide.rho = fresh_out.rho;
  wide.bias_mu = fresh_out.bias_mu;
  wide.bias_rho = fresh_out.bias_rho;
  wide.mu.topRows(old_rows) = out.mu;
  wide.rho.topRows(old_rows) = out.rho;
  wide.bias_mu.head(old_rows) = out.bias_mu;
  wide.bias_rho.head(old_rows) = out.bias_rho;
  out = std::move(wide);
  return BnnModel(std::move(layers), prev.activation(), prev.prior());
}

}  // namespace

struct ExperimentRunner::Cache {
  std::map<std::string, TrainedBnn> bnn;
  std::map<std::string, TrainedMlp> mlp;
  std::map<std::string, std::set<std::uint64_t>> train_groups;
  std::string last_bnn_tag;
};

ExperimentRunner::ExperimentRunner(ExperimentPlan plan)
    : plan_(std::move(plan)), cache_(std::make_unique<Cache>()) {
  plan_.validate();
}

ExperimentRunner::~ExperimentRunner() = default;

const TrainedBnn& ExperimentRunner::bnn_for(const std::vector<FaultClass>& classes) {
  return bnn_for(classes, {plan_.train_snr_db});
}

const TrainedBnn& ExperimentRunner::bnn_for(const std::vector<FaultClass>& classes_in,
                                            const std::vector<double>& train_snr_db) {
  const auto classes = sorted_classes(classes_in);
  // Models at the nominal training SNR are keyed by class set alone.
  std::string tag = class_set_tag(classes);
  const bool nominal = train_snr_db.size() == 1 && train_snr_db[0] == plan_.train_snr_db;
  if (!nominal) {
    tag += "@";
    for (double v : train_snr_db) tag += detail::format_double(v) + ",";
  }
  if (auto it = cache_->bnn.find(tag); it != cache_->bnn.end()) return it->second;

  auto train = training_set(plan_, classes, train_snr_db);
  cache_->train_groups[tag] = train.groups;
  TrainConfig cfg = plan_.train;
  cfg.seed = derive_seed(plan_.master_seed, "bnn/" + tag);
  const int d = static_cast<int>(train.data.cols());
  const int c = static_cast<int>(classes.size());
  BnnModel init = BnnModel::create(d, c, plan_.architecture, cfg.seed);
  if (plan_.warm_start && nominal && !cache_->last_bnn_tag.empty()) {
    const auto& prev = std::get<BnnModel>(cache_->bnn.at(cache_->last_bnn_tag).checkpoint.model);
    if (prev.class_count() < c) init = widen_output(prev, c, plan_.architecture, cfg.seed);
  }
  log_info("training BNN on " + tag + " (" + std::to_string(train.data.rows()) + " windows)");
  auto result = train_bbb(std::move(init), train.data, cfg);

  TrainedBnn t;
  t.classes = classes;
  t.trace = std::move(result.trace);
  t.checkpoint.model = std::move(result.model);
  for (auto f : classes) t.checkpoint.class_ids.push_back(fault_id(f));
  t.checkpoint.class_names = class_name_map(classes);
  t.checkpoint.feature_names = train.data.feature_names;
  t.checkpoint.scaler = train.data.scaler;
  t.checkpoint.train_config = cfg;
  if (nominal) cache_->last_bnn_tag = tag;
  return cache_->bnn.emplace(tag, std::move(t)).first->second;
}

const TrainedMlp& ExperimentRunner::mlp_for(const std::vector<FaultClass>& classes_in) {
  const auto classes = sorted_classes(classes_in);
  const std::string tag = class_set_tag(classes);
  if (auto it = cache_->mlp.find(tag); it != cache_->mlp.end()) return it->second;

  const std::vector<double> snrs = {plan_.train_snr_db};
  auto train = training_set(plan_, classes, snrs);
  TrainConfig cfg = plan_.train;
  cfg.seed = derive_seed(plan_.master_seed, "mlp/" + tag);
  auto init = DeterministicMlp::create(static_cast<int>(train.data.cols()),
                                       static_cast<int>(classes.size()), plan_.architecture, cfg.seed);
  log_info("training deterministic MLP on " + tag);
  auto result = train_deterministic(std::move(init), train.data, cfg);

  TrainedMlp t;
  t.classes = classes;
  t.trace = std::move(result.trace);
  t.checkpoint.model = std::move(result.model);
  for (auto f : classes) t.checkpoint.class_ids.push_back(fault_id(f));
  t.checkpoint.class_names = class_name_map(classes);
  t.checkpoint.feature_names = train.data.feature_names;
  t.checkpoint.scaler = train.data.scaler;
  t.checkpoint.train_config = cfg;
  return cache_->mlp.emplace(tag, std::move(t)).first->second;
}

namespace {

ClassEvaluation evaluate_reports(const std::vector<UncertaintyReport>& reports,
                                 const Checkpoint& ckpt, FaultClass fault) {
  ClassEvaluation e;
  e.fault = fault;
  const auto& ids = ckpt.class_ids;
  e.seen = std::find(ids.begin(), ids.end(), fault_id(fault)) != ids.end();
  e.class_probs.assign(ids.size(), {});
  std::size_t hits = 0;
  for (const auto& r : reports) {
    const int predicted = ids[static_cast<std::size_t>(r.predicted_class)];
    ++e.predicted_counts[predicted];
    if (predicted == fault_id(fault)) ++hits;
    e.confidence.push_back(r.confidence);
    e.pu.push_back(r.pu);
    e.au.push_back(r.au);
    e.eu.push_back(r.eu);
    if (r.eu_clamped) ++e.eu_clamped;
    for (std::size_t c = 0; c < ids.size(); ++c) e.class_probs[c].push_back(r.mean_probs[c]);
  }
  if (e.seen && !reports.empty())
    e.accuracy = static_cast<double>(hits) / static_cast<double>(reports.size());
  return e;
}

}  // namespace

ClassEvaluation ExperimentRunner::evaluate(const TrainedBnn& model, FaultClass fault,
                                           std::optional<double> snr_db, std::string_view tag) {
  const auto& ckpt = model.checkpoint;
  const Dataset test = apply_standardizer(make_class_dataset(plan_, fault, DataSplit::kTest, snr_db),
                                          *ckpt.scaler);
  const auto& bnn = std::get<BnnModel>(ckpt.model);
  const std::uint64_t seed = derive_seed(plan_.master_seed, "eval/" + std::string(tag));
  const auto dists = predict_mc(bnn, test.features, plan_.eval_samples, seed);
  std::vector<UncertaintyReport> reports;
  reports.reserve(dists.size());
  for (const auto& pd : dists) reports.push_back(decompose(pd));
  return evaluate_reports(reports, ckpt, fault);
}

ClassEvaluation ExperimentRunner::evaluate(const TrainedMlp& model, FaultClass fault,
                                           std::optional<double> snr_db) {
  const auto& ckpt = model.checkpoint;
  const Dataset test = apply_standardizer(make_class_dataset(plan_, fault, DataSplit::kTest, snr_db),
                                          *ckpt.scaler);
  const Matrix probs = softmax_rows(forward(std::get<DeterministicMlp>(ckpt.model), test.features));
  std::vector<UncertaintyReport> reports;
  std::vector<double> row(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) row[static_cast<std::size_t>(c)] = probs(i, c);
    reports.push_back(point_report(row));
  }
  return evaluate_reports(reports, ckpt, fault);
}

namespace {

std::vector<double> pooled(const std::vector<ClassEvaluation>& evals, bool seen,
                           std::vector<double> ClassEvaluation::*field) {
  std::vector<double> out;
  for (const auto& e : evals)
    if (e.seen == seen) out.insert(out.end(), (e.*field).begin(), (e.*field).end());
  return out;
}

double pooled_accuracy(const std::vector<ClassEvaluation>& evals) {
  double hits = 0.0, total = 0.0;
  for (const auto& e : evals) {
    if (!e.accuracy) continue;
    hits += *e.accuracy * static_cast<double>(e.confidence.size());
    total += static_cast<double>(e.confidence.size());
  }
  return total > 0 ? hits / total : 0.0;
}

}  // namespace

OodComparisonResult ExperimentRunner::run_ood_comparison() {
  OodComparisonResult r;
  const auto& bnn = bnn_for(plan_.seen_classes);
  const auto& mlp = mlp_for(plan_.seen_classes);
  r.bnn.model = "bnn";
  r.deterministic.model = "deterministic";
  std::vector<FaultClass> evaluated = sorted_classes(plan_.seen_classes);
  for (auto f : sorted_classes(plan_.unseen_classes)) evaluated.push_back(f);
  for (auto f : evaluated) {
    r.bnn.classes.push_back(evaluate(bnn, f, plan_.train_snr_db, "base"));
    r.deterministic.classes.push_back(evaluate(mlp, f, plan_.train_snr_db));
  }
  r.bnn.seen_accuracy = pooled_accuracy(r.bnn.classes);
  r.deterministic.seen_accuracy = pooled_accuracy(r.deterministic.classes);

  const auto eu_seen = pooled(r.bnn.classes, true, &ClassEvaluation::eu);
  const auto eu_unseen = pooled(r.bnn.classes, false, &ClassEvaluation::eu);
  if (!eu_unseen.empty()) {
    r.median_eu_seen = stats::median(eu_seen);
    r.median_eu_unseen = stats::median(eu_unseen);
    r.eu_test = stats::mann_whitney_greater(eu_unseen, eu_seen);
    r.bnn_unseen_mean_confidence = stats::mean(pooled(r.bnn.classes, false, &ClassEvaluation::confidence));
    r.deterministic_unseen_mean_confidence =
        stats::mean(pooled(r.deterministic.classes, false, &ClassEvaluation::confidence));
  }

  // Audit: training recordings belong to seen classes only and never reappear
  // among evaluation recordings.
  const auto& groups = cache_->train_groups.at(class_set_tag(sorted_classes(plan_.seen_classes)));
  bool clean = true;
  for (auto g : groups) {
    const auto cls = static_cast<int>(g >> 32);
    for (auto f : plan_.unseen_classes)
      if (cls == fault_id(f)) clean = false;
  }
  for (auto f : evaluated) {
    const auto test = make_class_dataset(plan_, f, DataSplit::kTest, plan_.train_snr_db);
    for (auto g : test.group_ids)
      if (groups.count(g)) clean = false;
  }
  r.leakage_audit_passed = clean;
  r.bnn_models.push_back(bnn);
  r.mlp_models.push_back(mlp);
  return r;
}

std::vector<NoiseLevelResult> ExperimentRunner::sweep(const TrainedBnn& bnn, std::string_view tag,
                                                      double& spearman_pu, double& spearman_au) {
  std::vector<NoiseLevelResult> levels;
  std::vector<double> neg_snr, median_pu, median_au;
  for (double snr : plan_.snr_grid_db) {
    NoiseLevelResult level;
    level.snr_db = snr;
    for (auto f : sorted_classes(plan_.seen_classes)) level.classes.push_back(evaluate(bnn, f, snr, tag));
    const auto au = pooled(level.classes, true, &ClassEvaluation::au);
    const auto eu = pooled(level.classes, true, &ClassEvaluation::eu);
    const auto pu = pooled(level.classes, true, &ClassEvaluation::pu);
    const auto conf = pooled(level.classes, true, &ClassEvaluation::confidence);
    level.accuracy = pooled_accuracy(level.classes);
    level.mean_au = stats::mean(au);
    level.median_au = stats::median(au);
    level.mean_eu = stats::mean(eu);
    level.median_eu = stats::median(eu);
    level.mean_pu = stats::mean(pu);
    level.median_pu = stats::median(pu);
    level.confidence = stats::five_number(conf);
    level.au_exceeds_eu = level.median_au > level.median_eu;
    for (std::size_t i = 0; i < pu.size(); ++i)
      level.max_decomposition_error = std::max(level.max_decomposition_error, std::abs(pu[i] - (au[i] + eu[i])));
    neg_snr.push_back(-snr);
    median_pu.push_back(level.median_pu);
    median_au.push_back(level.median_au);
    levels.push_back(std::move(level));
  }
  spearman_pu = spearman_au = 0.0;
  if (neg_snr.size() >= 2) {
    spearman_pu = stats::spearman(neg_snr, median_pu);
    spearman_au = stats::spearman(neg_snr, median_au);
  }
  return levels;
}

NoiseSweepResult ExperimentRunner::run_noise_sweep() {
  NoiseSweepResult r;
  const auto& bnn = bnn_for(plan_.seen_classes, plan_.noise_train_snr_db);
  r.levels = sweep(bnn, "noise", r.spearman_pu, r.spearman_au);
  r.model = bnn;
  r.reference_levels = sweep(bnn_for(plan_.seen_classes), "base", r.reference_spearman_pu, r.reference_spearman_au);
  for (auto& l : r.reference_levels) l.classes.clear();
  return r;
}

IncrementalResult ExperimentRunner::run_incremental() {
  IncrementalResult r;
  std::vector<FaultClass> everything = plan_.seen_classes;
  for (auto f : plan_.incremental_order)
    everything.push_back(f);
  for (auto f : plan_.unseen_classes)
    if (std::find(everything.begin(), everything.end(), f) == everything.end()) everything.push_back(f);
  everything = sorted_classes(everything);

  std::vector<FaultClass> classes = plan_.seen_classes;
  for (std::size_t stage = 0; stage <= plan_.incremental_order.size(); ++stage) {
    IncrementalStage s;
    if (stage > 0) {
      s.added = plan_.incremental_order[stage - 1];
      classes.push_back(*s.added);
    }
    s.name = stage == 0 ? "BNN" : "BNN-" + std::to_string(stage + 1);
    s.classes = sorted_classes(classes);
    const auto& model = bnn_for(classes);
    const std::string tag = class_set_tag(s.classes);
    for (auto f : everything) s.evaluations.push_back(evaluate(model, f, plan_.train_snr_db, tag));
    double acc = 0.0;
    for (const auto& e : s.evaluations)
      if (e.accuracy) acc += *e.accuracy;
    s.macro_accuracy = acc / static_cast<double>(s.classes.size());
    if (s.added) {
      const auto& prev = r.stages.back();
      auto find = [&](const std::vector<ClassEvaluation>& es) -> const ClassEvaluation& {
        return *std::find_if(es.begin(), es.end(), [&](const auto& e) { return e.fault == *s.added; });
      };
      const auto& after = find(s.evaluations);
      s.added_accuracy = after.accuracy.value_or(0.0);
      s.added_median_pu_after = stats::median(after.pu);
      s.added_median_pu_before = stats::median(find(prev.evaluations).pu);
    }
    r.models.push_back(model);
    r.stages.push_back(std::move(s));
  }
  return r;
}

OodComparisonResult run_ood_comparison(const ExperimentPlan& plan) {
  return ExperimentRunner(plan).run_ood_comparison();
}

NoiseSweepResult run_noise_sweep(const ExperimentPlan& plan) {
  return ExperimentRunner(plan).run_noise_sweep();
}

IncrementalResult run_incremental(const ExperimentPlan& plan) {
  return ExperimentRunner(plan).run_incremental();
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json summary_json(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  const auto f = stats::five_number(v);
  return json{{"mean", stats::mean(v)}, {"min", f.min},       {"q1", f.q1},
              {"median", f.median},     {"q3", f.q3},         {"max", f.max}};
}

json evaluation_json(const ClassEvaluation& e, std::span<const int> class_ids) {
  json j;
  j["class"] = fault_key(e.fault);
  j["seen"] = e.seen;
  j["samples"] = e.confidence.size();
  j["accuracy"] = e.accuracy ? json(*e.accuracy) : json(nullptr);
  json counts = json::object();
  for (const auto& [id, n] : e.predicted_counts) counts[std::string(fault_key(fault_from_id(id)))] = n;
  j["predicted_counts"] = counts;
  j["confidence"] = summary_json(e.confidence);
  j["pu"] = summary_json(e.pu);
  j["au"] = summary_json(e.au);
  j["eu"] = summary_json(e.eu);
  j["eu_clamped"] = e.eu_clamped;
  json probs = json::object();
  for (std::size_t c = 0; c < class_ids.size() && c < e.class_probs.size(); ++c)
    probs[std::string(fault_key(fault_from_id(class_ids[c])))] = summary_json(e.class_probs[c]);
  j["class_probs"] = probs;
  return j;
}

json trace_json(const LossTrace& t) {
  json j;
  j["epochs"] = t.epochs.size();
  j["final_train_accuracy"] = t.final_train_accuracy;
  if (!t.epochs.empty()) {
    j["first_elbo"] = t.epochs.front().elbo;
    j["final_elbo"] = t.epochs.back().elbo;
    j["final_kl"] = t.epochs.back().kl;
    j["final_nll"] = t.epochs.back().nll;
  }
  return j;
}

json model_eval_json(const ModelEvaluation& m, std::span<const int> ids) {
  json classes = json::array();
  for (const auto& e : m.classes) classes.push_back(evaluation_json(e, ids));
  return json{{"model", m.model}, {"seen_accuracy", m.seen_accuracy}, {"classes", classes}};
}

void append_rows(std::string& csv, std::string_view experiment, const ClassEvaluation& e,
                 std::string_view prefix, std::span<const int> ids, bool with_uncertainty) {
  const std::string head =
      std::string(experiment) + "," + std::string(fault_key(e.fault)) + "," + std::string(prefix);
  auto emit = [&](std::string_view metric, const std::vector<double>& values) {
    for (double v : values) {
      csv += head;
      csv += metric;
      csv += ',';
      csv += detail::format_double(v);
      csv += '\n';
    }
  };
  emit("confidence", e.confidence);
  if (with_uncertainty) {
    emit("pu", e.pu);
    emit("au", e.au);
    emit("eu", e.eu);
  }
  for (std::size_t c = 0; c < ids.size() && c < e.class_probs.size(); ++c)
    emit("prob:" + std::string(fault_key(fault_from_id(ids[c]))), e.class_probs[c]);
}

json level_json(const NoiseLevelResult& l, std::span<const int> ids) {
  json j{{"snr_db", l.snr_db},
         {"accuracy", l.accuracy},
         {"mean_au", l.mean_au},
         {"median_au", l.median_au},
         {"mean_eu", l.mean_eu},
         {"median_eu", l.median_eu},
         {"mean_pu", l.mean_pu},
         {"median_pu", l.median_pu},
         {"confidence", {{"min", l.confidence.min}, {"q1", l.confidence.q1},
                         {"median", l.confidence.median}, {"q3", l.confidence.q3},
                         {"max", l.confidence.max}}},
         {"au_exceeds_eu", l.au_exceeds_eu},
         {"max_decomposition_error", l.max_decomposition_error}};
  if (!l.classes.empty()) {
    json classes = json::array();
    for (const auto& e : l.classes) classes.push_back(evaluation_json(e, ids));
    j["classes"] = classes;
  }
  return j;
}

constexpr const char* kCsvHeader = "experiment,class,metric,value\n";

}  // namespace

json results_json(const ExperimentPlan& plan, const OodComparisonResult& r) {
  json j;
  j["experiment"] = "ood";
  j["master_seed"] = plan.master_seed;
  j["seen_classes"] = fault_keys(plan.seen_classes);
  j["unseen_classes"] = fault_keys(plan.unseen_classes);
  j["train_snr_db"] = plan.train_snr_db;
  j["bnn"] = model_eval_json(r.bnn, r.bnn_models.front().checkpoint.class_ids);
  j["deterministic"] = model_eval_json(r.deterministic, r.mlp_models.front().checkpoint.class_ids);
  j["median_eu_seen"] = r.median_eu_seen;
  j["median_eu_unseen"] = r.median_eu_unseen;
  j["mann_whitney_eu"] = {{"u", r.eu_test.u}, {"z", r.eu_test.z}, {"p_value", r.eu_test.p_value},
                          {"alternative", "unseen > seen"}};
  j["bnn_unseen_mean_confidence"] = r.bnn_unseen_mean_confidence;
  j["deterministic_unseen_mean_confidence"] = r.deterministic_unseen_mean_confidence;
  j["leakage_audit_passed"] = r.leakage_audit_passed;
  j["training"] = {{"bnn", trace_json(r.bnn_models.front().trace)},
                   {"deterministic", trace_json(r.mlp_models.front().trace)}};
  return j;
}

json results_json(const ExperimentPlan& plan, const NoiseSweepResult& r) {
  json j;
  j["experiment"] = "noise";
  j["master_seed"] = plan.master_seed;
  j["seen_classes"] = fault_keys(plan.seen_classes);
  json levels = json::array();
  for (const auto& l : r.levels) levels.push_back(level_json(l, r.model.checkpoint.class_ids));
  j["levels"] = levels;
  j["noise_train_snr_db"] = plan.noise_train_snr_db;
  j["spearman_neg_snr_vs_median_pu"] = r.spearman_pu;
  j["spearman_neg_snr_vs_median_au"] = r.spearman_au;
  json reference = json::array();
  for (const auto& l : r.reference_levels) reference.push_back(level_json(l, {}));
  j["reference_nominal_training"] = {{"train_snr_db", plan.train_snr_db},
                                     {"levels", reference},
                                     {"spearman_neg_snr_vs_median_pu", r.reference_spearman_pu},
                                     {"spearman_neg_snr_vs_median_au", r.reference_spearman_au}};
  j["training"] = trace_json(r.model.trace);
  return j;
}

json results_json(const ExperimentPlan& plan, const IncrementalResult& r) {
  json j;
  j["experiment"] = "incremental";
  j["master_seed"] = plan.master_seed;
  json stages = json::array();
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const auto& s = r.stages[i];
    json evals = json::array();
    for (const auto& e : s.evaluations) evals.push_back(evaluation_json(e, r.models[i].checkpoint.class_ids));
    json st{{"name", s.name},
            {"classes", fault_keys(s.classes)},
            {"macro_accuracy", s.macro_accuracy},
            {"evaluations", evals},
            {"training", trace_json(r.models[i].trace)}};
    if (s.added) {
      st["added"] = fault_key(*s.added);
      st["added_accuracy"] = s.added_accuracy;
      st["added_median_pu_before"] = s.added_median_pu_before;
      st["added_median_pu_after"] = s.added_median_pu_after;
    } else {
      st["added"] = nullptr;
    }
    stages.push_back(std::move(st));
  }
  j["stages"] = stages;
  return j;
}

std::string boxplot_csv(const OodComparisonResult& r) {
  std::string csv = kCsvHeader;
  const auto& bnn_ids = r.bnn_models.front().checkpoint.class_ids;
  const auto& mlp_ids = r.mlp_models.front().checkpoint.class_ids;
  for (const auto& e : r.bnn.classes) append_rows(csv, "ood", e, "bnn_", bnn_ids, true);
  for (const auto& e : r.deterministic.classes) append_rows(csv, "ood", e, "deterministic_", mlp_ids, false);
  return csv;
}

std::string boxplot_csv(const NoiseSweepResult& r) {
  std::string csv = kCsvHeader;
  for (const auto& l : r.levels) {
    const std::string exp = "noise:" + detail::format_double(l.snr_db) + "dB";
    for (const auto& e : l.classes) append_rows(csv, exp, e, "bnn_", r.model.checkpoint.class_ids, true);
  }
  return csv;
}

std::string boxplot_csv(const IncrementalResult& r) {
  std::string csv = kCsvHeader;
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const std::string exp = "incremental:" + r.stages[i].name;
    for (const auto& e : r.stages[i].evaluations)
      append_rows(csv, exp, e, "bnn_", r.models[i].checkpoint.class_ids, true);
  }
  return csv;
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "ood") return ExperimentKind::kOod;
  if (name == "noise") return ExperimentKind::kNoise;
  if (name == "incremental") return ExperimentKind::kIncremental;
  if (name == "all") return ExperimentKind::kAll;
  throw ConfigError("unknown experiment '" + std::string(name) + "' (ood, noise, incremental, all)");
}

std::vector<std::filesystem::path> write_experiments(const ExperimentPlan& plan,
                                                     ExperimentKind which,
                                                     const std::filesystem::path& out_dir) {
  ExperimentRunner runner(plan);
  std::vector<std::filesystem::path> written;
  auto prepare = [&](const char* name) {
    const auto dir = out_dir / name;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    detail::write_file(dir / "plan.json", json(plan).dump(2) + "\n");
    written.push_back(dir);
    return dir;
  };
  const bool all = which == ExperimentKind::kAll;
  if (all || which == ExperimentKind::kOod) {
    const auto dir = prepare("ood");
    const auto r = runner.run_ood_comparison();
    save_checkpoint(r.bnn_models.front().checkpoint, dir / "bnn.json");
    save_checkpoint(r.mlp_models.front().checkpoint, dir / "deterministic.json");
    detail::write_file(dir / "results.json", results_json(plan, r).dump(2) + "\n");
    detail::write_file(dir / "boxplot_data.csv", boxplot_csv(r));
  }
  if (all || which == ExperimentKind::kNoise) {
    const auto dir = prepare("noise");
    const auto r = runner.run_noise_sweep();
    save_checkpoint(r.model.checkpoint, dir / "bnn.json");
    detail::write_file(dir / "results.json", results_json(plan, r).dump(2) + "\n");
    detail::write_file(dir / "boxplot_data.csv", boxplot_csv(r));
  }
  if (all || which == ExperimentKind::kIncremental) {
    const auto dir = prepare("incremental");
    const auto r = runner.run_incremental();
    for (std::size_t i = 0; i < r.models.size(); ++i) {
      std::string name = r.stages[i].name;
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
      save_checkpoint(r.models[i].checkpoint, dir / (name + ".json"));
    }
    detail::write_file(dir / "results.json", results_json(plan, r).dump(2) + "\n");
    detail::write_file(dir / "boxplot_data.csv", boxplot_csv(r));
  }
  return written;
}

}  // namespace uabnn
