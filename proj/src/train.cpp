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

#include "uabnn/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "text.hpp"
#include "uabnn/error.hpp"
#include "uabnn/log.hpp"

namespace uabnn {

void TrainConfig::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be finite and non-negative");
  if (mc_train_samples <= 0) throw ConfigError("mc_train_samples must be positive");
  if (!(kl_beta >= 0) || !std::isfinite(kl_beta)) throw ConfigError("kl_beta must be non-negative");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1))
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0)) throw ConfigError("adam_epsilon must be positive");
}

std::string_view kl_weighting_name(KlWeighting k) noexcept {
  switch (k) {
    case KlWeighting::kUniform: return "uniform";
    case KlWeighting::kScalar: return "scalar";
    case KlWeighting::kPerExample: return "per_example";
  }
  return "uniform";
}

KlWeighting parse_kl_weighting(std::string_view name) {
  if (name == "uniform") return KlWeighting::kUniform;
  if (name == "scalar") return KlWeighting::kScalar;
  if (name == "per_example") return KlWeighting::kPerExample;
  throw ConfigError("unknown kl weighting '" + std::string(name) + "' (uniform, scalar, per_example)");
}

std::string_view optimizer_name(OptimizerKind k) noexcept {
  return k == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (sgd, adam)");
}

std::string LossTrace::to_csv() const {
  std::string out = "epoch,elbo,kl,nll,kl_weight_sum\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + ',' + detail::format_double(e.elbo) + ',' +
           detail::format_double(e.kl) + ',' + detail::format_double(e.nll) + ',' +
           detail::format_double(e.kl_weight_sum) + '\n';
  }
  return out;
}

std::vector<int> class_targets(const Dataset& d) {
  std::vector<int> t;
  t.reserve(d.labels.size());
  for (int l : d.labels) t.push_back(d.class_index(l));
  return t;
}

double accuracy(const Matrix& logits, std::span<const int> targets) {
  require(static_cast<Eigen::Index>(targets.size()) == logits.rows(), "target count mismatch");
  if (targets.empty()) return 0.0;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (arg == targets[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

namespace {

using ArrayMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrayMap = Eigen::Map<const Eigen::ArrayXd>;

template <typename Derived>
ArrayMap as_array(Eigen::PlainObjectBase<Derived>& m) {
  return ArrayMap(m.data(), m.size());
}

template <typename Derived>
ConstArrayMap as_array(const Eigen::PlainObjectBase<Derived>& m) {
  return ConstArrayMap(m.data(), m.size());
}

// Per-block SGD / Adam; blocks are addressed by a stable index.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& c) : config_(c) {}

  void begin_step() { ++t_; }

  void update(std::size_t block, ArrayMap param, ConstArrayMap grad) {
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::kSgd) {
      param -= lr * grad;
      return;
    }
    if (block >= m_.size()) {
      m_.resize(block + 1);
      v_.resize(block + 1);
    }
    if (m_[block].size() != param.size()) {
      m_[block] = Eigen::ArrayXd::Zero(param.size());
      v_[block] = Eigen::ArrayXd::Zero(param.size());
    }
    const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
    m_[block] = b1 * m_[block] + (1.0 - b1) * grad;
    v_[block] = b2 * v_[block] + (1.0 - b2) * grad.square();
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    param -= lr * (m_[block] / c1) / ((v_[block] / c2).sqrt() + config_.adam_epsilon);
  }

 private:
  TrainConfig config_;
  long long t_ = 0;
  std::vector<Eigen::ArrayXd> m_, v_;
};

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t key) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SequentialRng rng(key);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_index(i)]);
  return order;
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

void check_training_set(const Dataset& train, int class_count, int input_dim) {
  train.validate();
  require(train.rows() > 0, "training set is empty");
  require(train.scaler.has_value(), "training set must be standardised before training");
  require(static_cast<int>(train.class_count()) == class_count,
          "model has " + std::to_string(class_count) + " outputs but the dataset names " +
              std::to_string(train.class_count()) + " classes");
  require(static_cast<int>(train.cols()) == input_dim,
          "model input width does not match the dataset");
  require(train.features.allFinite(), "training features must be finite");
}

std::string step_context(int epoch, std::size_t batch) {
  std::ostringstream ss;
  ss << "non-finite loss at epoch " << epoch << ", batch " << batch;
  return ss.str();
}

// Inputs were checked up front, so a contract failure inside a step can only
// come from parameters that have overflowed.
template <typename Fn>
auto numeric_step(int epoch, std::size_t batch, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractViolation& e) {
    throw NumericError(step_context(epoch, batch) + " (" + e.what() + ")");
  }
}

}  // namespace

BnnTrainResult train_bbb(BnnModel model, const Dataset& train, const TrainConfig& config) {
  config.validate();
  model.validate();
  check_training_set(train, model.class_count(), model.input_dim());

  const auto targets = class_targets(train);
  const std::size_t n = train.rows();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t num_batches = (n + batch - 1) / batch;
  const std::uint64_t shuffle_key = derive_seed(config.seed, "shuffle");
  const std::uint64_t eps_key = derive_seed(config.seed, "eps");

  Optimizer opt(config);
  LossTrace trace;
  BnnGradients grads;
  std::vector<NoiseDraw> draws(static_cast<std::size_t>(config.mc_train_samples));
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = shuffled_order(n, derive_seed(shuffle_key, static_cast<std::uint64_t>(epoch)));
    EpochRecord rec;
    rec.epoch = epoch;
    double nll_sum = 0.0, weighted_kl = 0.0;
    for (std::size_t b = 0; b < num_batches; ++b, ++step) {
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(n, begin + batch);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const Matrix xb = gather_rows(train.features, rows);
      std::vector<int> tb;
      tb.reserve(rows.size());
      for (auto r : rows) tb.push_back(targets[r]);

      double kl_weight = config.kl_beta;
      if (config.kl_weighting == KlWeighting::kUniform) kl_weight = 1.0 / static_cast<double>(num_batches);
      if (config.kl_weighting == KlWeighting::kPerExample) kl_weight = 1.0 / static_cast<double>(n);
      const std::uint64_t step_key = derive_seed(eps_key, step);
      for (std::size_t m = 0; m < draws.size(); ++m) draws[m] = model.draw_noise(derive_seed(step_key, m));

      const auto loss = numeric_step(epoch, b, [&] { return backward(model, xb, tb, draws, kl_weight, grads); });
      if (!std::isfinite(loss.total)) throw NumericError(step_context(epoch, b));

      opt.begin_step();
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        opt.update(4 * l + 0, as_array(layers[l].mu), as_array(std::as_const(grads[l].mu)));
        opt.update(4 * l + 1, as_array(layers[l].rho), as_array(std::as_const(grads[l].rho)));
        opt.update(4 * l + 2, as_array(layers[l].bias_mu), as_array(std::as_const(grads[l].bias_mu)));
        opt.update(4 * l + 3, as_array(layers[l].bias_rho), as_array(std::as_const(grads[l].bias_rho)));
      }
      nll_sum += loss.nll * static_cast<double>(rows.size());
      weighted_kl += kl_weight * loss.kl;
      rec.kl_weight_sum += kl_weight;
    }
    rec.kl = model.kl();
    rec.nll = nll_sum / static_cast<double>(n);
    rec.elbo = weighted_kl + rec.nll;
    if (!std::isfinite(rec.elbo) || !std::isfinite(rec.kl))
      throw NumericError("non-finite objective after epoch " + std::to_string(epoch));
    trace.epochs.push_back(rec);
    if (log_level() >= LogLevel::kDebug) {
      log_debug("bbb epoch " + std::to_string(epoch) + " elbo " + detail::format_double(rec.elbo) +
                " kl " + detail::format_double(rec.kl) + " nll " + detail::format_double(rec.nll));
    }
  }
  trace.final_train_accuracy =
      accuracy(forward(model.posterior_mean(), model.activation(), train.features), targets);
  return {std::move(model), std::move(trace)};
}

MlpTrainResult train_deterministic(DeterministicMlp mlp, const Dataset& train,
                                   const TrainConfig& config) {
  config.validate();
  mlp.validate();
  check_training_set(train, mlp.class_count(), mlp.input_dim());

  const auto targets = class_targets(train);
  const std::size_t n = train.rows();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t num_batches = (n + batch - 1) / batch;
  const std::uint64_t shuffle_key = derive_seed(config.seed, "shuffle");

  Optimizer opt(config);
  LossTrace trace;
  MlpGradients grads;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = shuffled_order(n, derive_seed(shuffle_key, static_cast<std::uint64_t>(epoch)));
    EpochRecord rec;
    rec.epoch = epoch;
    double nll_sum = 0.0;
    for (std::size_t b = 0; b < num_batches; ++b) {
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(n, begin + batch);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const Matrix xb = gather_rows(train.features, rows);
      std::vector<int> tb;
      tb.reserve(rows.size());
      for (auto r : rows) tb.push_back(targets[r]);

      const double loss = numeric_step(epoch, b, [&] { return mlp_backward(mlp, xb, tb, grads); });
      if (!std::isfinite(loss)) throw NumericError(step_context(epoch, b));
      opt.begin_step();
      auto& layers = mlp.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        opt.update(2 * l + 0, as_array(layers[l].weight), as_array(std::as_const(grads[l].weight)));
        opt.update(2 * l + 1, as_array(layers[l].bias), as_array(std::as_const(grads[l].bias)));
      }
      nll_sum += loss * static_cast<double>(rows.size());
    }
    rec.nll = nll_sum / static_cast<double>(n);
    rec.elbo = rec.nll;
    trace.epochs.push_back(rec);
  }
  trace.final_train_accuracy = accuracy(forward(mlp, train.features), targets);
  return {std::move(mlp), std::move(trace)};
}

}  // namespace uabnn
