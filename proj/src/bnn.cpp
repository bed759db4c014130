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

#include "uabnn/bnn.hpp"

#include <cmath>
#include <string>

#include "uabnn/error.hpp"

namespace uabnn {

double softplus(double rho) noexcept {
  if (rho > 30.0) return rho + std::log1p(std::exp(-rho));
  return std::log1p(std::exp(rho));
}

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_inverse(double sigma) {
  require(sigma > 0 && std::isfinite(sigma), "softplus_inverse needs a positive finite sigma");
  if (sigma > 30.0) return sigma + std::log(-std::expm1(-sigma));
  return std::log(std::expm1(sigma));
}

std::string_view activation_name(Activation a) noexcept {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "' (relu, tanh, identity)");
}

void GaussianPrior::validate() const {
  if (!std::isfinite(mean)) throw ConfigError("prior mean must be finite");
  if (!(std > 0) || !std::isfinite(std)) throw ConfigError("prior std must be positive");
}

VariationalLinear::VariationalLinear(Eigen::Index in_dim, Eigen::Index out_dim)
    : mu(Matrix::Zero(out_dim, in_dim)),
      rho(Matrix::Zero(out_dim, in_dim)),
      bias_mu(Vector::Zero(out_dim)),
      bias_rho(Vector::Zero(out_dim)) {}

Matrix VariationalLinear::weight_sigma() const {
  return rho.unaryExpr([](double r) { return softplus(r); });
}

Vector VariationalLinear::bias_sigma() const {
  return bias_rho.unaryExpr([](double r) { return softplus(r); });
}

void VariationalLinear::validate() const {
  require(mu.rows() > 0 && mu.cols() > 0, "layer must have non-zero dimensions");
  require(rho.rows() == mu.rows() && rho.cols() == mu.cols(), "mu and rho shapes differ");
  require(bias_mu.size() == mu.rows() && bias_rho.size() == mu.rows(),
          "bias length does not match layer output size");
  require(mu.allFinite() && rho.allFinite() && bias_mu.allFinite() && bias_rho.allFinite(),
          "layer parameters must be finite");
}

Matrix sample_weights(const VariationalLinear& layer, const Matrix& eps) {
  require(eps.rows() == layer.mu.rows() && eps.cols() == layer.mu.cols(),
          "eps shape does not match the layer");
  return layer.mu + layer.weight_sigma().cwiseProduct(eps);
}

Vector sample_bias(const VariationalLinear& layer, const Vector& eps) {
  require(eps.size() == layer.bias_mu.size(), "bias eps length does not match the layer");
  return layer.bias_mu + layer.bias_sigma().cwiseProduct(eps);
}

double kl_layer(const VariationalLinear& layer, const GaussianPrior& prior) {
  prior.validate();
  const double prior_var2 = 2.0 * prior.std * prior.std;
  const double log_prior_std = std::log(prior.std);
  auto term = [&](double mu, double rho) {
    const double sigma = softplus(rho);
    const double d = mu - prior.mean;
    return log_prior_std - std::log(sigma) + (sigma * sigma + d * d) / prior_var2 - 0.5;
  };
  double kl = 0.0;
  for (Eigen::Index j = 0; j < layer.mu.cols(); ++j)
    for (Eigen::Index i = 0; i < layer.mu.rows(); ++i) kl += term(layer.mu(i, j), layer.rho(i, j));
  for (Eigen::Index i = 0; i < layer.bias_mu.size(); ++i)
    kl += term(layer.bias_mu(i), layer.bias_rho(i));
  return kl;
}

void Architecture::validate() const {
  for (int h : hidden)
    if (h <= 0) throw ConfigError("hidden layer widths must be positive");
  if (!std::isfinite(init_rho)) throw ConfigError("init_rho must be finite");
  prior.validate();
}

// ---------------------------------------------------------------------------
// BnnModel

BnnModel::BnnModel(std::vector<VariationalLinear> layers, Activation activation,
                   GaussianPrior prior)
    : layers_(std::move(layers)), activation_(activation), prior_(prior) {
  validate();
}

namespace {

std::vector<int> layer_dims(int input_dim, int class_count, const Architecture& arch) {
  if (input_dim < 1) throw ConfigError("input dimension must be at least 1");
  if (class_count < 2) throw ConfigError("class count must be at least 2");
  arch.validate();
  std::vector<int> dims = {input_dim};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(class_count);
  return dims;
}

void check_dense_chain(std::span<const DenseLayer> layers) {
  require(!layers.empty(), "network needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    require(layer.weight.rows() > 0 && layer.weight.cols() > 0, "layer has zero dimension");
    require(layer.bias.size() == layer.weight.rows(), "bias length does not match layer");
    require(layer.weight.allFinite() && layer.bias.allFinite(), "layer parameters must be finite");
    if (l > 0)
      require(layer.weight.cols() == layers[l - 1].weight.rows(), "adjacent layer sizes differ");
  }
  require(layers.back().weight.rows() >= 2, "output layer needs at least two classes");
}

}  // namespace

BnnModel BnnModel::create(int input_dim, int class_count, const Architecture& arch,
                          std::uint64_t seed) {
  const auto dims = layer_dims(input_dim, class_count, arch);
  SequentialRng rng(derive_seed(seed, "init"));
  std::vector<VariationalLinear> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    VariationalLinear layer(dims[l], dims[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (Eigen::Index i = 0; i < layer.mu.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.mu.cols(); ++j)
        layer.mu(i, j) = bound * (2.0 * rng.next_uniform() - 1.0);
    for (Eigen::Index i = 0; i < layer.bias_mu.size(); ++i)
      layer.bias_mu(i) = bound * (2.0 * rng.next_uniform() - 1.0);
    layer.rho.setConstant(arch.init_rho);
    layer.bias_rho.setConstant(arch.init_rho);
    layers.push_back(std::move(layer));
  }
  return BnnModel(std::move(layers), arch.activation, arch.prior);
}

int BnnModel::input_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().in_dim());
}

int BnnModel::class_count() const noexcept {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().out_dim());
}

std::size_t BnnModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += 2 * static_cast<std::size_t>(l.mu.size() + l.bias_mu.size());
  return n;
}

NoiseDraw BnnModel::zero_noise() const {
  NoiseDraw eps;
  for (const auto& l : layers_)
    eps.push_back({Matrix::Zero(l.mu.rows(), l.mu.cols()), Vector::Zero(l.bias_mu.size())});
  return eps;
}

NoiseDraw BnnModel::draw_noise(std::uint64_t key) const {
  const CounterRng rng(key);
  std::uint64_t counter = 0;
  NoiseDraw eps;
  eps.reserve(layers_.size());
  for (const auto& l : layers_) {
    LayerNoise n{Matrix(l.mu.rows(), l.mu.cols()), Vector(l.bias_mu.size())};
    for (Eigen::Index i = 0; i < n.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < n.weight.cols(); ++j) n.weight(i, j) = rng.normal(counter++);
    for (Eigen::Index i = 0; i < n.bias.size(); ++i) n.bias(i) = rng.normal(counter++);
    eps.push_back(std::move(n));
  }
  return eps;
}

std::vector<DenseLayer> BnnModel::sample(const NoiseDraw& eps) const {
  require(eps.size() == layers_.size(), "noise draw has the wrong number of layers");
  std::vector<DenseLayer> out;
  out.reserve(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    out.push_back({sample_weights(layers_[l], eps[l].weight),
                   sample_bias(layers_[l], eps[l].bias)});
  }
  return out;
}

std::vector<DenseLayer> BnnModel::posterior_mean() const {
  std::vector<DenseLayer> out;
  for (const auto& l : layers_) out.push_back({l.mu, l.bias_mu});
  return out;
}

double BnnModel::kl() const {
  double total = 0.0;
  for (const auto& l : layers_) total += kl_layer(l, prior_);
  return total;
}

void BnnModel::validate() const {
  require(!layers_.empty(), "model needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].validate();
    if (l > 0)
      require(layers_[l].in_dim() == layers_[l - 1].out_dim(), "adjacent layer sizes differ");
  }
  require(class_count() >= 2, "output layer needs at least two classes");
  prior_.validate();
}

// ---------------------------------------------------------------------------
// DeterministicMlp

DeterministicMlp::DeterministicMlp(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  validate();
}

DeterministicMlp DeterministicMlp::create(int input_dim, int class_count,
                                          const Architecture& arch, std::uint64_t seed) {
  return from_means(BnnModel::create(input_dim, class_count, arch, seed));
}

DeterministicMlp DeterministicMlp::from_means(const BnnModel& model) {
  return DeterministicMlp(model.posterior_mean(), model.activation());
}

int DeterministicMlp::input_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DeterministicMlp::class_count() const noexcept {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

void DeterministicMlp::validate() const { check_dense_chain(layers_); }

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kRelu: return z > 0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kIdentity: return z;
  }
  return z;
}

// Derivative expressed through the pre-activation z.
double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::kRelu: return z > 0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

Matrix forward_impl(std::span<const DenseLayer> layers, Activation act, const Matrix& x,
                    ForwardCache* cache) {
  require(!layers.empty() && x.cols() == layers.front().weight.cols(),
          "input width does not match the network");
  require(x.allFinite(), "network input must be finite");
  Matrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = a * layers[l].weight.transpose();
    z.rowwise() += layers[l].bias.transpose();
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    if (l + 1 < layers.size()) {
      a = z.unaryExpr([act](double v) { return activate(act, v); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

// Fills grads (dW, db) from d loss / d logits.
void backprop(std::span<const DenseLayer> layers, Activation act, const ForwardCache& cache,
              Matrix delta, std::vector<DenseLayer>& grads) {
  grads.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    grads[l].weight = delta.transpose() * cache.inputs[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * layers[l].weight;
    const Matrix& z = cache.pre[l - 1];
    delta = upstream.cwiseProduct(z.unaryExpr([act](double v) { return activate_grad(act, v); }));
  }
}

void check_targets(std::span<const int> targets, Eigen::Index rows, Eigen::Index classes) {
  require(static_cast<Eigen::Index>(targets.size()) == rows, "target count does not match batch");
  for (int t : targets)
    require(t >= 0 && t < classes, "target " + std::to_string(t) + " out of range [0, " +
                                       std::to_string(classes) + ")");
}

// d NLL / d logits for one draw, scaled by `scale`; floored rows get zero.
Matrix nll_logit_grad(const Matrix& probs, std::span<const int> targets, double scale) {
  Matrix g = probs;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (probs(i, t) < kProbFloor) {
      g.row(i).setZero();
    } else {
      g(i, t) -= 1.0;
    }
  }
  return g * scale;
}

}  // namespace

Matrix forward(std::span<const DenseLayer> layers, Activation activation, const Matrix& x) {
  return forward_impl(layers, activation, x, nullptr);
}

Matrix forward(const DeterministicMlp& mlp, const Matrix& x) {
  return forward_impl(mlp.layers(), mlp.activation(), x, nullptr);
}

Matrix forward_sample(const BnnModel& model, const Matrix& x, const NoiseDraw& eps) {
  const auto layers = model.sample(eps);
  return forward_impl(layers, model.activation(), x, nullptr);
}

Vector forward_sample(const BnnModel& model, std::span<const double> x, const NoiseDraw& eps) {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
  return forward_sample(model, row, eps).row(0).transpose();
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax of an empty vector");
  double max = logits[0];
  for (double v : logits) {
    require(std::isfinite(v), "softmax needs finite logits");
    max = std::max(max, v);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  require(logits.allFinite(), "softmax needs finite logits");
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - max).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

double nll_loss(const Matrix& probs, std::span<const int> targets) {
  require(probs.rows() > 0, "nll of an empty batch");
  check_targets(targets, probs.rows(), probs.cols());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    acc -= std::log(std::max(probs(i, targets[static_cast<std::size_t>(i)]), kProbFloor));
  return acc / static_cast<double>(probs.rows());
}

LossBreakdown elbo_loss(const BnnModel& model, const Matrix& x, std::span<const int> targets,
                        std::span<const NoiseDraw> draws, double kl_weight) {
  require(kl_weight >= 0, "kl_weight must be non-negative");
  require(!draws.empty(), "elbo needs at least one noise draw");
  LossBreakdown out;
  for (const auto& eps : draws) out.nll += nll_loss(softmax_rows(forward_sample(model, x, eps)), targets);
  out.nll /= static_cast<double>(draws.size());
  out.kl = model.kl();
  out.kl_weight = kl_weight;
  out.total = kl_weight * out.kl + out.nll;
  return out;
}

LossBreakdown backward(const BnnModel& model, const Matrix& x, std::span<const int> targets,
                       std::span<const NoiseDraw> draws, double kl_weight, BnnGradients& grads) {
  require(kl_weight >= 0, "kl_weight must be non-negative");
  require(!draws.empty(), "backward needs at least one noise draw");
  check_targets(targets, x.rows(), model.class_count());
  const auto& layers = model.layers();
  grads.assign(layers.size(), {});
  std::vector<Matrix> weight_sigm(layers.size());
  std::vector<Vector> bias_sigm(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    grads[l].mu = Matrix::Zero(layers[l].mu.rows(), layers[l].mu.cols());
    grads[l].rho = Matrix::Zero(layers[l].mu.rows(), layers[l].mu.cols());
    grads[l].bias_mu = Vector::Zero(layers[l].bias_mu.size());
    grads[l].bias_rho = Vector::Zero(layers[l].bias_mu.size());
    weight_sigm[l] = layers[l].rho.unaryExpr([](double r) { return sigmoid(r); });
    bias_sigm[l] = layers[l].bias_rho.unaryExpr([](double r) { return sigmoid(r); });
  }

  LossBreakdown out;
  const double scale = 1.0 / (static_cast<double>(x.rows()) * static_cast<double>(draws.size()));
  std::vector<DenseLayer> dense_grads;
  for (const auto& eps : draws) {
    const auto sampled = model.sample(eps);
    ForwardCache cache;
    const Matrix probs = softmax_rows(forward_impl(sampled, model.activation(), x, &cache));
    out.nll += nll_loss(probs, targets);
    backprop(sampled, model.activation(), cache, nll_logit_grad(probs, targets, scale),
             dense_grads);
    // dw/dmu = 1, dw/drho = eps * sigmoid(rho).
    for (std::size_t l = 0; l < layers.size(); ++l) {
      grads[l].mu += dense_grads[l].weight;
      grads[l].rho += dense_grads[l].weight.cwiseProduct(eps[l].weight).cwiseProduct(weight_sigm[l]);
      grads[l].bias_mu += dense_grads[l].bias;
      grads[l].bias_rho += dense_grads[l].bias.cwiseProduct(eps[l].bias).cwiseProduct(bias_sigm[l]);
    }
  }
  out.nll /= static_cast<double>(draws.size());
  out.kl = model.kl();
  out.kl_weight = kl_weight;
  out.total = kl_weight * out.kl + out.nll;

  if (kl_weight > 0) {
    const auto& prior = model.prior();
    const double inv_var = 1.0 / (prior.std * prior.std);
    // dKL/dmu = (mu - m_p) / s_p^2 ; dKL/dsigma = -1/sigma + sigma / s_p^2.
    auto dsigma = [inv_var](double rho) {
      const double s = softplus(rho);
      return (-1.0 / s + s * inv_var) * sigmoid(rho);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      grads[l].mu += kl_weight * inv_var * (layers[l].mu.array() - prior.mean).matrix();
      grads[l].rho += kl_weight * layers[l].rho.unaryExpr(dsigma);
      grads[l].bias_mu += kl_weight * inv_var * (layers[l].bias_mu.array() - prior.mean).matrix();
      grads[l].bias_rho += kl_weight * layers[l].bias_rho.unaryExpr(dsigma);
    }
  }
  return out;
}

double mlp_loss(const DeterministicMlp& mlp, const Matrix& x, std::span<const int> targets) {
  return nll_loss(softmax_rows(forward(mlp, x)), targets);
}

double mlp_backward(const DeterministicMlp& mlp, const Matrix& x, std::span<const int> targets,
                    MlpGradients& grads) {
  check_targets(targets, x.rows(), mlp.class_count());
  ForwardCache cache;
  const Matrix probs = softmax_rows(forward_impl(mlp.layers(), mlp.activation(), x, &cache));
  backprop(mlp.layers(), mlp.activation(), cache,
           nll_logit_grad(probs, targets, 1.0 / static_cast<double>(x.rows())), grads);
  return nll_loss(probs, targets);
}

}  // namespace uabnn
