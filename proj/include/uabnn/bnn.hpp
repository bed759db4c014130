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

// Mean-field Gaussian Bayesian MLP trained by Bayes-by-Backprop, plus the
// point-estimate MLP it is compared against.
//
// Each weight w = mu + softplus(rho) * eps with eps ~ N(0, 1). Gradients with
// respect to (mu, rho) flow through that transform for a fixed eps draw, so the
// loss is an ordinary differentiable function of the variational parameters
// once the draw is fixed.

#ifndef UABNN_BNN_HPP_
#define UABNN_BNN_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "uabnn/rng.hpp"

namespace uabnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Floor applied to probabilities before taking logs in the NLL.
inline constexpr double kProbFloor = 1e-12;

double softplus(double rho) noexcept;
double sigmoid(double x) noexcept;
// Inverse of softplus, for building layers with a given sigma.
double softplus_inverse(double sigma);

enum class Activation { kRelu, kTanh, kIdentity };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

struct GaussianPrior {
  double mean = 0.0;
  double std = 1.0;

  void validate() const;
};

struct VariationalLinear {
  Matrix mu;   // out x in
  Matrix rho;  // out x in, sigma = softplus(rho)
  Vector bias_mu;
  Vector bias_rho;

  VariationalLinear() = default;
  VariationalLinear(Eigen::Index in_dim, Eigen::Index out_dim);

  Eigen::Index in_dim() const noexcept { return mu.cols(); }
  Eigen::Index out_dim() const noexcept { return mu.rows(); }
  Matrix weight_sigma() const;
  Vector bias_sigma() const;
  void validate() const;
};

// Standard-normal draws for one layer, shaped like the layer.
struct LayerNoise {
  Matrix weight;
  Vector bias;
};
using NoiseDraw = std::vector<LayerNoise>;

Matrix sample_weights(const VariationalLinear& layer, const Matrix& eps);
Vector sample_bias(const VariationalLinear& layer, const Vector& eps);

// Closed-form KL(q || prior) summed over every weight and bias of the layer.
double kl_layer(const VariationalLinear& layer, const GaussianPrior& prior);

struct Architecture {
  std::vector<int> hidden = {32, 32};
  Activation activation = Activation::kRelu;
  double init_rho = -3.0;
  GaussianPrior prior;

  void validate() const;
};

// A concrete (sampled or deterministic) dense layer.
struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

class BnnModel {
 public:
  BnnModel() = default;
  BnnModel(std::vector<VariationalLinear> layers, Activation activation, GaussianPrior prior);

  // mu ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases,
  // rho = architecture.init_rho.
  static BnnModel create(int input_dim, int class_count, const Architecture& architecture,
                         std::uint64_t seed);

  const std::vector<VariationalLinear>& layers() const noexcept { return layers_; }
  std::vector<VariationalLinear>& mutable_layers() noexcept { return layers_; }
  Activation activation() const noexcept { return activation_; }
  const GaussianPrior& prior() const noexcept { return prior_; }
  int input_dim() const noexcept;
  int class_count() const noexcept;
  std::size_t parameter_count() const noexcept;

  NoiseDraw zero_noise() const;
  // eps for draw `key`: weights row-major then bias, layer by layer, at
  // consecutive counters of CounterRng(key).
  NoiseDraw draw_noise(std::uint64_t key) const;
  std::vector<DenseLayer> sample(const NoiseDraw& eps) const;
  std::vector<DenseLayer> posterior_mean() const;

  double kl() const;
  // Throws ContractViolation on shape errors or non-finite parameters.
  void validate() const;

 private:
  std::vector<VariationalLinear> layers_;
  Activation activation_ = Activation::kRelu;
  GaussianPrior prior_;
};

class DeterministicMlp {
 public:
  DeterministicMlp() = default;
  DeterministicMlp(std::vector<DenseLayer> layers, Activation activation);

  static DeterministicMlp create(int input_dim, int class_count, const Architecture& architecture,
                                 std::uint64_t seed);
  // Weights set to the posterior means of `model`.
  static DeterministicMlp from_means(const BnnModel& model);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }
  Activation activation() const noexcept { return activation_; }
  int input_dim() const noexcept;
  int class_count() const noexcept;
  void validate() const;

 private:
  std::vector<DenseLayer> layers_;
  Activation activation_ = Activation::kRelu;
};

// Rows of x are samples. Hidden layers use the activation, the last is linear.
Matrix forward(std::span<const DenseLayer> layers, Activation activation, const Matrix& x);
Matrix forward(const DeterministicMlp& mlp, const Matrix& x);
Matrix forward_sample(const BnnModel& model, const Matrix& x, const NoiseDraw& eps);
Vector forward_sample(const BnnModel& model, std::span<const double> x, const NoiseDraw& eps);

std::vector<double> softmax(std::span<const double> logits);
// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

// Mean of -log(max(p[i, target_i], kProbFloor)). Targets are output indices.
double nll_loss(const Matrix& probs, std::span<const int> targets);

struct LossBreakdown {
  double total = 0.0;
  double kl = 0.0;   // unweighted
  double nll = 0.0;  // averaged over draws
  double kl_weight = 0.0;
};

// kl_weight * KL + mean over draws of the batch NLL.
LossBreakdown elbo_loss(const BnnModel& model, const Matrix& x, std::span<const int> targets,
                        std::span<const NoiseDraw> draws, double kl_weight);

struct LayerGradients {
  Matrix mu;
  Matrix rho;
  Vector bias_mu;
  Vector bias_rho;
};
using BnnGradients = std::vector<LayerGradients>;

// Pathwise gradient of elbo_loss for the same draws. Returns the loss.
LossBreakdown backward(const BnnModel& model, const Matrix& x, std::span<const int> targets,
                       std::span<const NoiseDraw> draws, double kl_weight, BnnGradients& grads);

using MlpGradients = std::vector<DenseLayer>;

double mlp_loss(const DeterministicMlp& mlp, const Matrix& x, std::span<const int> targets);
double mlp_backward(const DeterministicMlp& mlp, const Matrix& x, std::span<const int> targets,
                    MlpGradients& grads);

}  // namespace uabnn

#endif  // UABNN_BNN_HPP_
