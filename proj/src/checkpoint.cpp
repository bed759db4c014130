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

#include "uabnn/checkpoint.hpp"

#include <charconv>

#include "text.hpp"
#include "uabnn/config.hpp"
#include "uabnn/error.hpp"

namespace uabnn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "uabnn-checkpoint";
constexpr int kVersion = 1;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ParseError(std::string("checkpoint field '") + what + "' must be a nested array", 1);
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size())
      throw ParseError(std::string("checkpoint field '") + what + "' is ragged", 1);
    for (std::size_t k = 0; k < j[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array())
    throw ParseError(std::string("checkpoint field '") + what + "' must be an array", 1);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

std::vector<int> hidden_of(const std::vector<Eigen::Index>& outs) {
  std::vector<int> h;
  for (std::size_t i = 0; i + 1 < outs.size(); ++i) h.push_back(static_cast<int>(outs[i]));
  return h;
}

}  // namespace

int Checkpoint::input_dim() const {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

int Checkpoint::class_count() const {
  return std::visit([](const auto& m) { return m.class_count(); }, model);
}

std::string checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["input_dim"] = c.input_dim();
  j["class_count"] = c.class_count();
  json layers = json::array();
  std::vector<Eigen::Index> outs;
  if (const auto* bnn = std::get_if<BnnModel>(&c.model)) {
    j["kind"] = "bnn";
    j["activation"] = activation_name(bnn->activation());
    j["prior"] = bnn->prior();
    for (const auto& l : bnn->layers()) {
      outs.push_back(l.out_dim());
      layers.push_back({{"mu", matrix_json(l.mu)},
                        {"rho", matrix_json(l.rho)},
                        {"bias_mu", vector_json(l.bias_mu)},
                        {"bias_rho", vector_json(l.bias_rho)}});
    }
  } else {
    const auto& mlp = std::get<DeterministicMlp>(c.model);
    j["kind"] = "deterministic";
    j["activation"] = activation_name(mlp.activation());
    j["prior"] = nullptr;
    for (const auto& l : mlp.layers()) {
      outs.push_back(l.weight.rows());
      layers.push_back({{"weight", matrix_json(l.weight)}, {"bias", vector_json(l.bias)}});
    }
  }
  j["hidden"] = hidden_of(outs);
  j["layers"] = std::move(layers);
  j["class_ids"] = c.class_ids;
  json names = json::object();
  for (const auto& [id, name] : c.class_names) names[std::to_string(id)] = name;
  j["class_names"] = names;
  j["feature_names"] = c.feature_names;
  if (c.scaler) {
    j["scaler"] = {{"mean", c.scaler->mean}, {"std", c.scaler->std}};
  } else {
    j["scaler"] = nullptr;
  }
  j["train_config"] = c.train_config;
  j["seed"] = c.train_config.seed;
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), 1);
  }
  try {
    if (j.value("format", "") != kFormat) throw ParseError("not a uabnn checkpoint", 1);
    if (j.at("version").get<int>() != kVersion)
      throw ParseError("unsupported checkpoint version", 1);
    const std::string kind = j.at("kind").get<std::string>();
    const Activation act = parse_activation(j.at("activation").get<std::string>());
    Checkpoint c;
    if (kind == "bnn") {
      std::vector<VariationalLinear> layers;
      for (const auto& lj : j.at("layers")) {
        VariationalLinear l;
        l.mu = matrix_from(lj.at("mu"), "mu");
        l.rho = matrix_from(lj.at("rho"), "rho");
        l.bias_mu = vector_from(lj.at("bias_mu"), "bias_mu");
        l.bias_rho = vector_from(lj.at("bias_rho"), "bias_rho");
        layers.push_back(std::move(l));
      }
      c.model = BnnModel(std::move(layers), act, j.at("prior").get<GaussianPrior>());
    } else if (kind == "deterministic") {
      std::vector<DenseLayer> layers;
      for (const auto& lj : j.at("layers"))
        layers.push_back({matrix_from(lj.at("weight"), "weight"), vector_from(lj.at("bias"), "bias")});
      c.model = DeterministicMlp(std::move(layers), act);
    } else {
      throw ParseError("unknown checkpoint kind '" + kind + "'", 1);
    }
    c.class_ids = j.at("class_ids").get<std::vector<int>>();
    for (const auto& [key, value] : j.at("class_names").items()) {
      int id = 0;
      auto res = std::from_chars(key.data(), key.data() + key.size(), id);
      if (res.ec != std::errc() || res.ptr != key.data() + key.size())
        throw ParseError("class name key '" + key + "' is not an integer", 1);
      c.class_names[id] = value.get<std::string>();
    }
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("scaler").is_null()) {
      Scaler s;
      s.mean = j["scaler"].at("mean").get<std::vector<double>>();
      s.std = j["scaler"].at("std").get<std::vector<double>>();
      c.scaler = std::move(s);
    }
    c.train_config = j.at("train_config").get<TrainConfig>();
    if (static_cast<int>(c.class_ids.size()) != c.class_count())
      throw ParseError("class_ids length does not match the output layer", 1);
    if (c.scaler && static_cast<int>(c.scaler->size()) != c.input_dim())
      throw ParseError("scaler width does not match the input layer", 1);
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint is malformed: ") + e.what(), 1);
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("checkpoint is inconsistent: ") + e.what(), 1);
  }
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  detail::write_file(path, checkpoint_to_json(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint '" + path.string() + "' not found");
  return checkpoint_from_json(detail::read_file(path));
}

}  // namespace uabnn
