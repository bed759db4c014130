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

#include "uabnn/config.hpp"

#include "config_util.hpp"
#include "uabnn/error.hpp"

namespace uabnn {

using nlohmann::json;

json parse_config_text(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

void to_json(json& j, const SignalConfig& c) {
  j = json{{"sample_rate_hz", c.sample_rate_hz},
           {"duration_s", c.duration_s},
           {"shaft_freq_hz", c.shaft_freq_hz},
           {"gear_mesh_freq_hz", c.gear_mesh_freq_hz},
           {"n_harmonics", c.n_harmonics},
           {"harmonic_amplitudes", c.harmonic_amplitudes},
           {"base_noise_std", c.base_noise_std},
           {"seed", c.seed}};
}

void from_json(const json& j, SignalConfig& c) {
  detail::ObjectReader r(j, "signal");
  r.get("sample_rate_hz", c.sample_rate_hz);
  r.get("duration_s", c.duration_s);
  r.get("shaft_freq_hz", c.shaft_freq_hz);
  r.get("gear_mesh_freq_hz", c.gear_mesh_freq_hz);
  r.get("n_harmonics", c.n_harmonics);
  r.get("harmonic_amplitudes", c.harmonic_amplitudes);
  r.get("base_noise_std", c.base_noise_std);
  r.get("seed", c.seed);
  r.finish();
}

void to_json(json& j, const GaussianPrior& p) { j = json{{"mean", p.mean}, {"std", p.std}}; }

void from_json(const json& j, GaussianPrior& p) {
  detail::ObjectReader r(j, "prior");
  r.get("mean", p.mean);
  r.get("std", p.std);
  r.finish();
}

void to_json(json& j, const Architecture& a) {
  j = json{{"hidden", a.hidden},
           {"activation", activation_name(a.activation)},
           {"init_rho", a.init_rho},
           {"prior", a.prior}};
}

void from_json(const json& j, Architecture& a) {
  detail::ObjectReader r(j, "architecture");
  r.get("hidden", a.hidden);
  std::string act(activation_name(a.activation));
  r.get("activation", act);
  a.activation = parse_activation(act);
  r.get("init_rho", a.init_rho);
  r.get("prior", a.prior);
  r.finish();
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"mc_train_samples", c.mc_train_samples},
           {"kl_weighting", kl_weighting_name(c.kl_weighting)},
           {"kl_beta", c.kl_beta},
           {"seed", c.seed},
           {"optimizer", optimizer_name(c.optimizer)},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_epsilon", c.adam_epsilon}};
}

void from_json(const json& j, TrainConfig& c) {
  detail::ObjectReader r(j, "train");
  r.get("epochs", c.epochs);
  r.get("batch_size", c.batch_size);
  r.get("learning_rate", c.learning_rate);
  r.get("mc_train_samples", c.mc_train_samples);
  std::string kl(kl_weighting_name(c.kl_weighting));
  r.get("kl_weighting", kl);
  c.kl_weighting = parse_kl_weighting(kl);
  r.get("kl_beta", c.kl_beta);
  r.get("seed", c.seed);
  std::string opt(optimizer_name(c.optimizer));
  r.get("optimizer", opt);
  c.optimizer = parse_optimizer(opt);
  r.get("adam_beta1", c.adam_beta1);
  r.get("adam_beta2", c.adam_beta2);
  r.get("adam_epsilon", c.adam_epsilon);
  r.finish();
}

}  // namespace uabnn
