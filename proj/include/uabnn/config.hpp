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

// JSON forms of the configuration structs. Readers start from the defaults,
// accept any subset of keys and reject unknown ones with ConfigError.

#ifndef UABNN_CONFIG_HPP_
#define UABNN_CONFIG_HPP_

#include <json.hpp>

#include "uabnn/bnn.hpp"
#include "uabnn/signal.hpp"
#include "uabnn/train.hpp"

namespace uabnn {

void to_json(nlohmann::json& j, const SignalConfig& c);
void from_json(const nlohmann::json& j, SignalConfig& c);

void to_json(nlohmann::json& j, const GaussianPrior& p);
void from_json(const nlohmann::json& j, GaussianPrior& p);

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Parses text as JSON, mapping syntax errors to ConfigError.
nlohmann::json parse_config_text(std::string_view text, std::string_view what);

}  // namespace uabnn

#endif  // UABNN_CONFIG_HPP_
