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

#ifndef UABNN_SRC_CONFIG_UTIL_HPP_
#define UABNN_SRC_CONFIG_UTIL_HPP_

#include <json.hpp>
#include <set>
#include <string>

#include "uabnn/error.hpp"

namespace uabnn::detail {

// Reads optional keys from a JSON object and reports leftovers.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError("'" + section_ + "' must be a JSON object");
  }

  template <typename T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return false;
    try {
      // get_to keeps the current value as the base, so nested objects
      // override only the keys they name.
      it->get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("'" + section_ + "." + key + "' has the wrong type: " + e.what());
    }
    return true;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + section_ + "." + key + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace uabnn::detail

#endif  // UABNN_SRC_CONFIG_UTIL_HPP_
