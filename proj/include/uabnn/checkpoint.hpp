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

// Model checkpoints are single JSON documents. Every double is written as a
// JSON number in shortest round-trip decimal form, so loading reproduces each
// parameter bit-for-bit. Matrices are stored row-major as nested arrays.
//
//   {"format": "uabnn-checkpoint", "version": 1,
//    "kind": "bnn" | "deterministic",
//    "input_dim": D, "class_count": C, "hidden": [...], "activation": "relu",
//    "prior": {"mean": 0, "std": 1},
//    "layers": [{"mu": [[..]], "rho": [[..]], "bias_mu": [..], "bias_rho": [..]}]
//              (deterministic: [{"weight": [[..]], "bias": [..]}]),
//    "class_ids": [...], "class_names": {"0": "NoFault", ...},
//    "feature_names": [...], "scaler": {"mean": [...], "std": [...]} | null,
//    "train_config": {...}, "seed": ...}

#ifndef UABNN_CHECKPOINT_HPP_
#define UABNN_CHECKPOINT_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uabnn/bnn.hpp"
#include "uabnn/features.hpp"
#include "uabnn/train.hpp"

namespace uabnn {

struct Checkpoint {
  std::variant<BnnModel, DeterministicMlp> model;
  std::vector<int> class_ids;  // output index -> class id
  std::map<int, std::string> class_names;
  std::vector<std::string> feature_names;
  std::optional<Scaler> scaler;
  TrainConfig train_config;

  bool is_bnn() const noexcept { return std::holds_alternative<BnnModel>(model); }
  int input_dim() const;
  int class_count() const;
};

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace uabnn

#endif  // UABNN_CHECKPOINT_HPP_
