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

// Dataset CSV + sidecar manifest.
//
//   foo.csv             header: <feature names...>,label ; one row per sample
//   foo.manifest.json   {"classes": {"0": "NoFault", ...},
//                        "scaler": {"mean": [...], "std": [...]} | null}
//
// When the manifest carries a scaler, the CSV values are already standardised.

#include <charconv>
#include <json.hpp>

#include "text.hpp"
#include "uabnn/error.hpp"
#include "uabnn/features.hpp"

namespace uabnn {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

json manifest_json(const Dataset& d) {
  json classes = json::object();
  for (const auto& [id, name] : d.class_names) classes[std::to_string(id)] = name;
  json m;
  m["classes"] = classes;
  if (d.scaler) {
    m["scaler"] = {{"mean", d.scaler->mean}, {"std", d.scaler->std}};
  } else {
    m["scaler"] = nullptr;
  }
  return m;
}

struct Manifest {
  std::map<int, std::string> classes;
  std::optional<Scaler> scaler;
};

Manifest read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw IoError("dataset manifest '" + path.string() + "' not found");
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what(), 1);
  }
  Manifest m;
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_object())
    throw ParseError("manifest needs a \"classes\" object", 1);
  for (const auto& [key, value] : j["classes"].items()) {
    auto id = parse_int(key);
    if (!id || !value.is_string())
      throw ParseError("manifest class entry '" + key + "' must map an integer id to a name", 1);
    m.classes[*id] = value.get<std::string>();
  }
  if (j.contains("scaler") && !j["scaler"].is_null()) {
    try {
      Scaler s;
      s.mean = j["scaler"].at("mean").get<std::vector<double>>();
      s.std = j["scaler"].at("std").get<std::vector<double>>();
      m.scaler = std::move(s);
    } catch (const json::exception& e) {
      throw ParseError(std::string("manifest scaler is malformed: ") + e.what(), 1);
    }
  }
  return m;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".manifest.json");
  return p;
}

void dataset_to_csv(const Dataset& d, const std::filesystem::path& path) {
  d.validate();
  std::string body;
  const auto names = d.feature_names.empty() ? feature_names(static_cast<int>(d.cols()) - 5)
                                             : d.feature_names;
  for (const auto& n : names) {
    body += n;
    body += ',';
  }
  body += "label\n";
  for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.features.cols(); ++c) {
      body += detail::format_double(d.features(r, c));
      body += ',';
    }
    body += std::to_string(d.labels[static_cast<std::size_t>(r)]);
    body += '\n';
  }
  detail::write_file(path, body);
  detail::write_file(manifest_path(path), manifest_json(d).dump(2) + "\n");
}

Dataset dataset_from_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("dataset '" + path.string() + "' not found");
  const std::string text = detail::read_file(path);
  auto lines = detail::split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("dataset file is empty; a header row is required", 1);

  const auto header = detail::split(trim(lines[0]), ',');
  if (header.size() < 2 || trim(header.back()) != "label")
    throw ParseError("header must list feature names followed by 'label'", 1);
  const std::size_t width = header.size() - 1;

  const Manifest manifest = read_manifest(manifest_path(path));

  Dataset d;
  d.class_names = manifest.classes;
  d.scaler = manifest.scaler;
  for (std::size_t c = 0; c < width; ++c) d.feature_names.emplace_back(trim(header[c]));
  d.features.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(width));
  d.labels.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const auto cells = detail::split(trim(lines[li]), ',');
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    for (std::size_t c = 0; c < width; ++c) {
      auto v = detail::parse_double(cells[c]);
      if (!v) throw ParseError("malformed number '" + std::string(cells[c]) + "'", line_no);
      d.features(static_cast<Eigen::Index>(li - 1), static_cast<Eigen::Index>(c)) = *v;
    }
    auto label = parse_int(cells.back());
    if (!label) throw ParseError("malformed label '" + std::string(cells.back()) + "'", line_no);
    if (!d.class_names.count(*label))
      throw ParseError("label id " + std::to_string(*label) + " is not listed in the manifest",
                       line_no);
    d.labels.push_back(*label);
  }
  if (d.scaler && (d.scaler->size() != width || d.scaler->std.size() != width))
    throw ParseError("manifest scaler width does not match the CSV columns", 1);
  try {
    d.validate();
  } catch (const ContractViolation& e) {
    throw ParseError(e.what(), 1);
  }
  return d;
}

}  // namespace uabnn
