/* Copyright 2026 The BLR Kernels Authors.

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

#include "blr/config.hpp"

#include <cstdlib>
#include <set>

#include "blr/error.hpp"
#include "blr/text.hpp"

#ifndef BLR_DATA_DIR
#define BLR_DATA_DIR "data"
#endif

namespace blr {

WorkloadSpec LayerConfig::spec(std::optional<std::size_t> n_override) const {
  return {method, n_override.value_or(n), i, o, r, b};
}

std::vector<LayerConfig> parse_layer_configs(std::string_view text,
                                             const std::string& source) {
  static const std::set<std::string> required = {"model", "layer", "i",
                                                 "o",     "method", "r"};
  std::vector<LayerConfig> out;
  for (const Record& record : parse_records(text, source)) {
    const std::size_t line = record.line;
    LayerConfig cfg;
    std::set<std::string> seen;
    for (const auto& [key, value] : record.fields) {
      if (!seen.insert(key).second) {
        throw ParseError(source, line, "duplicate key '" + key + "'");
      }
      if (key == "model") {
        cfg.model = value;
      } else if (key == "layer") {
        cfg.layer = value;
      } else if (key == "i") {
        cfg.i = parse_size(value, source, line);
      } else if (key == "o") {
        cfg.o = parse_size(value, source, line);
      } else if (key == "method") {
        const auto m = parse_method(value);
        if (!m) throw ParseError(source, line, "method: unknown '" + value + "'");
        cfg.method = *m;
      } else if (key == "r") {
        cfg.r = parse_size(value, source, line);
      } else if (key == "b") {
        cfg.b = parse_size(value, source, line);
      } else if (key == "count") {
        cfg.count = parse_size(value, source, line);
      } else if (key == "n") {
        cfg.n = parse_size(value, source, line);
      } else if (key == "bench") {
        cfg.bench = parse_bool(value, source, line);
      } else {
        throw ParseError(source, line, "unknown key '" + key + "'");
      }
    }
    for (const auto& key : required) {
      if (!seen.contains(key)) {
        throw ParseError(source, line, "missing key '" + key + "'");
      }
    }
    if (cfg.n == 0) throw ParseError(source, line, "n: must be at least 1");
    if (cfg.count == 0) throw ParseError(source, line, "count: must be at least 1");
    try {
      cfg.spec().validate();
    } catch (const ShapeError& e) {
      throw ParseError(source, line, e.what());
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

std::vector<LayerConfig> load_layer_configs(const std::filesystem::path& path) {
  return parse_layer_configs(read_text_file(path), path.string());
}

std::vector<ModelParams> parse_model_params(std::string_view text,
                                            const std::string& source) {
  std::vector<ModelParams> out;
  for (const Record& record : parse_records(text, source)) {
    ModelParams params;
    for (const auto& [key, value] : record.fields) {
      if (key == "model") {
        params.model = value;
      } else if (key == "total_params") {
        params.total_params = parse_size(value, source, record.line);
      } else if (key == "reported_cf") {
        params.reported_cf = parse_double(value, source, record.line);
      } else {
        throw ParseError(source, record.line, "unknown key '" + key + "'");
      }
    }
    if (params.model.empty() || params.total_params == 0) {
      throw ParseError(source, record.line, "needs model and total_params");
    }
    out.push_back(std::move(params));
  }
  return out;
}

std::vector<ModelParams> load_model_params(const std::filesystem::path& path) {
  return parse_model_params(read_text_file(path), path.string());
}

double model_compression_factor(const std::vector<LayerConfig>& configs,
                                const ModelParams& model, Method method) {
  std::uint64_t dense = 0, structured = 0;
  for (const LayerConfig& cfg : configs) {
    if (cfg.model != model.model || cfg.method != method) continue;
    dense += cfg.count * cfg.i * cfg.o;
    structured += cfg.count * param_count(cfg.spec());
  }
  if (dense == 0) {
    throw ShapeError("no " + std::string(method_name(method)) +
                     " layers configured for " + model.model);
  }
  if (dense > model.total_params) {
    throw ShapeError("configured layers of " + model.model +
                     " exceed its total parameter count");
  }
  const double remaining =
      static_cast<double>(model.total_params - dense) +
      static_cast<double>(structured);
  return static_cast<double>(model.total_params) / remaining;
}

double layer_compression_factor(const std::vector<LayerConfig>& configs,
                                const std::string& model, Method method) {
  std::uint64_t dense = 0, structured = 0;
  for (const LayerConfig& cfg : configs) {
    if (cfg.model != model || cfg.method != method) continue;
    dense += cfg.count * cfg.i * cfg.o;
    structured += cfg.count * param_count(cfg.spec());
  }
  if (dense == 0) {
    throw ShapeError("no " + std::string(method_name(method)) +
                     " layers configured for " + model);
  }
  return static_cast<double>(dense) / static_cast<double>(structured);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("BLR_DATA_DIR"); env && *env) return env;
  return BLR_DATA_DIR;
}

namespace {

bool is_bare_name(const std::string& name) {
  return name.find('/') == std::string::npos &&
         std::filesystem::path(name).extension().empty();
}

}  // namespace

std::filesystem::path resolve_config_path(const std::string& name) {
  if (name == "default") return data_dir() / "configs" / "layers.cfg";
  if (is_bare_name(name)) return data_dir() / "configs" / (name + ".cfg");
  return name;
}

std::filesystem::path resolve_profile_path(const std::string& name) {
  if (is_bare_name(name)) return data_dir() / "profiles" / (name + ".profile");
  return name;
}

}  // namespace blr
