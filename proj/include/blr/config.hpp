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

#ifndef BLR_CONFIG_HPP_
#define BLR_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blr/formats.hpp"

namespace blr {

// One replaced layer type of a model. Record keys: model, layer, i, o,
// method, r, b, count, n, bench.
struct LayerConfig {
  std::string model;
  std::string layer;
  std::size_t i = 0;
  std::size_t o = 0;
  Method method = Method::low_rank;
  std::size_t r = 0;
  std::size_t b = 1;
  std::size_t count = 1;  // occurrences in the model
  std::size_t n = 1;      // benchmark sequence length
  bool bench = true;

  WorkloadSpec spec(std::optional<std::size_t> n_override = {}) const;
};

// Throws ParseError naming the line and, for invalid values, the field.
std::vector<LayerConfig> parse_layer_configs(std::string_view text,
                                             const std::string& source);
std::vector<LayerConfig> load_layer_configs(const std::filesystem::path& path);

// Whole-model parameter totals used for compression factors. Record keys:
// model, total_params, reported_cf.
struct ModelParams {
  std::string model;
  std::uint64_t total_params = 0;
  double reported_cf = 0.0;
};

std::vector<ModelParams> parse_model_params(std::string_view text,
                                            const std::string& source);
std::vector<ModelParams> load_model_params(const std::filesystem::path& path);

// Dense parameters over parameters after replacing every configured layer
// of `model` that uses `method`:
//   total / (total - sum count*i*o + sum count*param_count(row)).
double model_compression_factor(const std::vector<LayerConfig>& configs,
                                const ModelParams& model, Method method);

// Count-weighted dense over structured parameters of the configured layers:
//   sum count*i*o / sum count*param_count(row).
double layer_compression_factor(const std::vector<LayerConfig>& configs,
                                const std::string& model, Method method);

// Root of the shipped data directory (configs/, profiles/). The
// BLR_DATA_DIR environment variable overrides the built-in location.
std::filesystem::path data_dir();

// "default" resolves to the shipped layer table; a bare name without a
// path separator or extension resolves inside data_dir().
std::filesystem::path resolve_config_path(const std::string& name);
std::filesystem::path resolve_profile_path(const std::string& name);

}  // namespace blr

#endif  // BLR_CONFIG_HPP_
