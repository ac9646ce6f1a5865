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

#include "blr/autotune.hpp"

#include <algorithm>

#include "blr/error.hpp"

namespace blr {

TuneKey make_tune_key(PathId path, const WorkloadSpec& spec,
                      std::size_t scratch_bytes, OutputMode mode) {
  return {path,   spec.method, spec.n,        spec.i, spec.o,
          spec.r, spec.b,      scratch_bytes, mode};
}

std::vector<TileConfig> default_tile_candidates() {
  std::vector<TileConfig> out;
  for (std::size_t tn : {16, 64}) {
    for (std::size_t tr : {16, 64}) {
      for (std::size_t tp : {16, 64}) out.push_back({tn, tr, tp, tr});
    }
  }
  return out;
}

std::vector<TileConfig> legal_candidates(PathId path, const WorkloadSpec& spec,
                                         std::size_t scratch_bytes,
                                         const std::vector<TileConfig>& from) {
  std::vector<TileConfig> out;
  for (const TileConfig& tile : from) {
    tile.validate();
    if (required_scratch_elements(path, spec, tile) * kScratchElementBytes <=
        scratch_bytes) {
      out.push_back(tile);
    }
  }
  return out;
}

Autotuner::Autotuner(std::vector<TileConfig> candidates)
    : candidates_(std::move(candidates)) {}

TuneResult Autotuner::tune(PathId path, const WorkloadSpec& spec,
                           std::size_t scratch_bytes, OutputMode mode,
                           const Runner& run) {
  const TuneKey key = make_tune_key(path, spec, scratch_bytes, mode);
  TuneResult result;
  if (auto it = cache_.find(key); it != cache_.end()) {
    result.best = it->second;
    result.cached = true;
    return result;
  }
  const auto legal = legal_candidates(path, spec, scratch_bytes, candidates_);
  if (legal.empty()) {
    std::size_t smallest = 0;
    for (const TileConfig& tile : candidates_) {
      const std::size_t need =
          required_scratch_elements(path, spec, tile) * kScratchElementBytes;
      smallest = smallest == 0 ? need : std::min(smallest, need);
    }
    throw ScratchBudgetError("no legal tile configuration for " +
                                 std::string(path_name(path)) + " " +
                                 spec.to_string(),
                             smallest, scratch_bytes);
  }
  Tensor first;
  double best_time = 0.0;
  for (const TileConfig& tile : legal) {
    ForwardResult run_result = run(tile);
    if (result.sweep.empty()) {
      first = std::move(run_result.y);
      best_time = run_result.wall_time_s;
      result.best = tile;
    } else {
      result.max_output_deviation = std::max(
          result.max_output_deviation, max_abs_diff(run_result.y, first));
      if (run_result.wall_time_s < best_time) {
        best_time = run_result.wall_time_s;
        result.best = tile;
      }
    }
    result.sweep.push_back({tile, run_result.wall_time_s});
  }
  cache_.emplace(key, result.best);
  return result;
}

}  // namespace blr
