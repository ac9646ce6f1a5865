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

#ifndef BLR_AUTOTUNE_HPP_
#define BLR_AUTOTUNE_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "blr/exec.hpp"
#include "blr/formats.hpp"
#include "blr/tile.hpp"

namespace blr {

struct TuneRecord {
  TileConfig tile;
  double time_s = 0.0;
};

struct TuneResult {
  TileConfig best;
  // Candidates in sweep order; empty when served from the cache.
  std::vector<TuneRecord> sweep;
  bool cached = false;
  // Largest |y_candidate - y_first| seen during the sweep.
  float max_output_deviation = 0.0f;
};

struct TuneKey {
  PathId path;
  Method method;
  std::size_t n, i, o, r, b;
  std::size_t scratch_bytes;
  OutputMode mode;

  auto operator<=>(const TuneKey&) const = default;
};

TuneKey make_tune_key(PathId path, const WorkloadSpec& spec,
                      std::size_t scratch_bytes, OutputMode mode);

// Sweep set: t_n, t_r, t_p each in {16, 64}, t_q = t_r, ascending t_n, then
// t_r, then t_p.
std::vector<TileConfig> default_tile_candidates();

// Candidates whose largest task fits the scratch budget.
std::vector<TileConfig> legal_candidates(PathId path, const WorkloadSpec& spec,
                                         std::size_t scratch_bytes,
                                         const std::vector<TileConfig>& from);

class Autotuner {
 public:
  using Runner = std::function<ForwardResult(const TileConfig&)>;

  explicit Autotuner(std::vector<TileConfig> candidates =
                         default_tile_candidates());

  // Runs every legal candidate once and keeps the fastest (first seen on
  // ties). Results are cached per key. Throws ScratchBudgetError when no
  // candidate is legal.
  TuneResult tune(PathId path, const WorkloadSpec& spec,
                  std::size_t scratch_bytes, OutputMode mode,
                  const Runner& run);

  std::size_t cache_size() const { return cache_.size(); }
  void clear() { cache_.clear(); }

 private:
  std::vector<TileConfig> candidates_;
  std::map<TuneKey, TileConfig> cache_;
};

}  // namespace blr

#endif  // BLR_AUTOTUNE_HPP_
