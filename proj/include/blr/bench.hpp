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

#ifndef BLR_BENCH_HPP_
#define BLR_BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "blr/autotune.hpp"
#include "blr/config.hpp"
#include "blr/counters.hpp"
#include "blr/exec.hpp"
#include "blr/roofline.hpp"

namespace blr {

struct BenchOptions {
  std::vector<PathId> paths{all_paths().begin(), all_paths().end()};
  std::size_t warmups = 10;
  std::size_t repeats = 50;
  std::uint64_t seed = 0;
  std::size_t scratch_bytes = kDefaultScratchBytes;
  std::size_t elem_bytes = 2;
  std::optional<std::size_t> n_override;
  double oracle_tolerance = 1e-4;
  // Output columns compared against the reference per row.
  std::size_t oracle_columns = 64;
  // Also run rows marked bench=false.
  bool include_disabled = false;
  // Candidate tiles for the autotuner; empty means default_tile_candidates().
  std::vector<TileConfig> tile_candidates;

  // Throws ShapeError for W < 1 or R < 3.
  void validate() const;
};

struct TimingStats {
  double median_s = 0.0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

TimingStats summarize_times(std::vector<double> times);

struct BenchRow {
  std::string model;
  std::string layer;
  PathId path = PathId::dense;
  WorkloadSpec spec;
  TileConfig tile;
  TimingStats timing;
  Counters counters;
  CostReport cost;
  std::optional<double> speedup_vs_dense;
  // 1 - counted intermediate bytes / those of the same method's baseline
  // path; unset for baselines.
  std::optional<double> traffic_reduction_vs_baseline;
  double oracle_rel_err = 0.0;
  bool oracle_checked = false;
  std::string error;  // empty on success
};

struct BenchReport {
  std::vector<BenchRow> rows;

  std::size_t error_count() const;
};

// For every (config, path) pair: seeded synthesis, autotune, oracle check
// on sampled output columns, W warmups, R timed repeats and a modeled
// CostReport. Dense rows are produced once per (model, layer, n). Oracle
// mismatches and scratch failures become row errors.
BenchReport run_bench(const std::vector<LayerConfig>& configs,
                      const HardwareProfile& profile,
                      const BenchOptions& options,
                      std::ostream* progress = nullptr);

// Column order of emit_csv.
const std::vector<std::string>& csv_columns();
void emit_csv(const BenchReport& report, std::ostream& out);
void emit_csv(const BenchReport& report, const std::filesystem::path& path);

// Splits one CSV line; handles double-quoted fields.
std::vector<std::string> parse_csv_line(const std::string& line);

}  // namespace blr

#endif  // BLR_BENCH_HPP_
