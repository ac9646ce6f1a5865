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

#include "blr/bench.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <tuple>

#include "blr/error.hpp"
#include "blr/formats.hpp"

namespace blr {

void BenchOptions::validate() const {
  if (warmups < 1) throw ShapeError("warmups must be at least 1");
  if (repeats < 3) throw ShapeError("repeats must be at least 3");
  if (elem_bytes == 0) throw ShapeError("elem_bytes must be positive");
}

TimingStats summarize_times(std::vector<double> times) {
  if (times.empty()) throw ShapeError("no timings to summarize");
  std::sort(times.begin(), times.end());
  TimingStats stats;
  const std::size_t m = times.size();
  stats.median_s = m % 2 ? times[m / 2] : 0.5 * (times[m / 2 - 1] + times[m / 2]);
  stats.mean_s = std::accumulate(times.begin(), times.end(), 0.0) / m;
  stats.min_s = times.front();
  stats.max_s = times.back();
  return stats;
}

std::size_t BenchReport::error_count() const {
  return std::count_if(rows.begin(), rows.end(),
                       [](const BenchRow& row) { return !row.error.empty(); });
}

namespace {

// Everything needed to execute and check one (layer, path) pair.
struct Workload {
  std::function<ForwardResult(const TileConfig&)> run;
  std::vector<std::size_t> columns;
  std::vector<double> reference;  // n x columns.size()
};

std::vector<std::size_t> sample_columns(std::size_t o, std::size_t limit) {
  const std::size_t count = std::min(o, std::max<std::size_t>(limit, 1));
  std::vector<std::size_t> cols(count);
  for (std::size_t j = 0; j < count; ++j) cols[j] = j * o / count;
  return cols;
}

std::vector<double> reference_output(const Tensor& x,
                                     const std::vector<double>& w_cols,
                                     std::size_t cols) {
  const std::size_t n = x.dim(0), i = x.dim(1);
  std::vector<double> y(n * cols, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < i; ++k) {
      const double xv = x[t * i + k];
      const double* w_row = w_cols.data() + k * cols;
      double* out = y.data() + t * cols;
      for (std::size_t j = 0; j < cols; ++j) out[j] += xv * w_row[j];
    }
  }
  return y;
}

double oracle_error(const Workload& w, const Tensor& y) {
  const std::size_t n = y.dim(0), o = y.dim(1), cols = w.columns.size();
  std::vector<float> picked(n * cols);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < cols; ++j) {
      picked[t * cols + j] = y[t * o + w.columns[j]];
    }
  }
  return relative_frobenius_error(picked, w.reference);
}

Workload make_workload(PathId path, const WorkloadSpec& spec, const Tensor& x,
                       std::uint64_t seed, const BenchOptions& options) {
  Workload w;
  w.columns = sample_columns(spec.o, options.oracle_columns);
  auto exec = [&options](const TileConfig& tile) {
    ExecOptions e;
    e.tile = tile;
    e.scratch_bytes = options.scratch_bytes;
    return e;
  };
  std::vector<double> w_cols;
  switch (path_method(path)) {
    case Method::dense: {
      auto weight = std::make_shared<Tensor>(random_dense(spec.i, spec.o, seed));
      w_cols.resize(spec.i * w.columns.size());
      for (std::size_t k = 0; k < spec.i; ++k) {
        for (std::size_t j = 0; j < w.columns.size(); ++j) {
          w_cols[k * w.columns.size() + j] =
              (*weight)[k * spec.o + w.columns[j]];
        }
      }
      w.run = [&x, weight, exec](const TileConfig& tile) {
        return forward_dense(x, *weight, exec(tile));
      };
      break;
    }
    case Method::low_rank: {
      auto f = std::make_shared<LowRankFactors>(
          random_low_rank(spec.i, spec.o, spec.r, seed));
      w_cols = reconstruct_dense_columns(*f, w.columns);
      const bool fused = path == PathId::lowrank_fused;
      w.run = [&x, f, exec, fused](const TileConfig& tile) {
        return fused ? forward_lowrank_fully_fused(x, *f, exec(tile))
                     : forward_lowrank_baseline(x, *f, exec(tile));
      };
      break;
    }
    case Method::monarch: {
      auto f = std::make_shared<MonarchFactors>(
          random_monarch(spec.i, spec.o, spec.b, spec.r / spec.b, seed));
      w_cols = reconstruct_dense_columns(*f, w.columns);
      if (path == PathId::monarch_opt) {
        *f = relayout_monarch_v(*f);
        w.run = [&x, f, exec](const TileConfig& tile) {
          return forward_monarch_optimized(x, *f, exec(tile));
        };
      } else {
        w.run = [&x, f, exec](const TileConfig& tile) {
          return forward_monarch_baseline(x, *f, exec(tile));
        };
      }
      break;
    }
    case Method::blast: {
      auto f = std::make_shared<BlastFactors>(
          random_blast(spec.i, spec.o, spec.b, spec.r, seed));
      w_cols = reconstruct_dense_columns(*f, w.columns);
      if (path == PathId::blast_reordered) {
        *f = pretranspose_blast_s(*f);
        w.run = [&x, f, exec](const TileConfig& tile) {
          return forward_blast_reordered(x, *f, exec(tile));
        };
      } else if (path == PathId::blast_partial) {
        w.run = [&x, f, exec](const TileConfig& tile) {
          return forward_blast_partial_fused(x, *f, exec(tile));
        };
      } else {
        w.run = [&x, f, exec](const TileConfig& tile) {
          return forward_blast_baseline(x, *f, exec(tile));
        };
      }
      break;
    }
  }
  w.reference = reference_output(x, w_cols, w.columns.size());
  return w;
}

std::optional<PathId> baseline_of(PathId path) {
  switch (path) {
    case PathId::lowrank_fused:
      return PathId::lowrank;
    case PathId::monarch_opt:
      return PathId::monarch_base;
    case PathId::blast_partial:
    case PathId::blast_reordered:
      return PathId::blast_base;
    default:
      return std::nullopt;
  }
}

void run_row(BenchRow& row, const Tensor& x, std::uint64_t seed,
             const HardwareProfile& profile, const BenchOptions& options,
             Autotuner& tuner) {
  row.cost = classify(row.spec, profile, options.elem_bytes);
  const Workload w = make_workload(row.path, row.spec, x, seed, options);
  const TuneResult tuned = tuner.tune(row.path, row.spec, options.scratch_bytes,
                                      OutputMode::canonical, w.run);
  row.tile = tuned.best;

  ForwardResult checked = w.run(row.tile);
  row.counters = checked.counters;
  row.oracle_rel_err = oracle_error(w, checked.y);
  row.oracle_checked = true;
  if (!(row.oracle_rel_err <= options.oracle_tolerance)) {
    std::ostringstream msg;
    msg << "oracle mismatch: relative error " << row.oracle_rel_err
        << " exceeds " << options.oracle_tolerance;
    throw Error(msg.str());
  }

  for (std::size_t k = 0; k < options.warmups; ++k) w.run(row.tile);
  std::vector<double> times;
  times.reserve(options.repeats);
  for (std::size_t k = 0; k < options.repeats; ++k) {
    times.push_back(w.run(row.tile).wall_time_s);
  }
  row.timing = summarize_times(std::move(times));
}

}  // namespace

BenchReport run_bench(const std::vector<LayerConfig>& configs,
                      const HardwareProfile& profile,
                      const BenchOptions& options, std::ostream* progress) {
  options.validate();
  profile.validate();
  Autotuner tuner(options.tile_candidates.empty() ? default_tile_candidates()
                                                  : options.tile_candidates);
  const bool want_dense =
      std::find(options.paths.begin(), options.paths.end(), PathId::dense) !=
      options.paths.end();

  BenchReport report;
  using LayerKey = std::tuple<std::string, std::string, std::size_t>;
  std::map<LayerKey, std::size_t> dense_rows;

  auto execute = [&](BenchRow row, std::size_t config_index) {
    const std::uint64_t seed = options.seed * 1000003ull + config_index;
    try {
      const Tensor x =
          random_normal({row.spec.n, row.spec.i}, 1.0f, seed ^ 0x5851f42dull);
      run_row(row, x, seed, profile, options, tuner);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (progress) {
      *progress << row.model << " " << row.layer << " "
                << path_name(row.path) << " " << row.spec.to_string() << ": "
                << (row.error.empty() ? "ok" : "ERROR " + row.error) << "\n";
    }
    report.rows.push_back(std::move(row));
  };

  for (std::size_t c = 0; c < configs.size(); ++c) {
    const LayerConfig& cfg = configs[c];
    if (!cfg.bench && !options.include_disabled) continue;
    const WorkloadSpec spec = cfg.spec(options.n_override);
    if (want_dense) {
      const LayerKey key{cfg.model, cfg.layer, spec.n};
      if (!dense_rows.contains(key)) {
        dense_rows.emplace(key, report.rows.size());
        BenchRow row;
        row.model = cfg.model;
        row.layer = cfg.layer;
        row.path = PathId::dense;
        row.spec = {Method::dense, spec.n, spec.i, spec.o, 0, 1};
        execute(std::move(row), c);
      }
    }
    for (PathId path : options.paths) {
      if (path == PathId::dense || path_method(path) != cfg.method) continue;
      BenchRow row;
      row.model = cfg.model;
      row.layer = cfg.layer;
      row.path = path;
      row.spec = spec;
      execute(std::move(row), c);
    }
  }

  for (BenchRow& row : report.rows) {
    if (!row.error.empty()) continue;
    if (auto it = dense_rows.find({row.model, row.layer, row.spec.n});
        it != dense_rows.end()) {
      const BenchRow& dense = report.rows[it->second];
      if (dense.error.empty() && row.timing.median_s > 0.0) {
        row.speedup_vs_dense = dense.timing.median_s / row.timing.median_s;
      }
    }
    if (const auto base = baseline_of(row.path)) {
      for (const BenchRow& other : report.rows) {
        if (other.path == *base && other.error.empty() &&
            other.model == row.model && other.layer == row.layer &&
            other.spec == row.spec) {
          const double before =
              static_cast<double>(other.counters.intermediate_elements());
          if (before > 0.0) {
            row.traffic_reduction_vs_baseline =
                1.0 - row.counters.intermediate_elements() / before;
          }
        }
      }
    }
  }
  return report;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "model",         "layer",
      "method",        "path",
      "n",             "i",
      "o",             "r",
      "b",             "time_median_s",
      "flops_counted", "flops_modeled",
      "bytes_intermediate_counted", "bytes_modeled",
      "alpha_modeled", "bound",
      "est_runtime_s", "speedup_vs_dense",
      "oracle_maxrelerr"};
  return columns;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) {
  std::ostringstream out;
  out << std::setprecision(9) << v;
  return out.str();
}

}  // namespace

void emit_csv(const BenchReport& report, std::ostream& out) {
  const auto& columns = csv_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c];
  }
  out << "\n";
  for (const BenchRow& row : report.rows) {
    const bool ok = row.error.empty();
    const std::vector<std::string> fields = {
        csv_field(row.model),
        csv_field(row.layer),
        std::string(method_name(row.spec.method)),
        std::string(path_name(row.path)),
        std::to_string(row.spec.n),
        std::to_string(row.spec.i),
        std::to_string(row.spec.o),
        std::to_string(row.spec.r),
        std::to_string(row.spec.b),
        ok ? number(row.timing.median_s) : "",
        ok ? std::to_string(row.counters.flops()) : "",
        std::to_string(row.cost.flops),
        ok ? std::to_string(row.counters.intermediate_bytes(row.cost.elem_bytes))
           : "",
        std::to_string(row.cost.bytes),
        number(row.cost.alpha),
        std::string(bound_name(row.cost.bound)),
        number(row.cost.est_runtime_s),
        row.speedup_vs_dense ? number(*row.speedup_vs_dense) : "",
        row.oracle_checked ? number(row.oracle_rel_err) : ""};
    for (std::size_t c = 0; c < fields.size(); ++c) {
      out << (c ? "," : "") << fields[c];
    }
    out << "\n";
  }
}

void emit_csv(const BenchReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  emit_csv(report, out);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        fields.back() += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace blr
