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

#include "blr/exec.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <string>
#include <vector>

#include "blr/error.hpp"
#include "blr/kernels.hpp"

namespace blr {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Tile sizes never exceed the dimension they cover.
GemmTile clipped(std::size_t rows, std::size_t cols, std::size_t inner,
                 std::size_t rows_dim, std::size_t cols_dim,
                 std::size_t inner_dim) {
  return {std::max<std::size_t>(1, std::min(rows, rows_dim)),
          std::max<std::size_t>(1, std::min(cols, cols_dim)),
          std::max<std::size_t>(1, std::min(inner, inner_dim))};
}

void check_input(const Tensor& x, std::size_t in_features) {
  if (x.rank() != 2 || x.dim(1) != in_features) {
    throw ShapeError("input must be (n x " + std::to_string(in_features) + ")");
  }
}

// Block l of X: n x p columns [l p, (l + 1) p).
ConstMatrixView input_block(const Tensor& x, std::size_t l, std::size_t p) {
  return {x.raw() + l * p, x.dim(0), p, x.dim(1), 1};
}

// Where output block k lands in the (n x o) result for the given mode.
MatrixView output_block(Tensor& y, std::size_t k, std::size_t b2,
                        std::size_t q, OutputMode mode) {
  if (mode == OutputMode::canonical) {
    return {y.raw() + k * q, y.dim(0), q, y.dim(1), 1};
  }
  return {y.raw() + k, y.dim(0), q, y.dim(1), b2};
}

// (b2, n, q) -> (n x o) in the requested mode, as one materialized copy.
Tensor finalize_output(const Tensor& blocked, OutputMode mode,
                       Counters& counters) {
  const std::size_t b2 = blocked.dim(0), n = blocked.dim(1), q = blocked.dim(2);
  Tensor y = mode == OutputMode::canonical
                 ? permute(blocked, {1, 0, 2}, counters, Role::output,
                           Role::output)
                 : permute(blocked, {1, 2, 0}, counters, Role::output,
                           Role::output);
  return std::move(y).reshaped({n, b2 * q});
}

constexpr std::array<PathId, 8> kAllPaths = {
    PathId::dense,        PathId::lowrank,       PathId::lowrank_fused,
    PathId::monarch_base, PathId::monarch_opt,   PathId::blast_base,
    PathId::blast_partial, PathId::blast_reordered};

}  // namespace

std::string_view output_mode_name(OutputMode mode) {
  return mode == OutputMode::canonical ? "canonical" : "transposed";
}

std::optional<OutputMode> parse_output_mode(std::string_view name) {
  if (name == "canonical") return OutputMode::canonical;
  if (name == "transposed") return OutputMode::transposed;
  return std::nullopt;
}

std::string_view path_name(PathId path) {
  switch (path) {
    case PathId::dense:
      return "dense";
    case PathId::lowrank:
      return "lowrank";
    case PathId::lowrank_fused:
      return "lowrank_fused";
    case PathId::monarch_base:
      return "monarch_base";
    case PathId::monarch_opt:
      return "monarch_opt";
    case PathId::blast_base:
      return "blast_base";
    case PathId::blast_partial:
      return "blast_partial";
    case PathId::blast_reordered:
      return "blast_reordered";
  }
  return "unknown";
}

std::optional<PathId> parse_path(std::string_view name) {
  for (PathId path : kAllPaths) {
    if (path_name(path) == name) return path;
  }
  return std::nullopt;
}

Method path_method(PathId path) {
  switch (path) {
    case PathId::dense:
      return Method::dense;
    case PathId::lowrank:
    case PathId::lowrank_fused:
      return Method::low_rank;
    case PathId::monarch_base:
    case PathId::monarch_opt:
      return Method::monarch;
    case PathId::blast_base:
    case PathId::blast_partial:
    case PathId::blast_reordered:
      return Method::blast;
  }
  return Method::dense;
}

std::span<const PathId> all_paths() { return kAllPaths; }

ForwardResult forward_dense(const Tensor& x, const Tensor& w,
                            const ExecOptions& options) {
  options.tile.validate();
  if (w.rank() != 2) throw ShapeError("dense weight must be 2-D");
  check_input(x, w.dim(0));
  const auto start = Clock::now();
  const std::size_t n = x.dim(0), i = w.dim(0), o = w.dim(1);
  const TileConfig& t = options.tile;

  ForwardResult result;
  result.y = Tensor({n, o});
  gemm(matrix_view(x), matrix_view(w), matrix_view(result.y),
       clipped(t.t_n, t.t_q, t.t_p, n, o, i), options.scratch_bytes,
       result.counters, {Role::input, Role::weight, Role::output});
  result.wall_time_s = seconds_since(start);
  return result;
}

ForwardResult forward_lowrank_baseline(const Tensor& x,
                                       const LowRankFactors& f,
                                       const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  check_input(x, f.in_features());
  const auto start = Clock::now();
  const std::size_t n = x.dim(0), i = f.in_features(), o = f.out_features(),
                    r = f.rank();
  const TileConfig& t = options.tile;

  ForwardResult result;
  Tensor z({n, r});
  gemm(matrix_view(x), matrix_view(f.v), matrix_view(z),
       clipped(t.t_n, t.t_r, t.t_p, n, r, i), options.scratch_bytes,
       result.counters, {Role::input, Role::weight, Role::intermediate});
  result.y = Tensor({n, o});
  gemm(matrix_view(z), matrix_view(f.u), matrix_view(result.y),
       clipped(t.t_n, t.t_q, t.t_r, n, o, r), options.scratch_bytes,
       result.counters, {Role::intermediate, Role::weight, Role::output});
  result.wall_time_s = seconds_since(start);
  return result;
}

std::size_t fused_lowrank_scratch_elements(const TileConfig& tile,
                                           std::size_t rank, std::size_t n,
                                           std::size_t i, std::size_t o) {
  const std::size_t tn = std::min(tile.t_n, n);
  const std::size_t tp = std::min(tile.t_p, i);
  const std::size_t tq = std::min(tile.t_q, o);
  // Z slice stays resident; X/V tiles and U/Y tiles are live in turn.
  return tn * rank + std::max(tn * tp + tp * rank, rank * tq + tn * tq);
}

std::size_t max_fused_lowrank_rank(const TileConfig& tile,
                                   std::size_t scratch_bytes) {
  const std::size_t budget = scratch_bytes / kScratchElementBytes;
  const std::size_t tn = tile.t_n, tp = tile.t_p, tq = tile.t_q;
  const std::size_t fixed = std::max(tn * tp, tn * tq);
  if (budget <= fixed) return 0;
  const std::size_t by_load = (budget - tn * tp) / (tn + tp);
  const std::size_t by_store = (budget - tn * tq) / (tn + tq);
  return std::min(by_load, by_store);
}

ForwardResult forward_lowrank_fully_fused(const Tensor& x,
                                          const LowRankFactors& f,
                                          const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  check_input(x, f.in_features());
  const std::size_t n = x.dim(0), i = f.in_features(), o = f.out_features(),
                    r = f.rank();
  const TileConfig& t = options.tile;
  const std::size_t need = fused_lowrank_scratch_elements(t, r, n, i, o);
  if (need * kScratchElementBytes > options.scratch_bytes) {
    throw RankTooLargeForScratch(r, max_fused_lowrank_rank(t, options.scratch_bytes),
                                 need * kScratchElementBytes,
                                 options.scratch_bytes);
  }
  const auto start = Clock::now();
  const std::size_t tn = std::min(t.t_n, n);
  const std::size_t tp = std::min(t.t_p, i);
  const std::size_t tq = std::min(t.t_q, o);

  ForwardResult result;
  result.y = Tensor({n, o});
  const ConstMatrixView xv = matrix_view(x);
  const ConstMatrixView vv = matrix_view(f.v);
  const ConstMatrixView uv = matrix_view(f.u);
  MatrixView yv = matrix_view(result.y);

  run_tile_tasks(
      ceil_div(n, tn),
      [&](std::size_t task, Counters& local) {
        const std::size_t row0 = task * tn;
        const std::size_t rows = std::min(tn, n - row0);
        // acc of this scratch is the resident Z slice (rows x r).
        TileScratch stage1({tn, r, tp});
        std::span<float> z = stage1.acc();
        tile_dot(xv, vv, row0, 0, rows, r, tp, stage1, z, local, Role::input,
                 Role::weight);

        std::vector<float> u_tile(r * tq);
        std::vector<float> acc(tn * tq);
        for (std::size_t col0 = 0; col0 < o; col0 += tq) {
          const std::size_t cols = std::min(tq, o - col0);
          for (std::size_t rho = 0; rho < r; ++rho) {
            for (std::size_t j = 0; j < cols; ++j) {
              u_tile[rho * cols + j] = uv(rho, col0 + j);
            }
          }
          local.record_tile_read(Role::weight, r * cols);
          std::fill(acc.begin(), acc.begin() + rows * cols, 0.0f);
          for (std::size_t a = 0; a < rows; ++a) {
            float* out = acc.data() + a * cols;
            for (std::size_t rho = 0; rho < r; ++rho) {
              const float zv = z[a * r + rho];
              const float* u_row = u_tile.data() + rho * cols;
              for (std::size_t j = 0; j < cols; ++j) out[j] += zv * u_row[j];
            }
          }
          local.add_flops(2ull * rows * r * cols);
          for (std::size_t a = 0; a < rows; ++a) {
            for (std::size_t j = 0; j < cols; ++j) {
              yv(row0 + a, col0 + j) = acc[a * cols + j];
            }
          }
          local.record_tile_write(Role::output, rows * cols);
        }
      },
      result.counters);
  result.counters.record_read(Role::input, n * i);
  result.counters.record_read(Role::weight, i * r + r * o);
  result.counters.record_write(Role::output, n * o);
  result.wall_time_s = seconds_since(start);
  return result;
}

ForwardResult forward_monarch_baseline(const Tensor& x,
                                       const MonarchFactors& f,
                                       const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  if (f.v_layout != MonarchVLayout::b2_fastest) {
    throw LayoutError("Monarch baseline expects the original b2-fastest V");
  }
  check_input(x, f.in_features());
  const auto start = Clock::now();
  const std::size_t n = x.dim(0), b1 = f.b1, b2 = f.b2, rb = f.block_rank,
                    p = f.p(), q = f.q();
  const std::size_t mid = rb * b2;
  const std::size_t inner2 = b1 * rb;
  const TileConfig& t = options.tile;

  ForwardResult result;
  result.mode = options.mode;
  Counters& counters = result.counters;

  // bmm1: (b1, n, p) x (b1, p, r' b2), V read through a transposed view.
  Tensor z1({b1, n, mid});
  const GemmTile tile1 = clipped(t.t_n, t.t_r, t.t_p, n, mid, p);
  for (std::size_t l = 0; l < b1; ++l) {
    const ConstMatrixView v_t{f.v.raw() + l * mid * p, p, mid, 1, p};
    gemm(input_block(x, l, p), v_t, batch_view(z1, l), tile1,
         options.scratch_bytes, counters,
         {Role::input, Role::weight, Role::intermediate});
  }
  // r' <-> b2, then b2 <-> b1, each a full copy.
  Tensor z2 = permute(std::move(z1).reshaped({b1, n, rb, b2}), {0, 1, 3, 2},
                      counters);
  Tensor z3 = permute(z2, {2, 1, 0, 3}, counters).reshaped({b2, n, inner2});

  // bmm2: (b2, n, b1 r') x (b2, b1 r', q), U read through a transposed view.
  Tensor blocked({b2, n, q});
  const GemmTile tile2 = clipped(t.t_n, t.t_q, t.t_r, n, q, inner2);
  for (std::size_t k = 0; k < b2; ++k) {
    const ConstMatrixView u_t{f.u.raw() + k * q * inner2, inner2, q, 1, inner2};
    gemm(batch_view(z3, k), u_t, batch_view(blocked, k), tile2,
         options.scratch_bytes, counters,
         {Role::intermediate, Role::weight, Role::output});
  }
  result.y = finalize_output(blocked, options.mode, counters);
  result.wall_time_s = seconds_since(start);
  return result;
}

std::size_t monarch_scatter_destination(const MonarchScatterShape& shape,
                                        std::size_t l, std::size_t row,
                                        std::size_t r_tile, std::size_t lane,
                                        std::size_t t_r) {
  const std::size_t c = r_tile * t_r + lane;
  const std::size_t k = c / shape.block_rank;
  const std::size_t inner = l * shape.block_rank + (c - k * shape.block_rank);
  const std::size_t width = shape.b1 * shape.block_rank;
  return k * shape.n * width + row * width + inner;
}

ForwardResult forward_monarch_optimized(const Tensor& x,
                                        const MonarchFactors& f,
                                        const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  if (f.v_layout != MonarchVLayout::rprime_fastest) {
    throw LayoutError("optimized Monarch needs V re-laid out r'-fastest");
  }
  check_input(x, f.in_features());
  const auto start = Clock::now();
  const std::size_t n = x.dim(0), b1 = f.b1, b2 = f.b2, rb = f.block_rank,
                    p = f.p(), q = f.q();
  const std::size_t mid = rb * b2;
  const std::size_t inner2 = b1 * rb;
  const TileConfig& t = options.tile;

  ForwardResult result;
  result.mode = options.mode;
  Counters& counters = result.counters;

  // Fused bmm1 + permutation: every (l, n-tile, r-tile) task scatters its
  // accumulator straight into the (b2, n, b1 r') operand of bmm2.
  const GemmTile tile1 = clipped(t.t_n, t.t_r, t.t_p, n, mid, p);
  check_scratch(tile1.footprint_elements(), options.scratch_bytes,
                "fused Monarch bmm tile");
  Tensor scattered({b2, n, inner2});
  const MonarchScatterShape shape{b1, b2, n, rb};
  const std::size_t n_tiles = ceil_div(n, tile1.rows);
  const std::size_t r_tiles = ceil_div(mid, tile1.cols);
  run_tile_tasks(
      b1 * n_tiles * r_tiles,
      [&](std::size_t task, Counters& local) {
        const std::size_t l = task / (n_tiles * r_tiles);
        const std::size_t nt = (task / r_tiles) % n_tiles;
        const std::size_t rt = task % r_tiles;
        const std::size_t row0 = nt * tile1.rows;
        const std::size_t col0 = rt * tile1.cols;
        const std::size_t rows = std::min(tile1.rows, n - row0);
        const std::size_t cols = std::min(tile1.cols, mid - col0);
        TileScratch scratch(tile1);
        const ConstMatrixView v_t{f.v.raw() + l * mid * p, p, mid, 1, p};
        tile_dot(input_block(x, l, p), v_t, row0, col0, rows, cols,
                 tile1.inner, scratch, scratch.acc(), local, Role::input,
                 Role::weight);
        const float* acc = scratch.acc().data();
        float* dst = scattered.raw();
        for (std::size_t lane = 0; lane < cols; ++lane) {
          for (std::size_t a = 0; a < rows; ++a) {
            dst[monarch_scatter_destination(shape, l, row0 + a, rt,
                                            lane, tile1.cols)] =
                acc[a * cols + lane];
          }
        }
        local.record_tile_write(Role::intermediate, rows * cols);
      },
      counters);
  counters.record_read(Role::input, n * b1 * p);
  counters.record_read(Role::weight, f.v.size());
  counters.record_write(Role::intermediate, scattered.size());

  // bmm2 stores each output block directly at its final columns.
  result.y = Tensor({n, b2 * q});
  const GemmTile tile2 = clipped(t.t_n, t.t_q, t.t_r, n, q, inner2);
  for (std::size_t k = 0; k < b2; ++k) {
    const ConstMatrixView u_t{f.u.raw() + k * q * inner2, inner2, q, 1, inner2};
    gemm(batch_view(scattered, k), u_t,
         output_block(result.y, k, b2, q, options.mode), tile2,
         options.scratch_bytes, counters,
         {Role::intermediate, Role::weight, Role::output});
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

ForwardResult forward_blast_baseline(const Tensor& x, const BlastFactors& f,
                                     const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  check_input(x, f.in_features());
  const auto start = Clock::now();
  const std::size_t n = x.dim(0), b1 = f.b1(), b2 = f.b2(), p = f.p(),
                    q = f.q(), r = f.rank();
  const TileConfig& t = options.tile;

  ForwardResult result;
  result.mode = options.mode;
  Counters& counters = result.counters;

  // bmm1: Z1 (b1, n, r).
  Tensor z1({b1, n, r});
  const GemmTile tile1 = clipped(t.t_n, t.t_r, t.t_p, n, r, p);
  for (std::size_t l = 0; l < b1; ++l) {
    gemm(input_block(x, l, p), batch_view(f.v, l), batch_view(z1, l), tile1,
         options.scratch_bytes, counters,
         {Role::input, Role::weight, Role::intermediate});
  }
  // Permutation into the S-application layout (n, b1, r).
  const Tensor z1_by_token = permute(z1, {1, 0, 2}, counters);

  // Z2[t, k, :] = sum_l S[l, k, :] * Z1[t, l, :]  (n, b2, r).
  Tensor z2({n, b2, r});
  constexpr std::size_t kRowsPerTask = 16;
  run_tile_tasks(
      ceil_div(n, kRowsPerTask),
      [&](std::size_t task, Counters& local) {
        const std::size_t row_end = std::min(n, (task + 1) * kRowsPerTask);
        for (std::size_t row = task * kRowsPerTask; row < row_end; ++row) {
          for (std::size_t k = 0; k < b2; ++k) {
            float* out = z2.raw() + (row * b2 + k) * r;
            for (std::size_t l = 0; l < b1; ++l) {
              const float* s = f.s.raw() + (l * b2 + k) * r;
              const float* z = z1_by_token.raw() + (row * b1 + l) * r;
              for (std::size_t rho = 0; rho < r; ++rho) out[rho] += s[rho] * z[rho];
            }
          }
        }
        const std::size_t rows = row_end - task * kRowsPerTask;
        local.add_flops(2ull * rows * b1 * b2 * r);
        local.record_tile_read(Role::intermediate, rows * b1 * r);
        local.record_tile_read(Role::weight, f.s.size());
        local.record_tile_write(Role::intermediate, rows * b2 * r);
      },
      counters);
  counters.record_read(Role::intermediate, z1_by_token.size());
  counters.record_read(Role::weight, f.s.size());
  counters.record_write(Role::intermediate, z2.size());

  // Permutation into the bmm2 layout (b2, n, r).
  const Tensor z2_by_block = permute(z2, {1, 0, 2}, counters);

  Tensor blocked({b2, n, q});
  const GemmTile tile2 = clipped(t.t_n, t.t_q, t.t_r, n, q, r);
  for (std::size_t k = 0; k < b2; ++k) {
    gemm(batch_view(z2_by_block, k), batch_view(f.u, k), batch_view(blocked, k),
         tile2, options.scratch_bytes, counters,
         {Role::intermediate, Role::weight, Role::output});
  }
  result.y = finalize_output(blocked, options.mode, counters);
  result.wall_time_s = seconds_since(start);
  return result;
}

namespace {

std::size_t partial_fused_stage_elements(std::size_t tn, std::size_t tr,
                                         std::size_t tp, std::size_t b2) {
  // z'' accumulator, z' tile, X and V operand tiles, S slice.
  return b2 * tn * tr + tn * tr + tn * tp + tp * tr + b2 * tr;
}

}  // namespace

ForwardResult forward_blast_partial_fused(const Tensor& x,
                                          const BlastFactors& f,
                                          const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  check_input(x, f.in_features());
  const std::size_t n = x.dim(0), b1 = f.b1(), b2 = f.b2(), p = f.p(),
                    q = f.q(), r = f.rank();
  const TileConfig& t = options.tile;
  const GemmTile tile1 = clipped(t.t_n, t.t_r, t.t_p, n, r, p);
  check_scratch(partial_fused_stage_elements(tile1.rows, tile1.cols,
                                             tile1.inner, b2),
                options.scratch_bytes, "BLAST partial-fusion z'' accumulator");
  const auto start = Clock::now();

  ForwardResult result;
  result.mode = options.mode;
  Counters& counters = result.counters;

  Tensor z({b2, n, r});
  const std::size_t n_tiles = ceil_div(n, tile1.rows);
  const std::size_t r_tiles = ceil_div(r, tile1.cols);
  run_tile_tasks(
      n_tiles * r_tiles,
      [&](std::size_t task, Counters& local) {
        const std::size_t row0 = (task / r_tiles) * tile1.rows;
        const std::size_t col0 = (task % r_tiles) * tile1.cols;
        const std::size_t rows = std::min(tile1.rows, n - row0);
        const std::size_t cols = std::min(tile1.cols, r - col0);
        TileScratch scratch(tile1, b2 * tile1.rows * tile1.cols + b2 * tile1.cols);
        std::span<float> acc = scratch.extra().first(b2 * rows * cols);
        std::span<float> s_tile = scratch.extra().subspan(
            b2 * tile1.rows * tile1.cols, b2 * cols);
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (std::size_t l = 0; l < b1; ++l) {
          for (std::size_t k = 0; k < b2; ++k) {
            const float* s = f.s.raw() + (l * b2 + k) * r + col0;
            std::copy(s, s + cols, s_tile.begin() + k * cols);
          }
          local.record_tile_read(Role::weight, b2 * cols);
          tile_dot(input_block(x, l, p), batch_view(f.v, l), row0, col0, rows,
                   cols, tile1.inner, scratch, scratch.acc(), local,
                   Role::input, Role::weight);
          const float* zt = scratch.acc().data();
          // Batched outer-product accumulation over the b2 output blocks.
          for (std::size_t k = 0; k < b2; ++k) {
            const float* s = s_tile.data() + k * cols;
            float* out = acc.data() + k * rows * cols;
            for (std::size_t a = 0; a < rows; ++a) {
              for (std::size_t j = 0; j < cols; ++j) {
                out[a * cols + j] += s[j] * zt[a * cols + j];
              }
            }
          }
          local.add_flops(2ull * b2 * rows * cols);
        }
        for (std::size_t k = 0; k < b2; ++k) {
          for (std::size_t a = 0; a < rows; ++a) {
            std::copy_n(acc.data() + (k * rows + a) * cols, cols,
                        z.raw() + (k * n + row0 + a) * r + col0);
          }
        }
        local.record_tile_write(Role::intermediate, b2 * rows * cols);
      },
      counters);
  counters.record_read(Role::input, n * b1 * p);
  counters.record_read(Role::weight, f.v.size() + f.s.size());
  counters.record_write(Role::intermediate, z.size());

  result.y = Tensor({n, b2 * q});
  const GemmTile tile2 = clipped(t.t_n, t.t_q, t.t_r, n, q, r);
  for (std::size_t k = 0; k < b2; ++k) {
    gemm(batch_view(z, k), batch_view(f.u, k),
         output_block(result.y, k, b2, q, options.mode), tile2,
         options.scratch_bytes, counters,
         {Role::intermediate, Role::weight, Role::output});
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

ForwardResult forward_blast_reordered(const Tensor& x, const BlastFactors& f,
                                      const ExecOptions& options) {
  options.tile.validate();
  f.validate();
  if (!f.s_t) throw LayoutError("reordered BLAST needs pre-transposed S_T");
  check_input(x, f.in_features());
  const std::size_t n = x.dim(0), b1 = f.b1(), b2 = f.b2(), p = f.p(),
                    q = f.q(), r = f.rank();
  const std::size_t o = b2 * q;
  const TileConfig& t = options.tile;
  const GemmTile tile1 = clipped(t.t_n, t.t_r, t.t_p, n, r, p);
  const GemmTile tile2 = clipped(t.t_r, t.t_n, t.t_p, b2, n, b1);
  const GemmTile tile3 = clipped(t.t_q, t.t_n, t.t_r, q, n, r);
  check_scratch(tile1.footprint_elements() + tile1.rows * tile1.cols,
                options.scratch_bytes, "reordered BLAST K1 tile");
  check_scratch(tile3.footprint_elements() + tile3.rows * tile3.cols,
                options.scratch_bytes, "reordered BLAST K3 tile");
  const auto start = Clock::now();

  ForwardResult result;
  result.mode = options.mode;
  Counters& counters = result.counters;

  // K1: A[rho, l, t] = (X_l V_l)[t, rho], tiles transposed in scratch.
  Tensor a({r, b1, n});
  {
    const std::size_t n_tiles = ceil_div(n, tile1.rows);
    const std::size_t r_tiles = ceil_div(r, tile1.cols);
    run_tile_tasks(
        b1 * n_tiles * r_tiles,
        [&](std::size_t task, Counters& local) {
          const std::size_t l = task / (n_tiles * r_tiles);
          const std::size_t row0 = ((task / r_tiles) % n_tiles) * tile1.rows;
          const std::size_t col0 = (task % r_tiles) * tile1.cols;
          const std::size_t rows = std::min(tile1.rows, n - row0);
          const std::size_t cols = std::min(tile1.cols, r - col0);
          TileScratch scratch(tile1, tile1.rows * tile1.cols);
          tile_dot(input_block(x, l, p), batch_view(f.v, l), row0, col0, rows,
                   cols, tile1.inner, scratch, scratch.acc(), local,
                   Role::input, Role::weight);
          std::span<float> flipped = scratch.extra();
          transpose_tile(scratch.acc(), rows, cols, flipped);
          for (std::size_t j = 0; j < cols; ++j) {
            std::copy_n(flipped.data() + j * rows, rows,
                        a.raw() + ((col0 + j) * b1 + l) * n + row0);
          }
          local.record_tile_write(Role::intermediate, rows * cols);
        },
        counters);
    counters.record_read(Role::input, n * b1 * p);
    counters.record_read(Role::weight, f.v.size());
    counters.record_write(Role::intermediate, a.size());
  }

  // K2: B[k, rho, :] = sum_l S_T[rho, k, l] A[rho, l, :], batched over rho
  // and stored with the outer dimensions swapped.
  Tensor b({b2, r, n});
  for (std::size_t rho = 0; rho < r; ++rho) {
    const ConstMatrixView s_t{f.s_t->raw() + rho * b2 * b1, b2, b1, b1, 1};
    const ConstMatrixView a_rho{a.raw() + rho * b1 * n, b1, n, n, 1};
    const MatrixView b_rho{b.raw() + rho * n, b2, n, r * n, 1};
    gemm(s_t, a_rho, b_rho, tile2, options.scratch_bytes, counters,
         {Role::weight, Role::intermediate, Role::intermediate});
  }

  // K3: Y_k^T = U_k^T B[k], tiles transposed back before the store.
  const bool feature_major = options.feature_major_output;
  result.y = feature_major ? Tensor({o, n}) : Tensor({n, o});
  {
    const std::size_t q_tiles = ceil_div(q, tile3.rows);
    const std::size_t n_tiles = ceil_div(n, tile3.cols);
    run_tile_tasks(
        b2 * q_tiles * n_tiles,
        [&](std::size_t task, Counters& local) {
          const std::size_t k = task / (q_tiles * n_tiles);
          const std::size_t y0 = ((task / n_tiles) % q_tiles) * tile3.rows;
          const std::size_t t0 = (task % n_tiles) * tile3.cols;
          const std::size_t ys = std::min(tile3.rows, q - y0);
          const std::size_t ts = std::min(tile3.cols, n - t0);
          const ConstMatrixView u_t{f.u.raw() + k * r * q, q, r, 1, q};
          const ConstMatrixView b_k{b.raw() + k * r * n, r, n, n, 1};
          TileScratch scratch(tile3, tile3.rows * tile3.cols);
          tile_dot(u_t, b_k, y0, t0, ys, ts, tile3.inner, scratch,
                   scratch.acc(), local, Role::weight, Role::intermediate);
          const float* acc = scratch.acc().data();
          if (feature_major) {
            for (std::size_t j = 0; j < ys; ++j) {
              const std::size_t row =
                  output_column(options.mode, k, y0 + j, b2, q);
              std::copy_n(acc + j * ts, ts, result.y.raw() + row * n + t0);
            }
          } else {
            std::span<float> flipped = scratch.extra();
            transpose_tile(scratch.acc(), ys, ts, flipped);
            for (std::size_t tt = 0; tt < ts; ++tt) {
              float* dst = result.y.raw() + (t0 + tt) * o;
              for (std::size_t j = 0; j < ys; ++j) {
                dst[output_column(options.mode, k, y0 + j, b2, q)] =
                    flipped[tt * ys + j];
              }
            }
          }
          local.record_tile_write(Role::output, ys * ts);
        },
        counters);
    counters.record_read(Role::weight, f.u.size());
    counters.record_read(Role::intermediate, b.size());
    counters.record_write(Role::output, n * o);
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

std::size_t required_scratch_elements(PathId path, const WorkloadSpec& spec,
                                      const TileConfig& t) {
  const std::size_t n = spec.n, i = spec.i, o = spec.o, r = spec.r;
  const std::size_t b = path_method(path) == Method::monarch ||
                                path_method(path) == Method::blast
                            ? spec.b
                            : 1;
  const std::size_t p = i / b, q = o / b;
  switch (path) {
    case PathId::dense:
      return clipped(t.t_n, t.t_q, t.t_p, n, o, i).footprint_elements();
    case PathId::lowrank:
      return std::max(clipped(t.t_n, t.t_r, t.t_p, n, r, i).footprint_elements(),
                      clipped(t.t_n, t.t_q, t.t_r, n, o, r).footprint_elements());
    case PathId::lowrank_fused:
      return fused_lowrank_scratch_elements(t, r, n, i, o);
    case PathId::monarch_base:
    case PathId::monarch_opt: {
      const std::size_t rb = r / b;
      return std::max(
          clipped(t.t_n, t.t_r, t.t_p, n, rb * b, p).footprint_elements(),
          clipped(t.t_n, t.t_q, t.t_r, n, q, b * rb).footprint_elements());
    }
    case PathId::blast_base:
      return std::max(clipped(t.t_n, t.t_r, t.t_p, n, r, p).footprint_elements(),
                      clipped(t.t_n, t.t_q, t.t_r, n, q, r).footprint_elements());
    case PathId::blast_partial: {
      const GemmTile g = clipped(t.t_n, t.t_r, t.t_p, n, r, p);
      return std::max(partial_fused_stage_elements(g.rows, g.cols, g.inner, b),
                      clipped(t.t_n, t.t_q, t.t_r, n, q, r).footprint_elements());
    }
    case PathId::blast_reordered: {
      const GemmTile g1 = clipped(t.t_n, t.t_r, t.t_p, n, r, p);
      const GemmTile g2 = clipped(t.t_r, t.t_n, t.t_p, b, n, b);
      const GemmTile g3 = clipped(t.t_q, t.t_n, t.t_r, q, n, r);
      return std::max({g1.footprint_elements() + g1.rows * g1.cols,
                       g2.footprint_elements(),
                       g3.footprint_elements() + g3.rows * g3.cols});
    }
  }
  return 0;
}

}  // namespace blr
