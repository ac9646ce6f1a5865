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

#include "blr/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "blr/error.hpp"

namespace blr {

namespace {

std::atomic<std::size_t> g_worker_threads{0};

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

ConstMatrixView matrix_view(const Tensor& t) {
  if (t.rank() != 2) throw ShapeError("matrix_view needs a rank-2 tensor");
  return {t.raw(), t.dim(0), t.dim(1), t.dim(1), 1};
}

MatrixView matrix_view(Tensor& t) {
  if (t.rank() != 2) throw ShapeError("matrix_view needs a rank-2 tensor");
  return {t.raw(), t.dim(0), t.dim(1), t.dim(1), 1};
}

ConstMatrixView batch_view(const Tensor& t, std::size_t batch) {
  if (t.rank() != 3 || batch >= t.dim(0)) {
    throw ShapeError("batch_view needs a rank-3 tensor and a valid batch");
  }
  const std::size_t rows = t.dim(1);
  const std::size_t cols = t.dim(2);
  return {t.raw() + batch * rows * cols, rows, cols, cols, 1};
}

MatrixView batch_view(Tensor& t, std::size_t batch) {
  if (t.rank() != 3 || batch >= t.dim(0)) {
    throw ShapeError("batch_view needs a rank-3 tensor and a valid batch");
  }
  const std::size_t rows = t.dim(1);
  const std::size_t cols = t.dim(2);
  return {t.raw() + batch * rows * cols, rows, cols, cols, 1};
}

std::size_t worker_threads() {
  const std::size_t configured = g_worker_threads.load();
  if (configured) return configured;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_worker_threads(std::size_t threads) { g_worker_threads = threads; }

void run_tile_tasks(std::size_t count,
                    const std::function<void(std::size_t, Counters&)>& task,
                    Counters& counters) {
  const std::size_t workers = std::min(worker_threads(), count);
  if (workers <= 1) {
    Counters local;
    for (std::size_t t = 0; t < count; ++t) task(t, local);
    counters += local;
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex merge_mutex;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      Counters local;
      try {
        for (std::size_t t = next++; t < count; t = next++) task(t, local);
      } catch (...) {
        std::lock_guard lock(merge_mutex);
        if (!failure) failure = std::current_exception();
      }
      std::lock_guard lock(merge_mutex);
      counters += local;
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

TileScratch::TileScratch(const GemmTile& tile, std::size_t extra_elements)
    : a_(tile.rows * tile.inner),
      b_(tile.inner * tile.cols),
      acc_(tile.rows * tile.cols),
      extra_(extra_elements) {}

void tile_dot(ConstMatrixView a, ConstMatrixView b, std::size_t row0,
              std::size_t col0, std::size_t rows, std::size_t cols,
              std::size_t inner, TileScratch& scratch, std::span<float> acc,
              Counters& counters, Role a_role, Role b_role) {
  const std::size_t depth = a.cols;
  std::fill(acc.begin(), acc.begin() + rows * cols, 0.0f);
  float* a_buf = scratch.a().data();
  float* b_buf = scratch.b().data();
  for (std::size_t k0 = 0; k0 < depth; k0 += inner) {
    const std::size_t kc = std::min(inner, depth - k0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < kc; ++k) {
        a_buf[i * kc + k] = a(row0 + i, k0 + k);
      }
    }
    for (std::size_t k = 0; k < kc; ++k) {
      for (std::size_t j = 0; j < cols; ++j) {
        b_buf[k * cols + j] = b(k0 + k, col0 + j);
      }
    }
    counters.record_tile_read(a_role, rows * kc);
    counters.record_tile_read(b_role, kc * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      float* out = acc.data() + i * cols;
      const float* a_row = a_buf + i * kc;
      for (std::size_t k = 0; k < kc; ++k) {
        const float av = a_row[k];
        const float* b_row = b_buf + k * cols;
        for (std::size_t j = 0; j < cols; ++j) out[j] += av * b_row[j];
      }
    }
  }
  counters.add_flops(2ull * rows * cols * depth);
}

void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView c,
          const GemmTile& tile, std::size_t scratch_bytes, Counters& counters,
          GemmRoles roles) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) {
    throw ShapeError("gemm: (" + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + ") * (" + std::to_string(b.rows) +
                     "x" + std::to_string(b.cols) + ") -> (" +
                     std::to_string(c.rows) + "x" + std::to_string(c.cols) +
                     ")");
  }
  check_scratch(tile.footprint_elements(), scratch_bytes, "gemm tile");

  const std::size_t row_tiles = ceil_div(a.rows, tile.rows);
  const std::size_t col_tiles = ceil_div(b.cols, tile.cols);
  run_tile_tasks(
      row_tiles * col_tiles,
      [&](std::size_t task, Counters& local) {
        const std::size_t row0 = (task / col_tiles) * tile.rows;
        const std::size_t col0 = (task % col_tiles) * tile.cols;
        const std::size_t rows = std::min(tile.rows, a.rows - row0);
        const std::size_t cols = std::min(tile.cols, b.cols - col0);
        TileScratch scratch(tile);
        tile_dot(a, b, row0, col0, rows, cols, tile.inner, scratch,
                 scratch.acc(), local, roles.a, roles.b);
        const float* acc = scratch.acc().data();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < cols; ++j) {
            c(row0 + i, col0 + j) = acc[i * cols + j];
          }
        }
        local.record_tile_write(roles.c, rows * cols);
      },
      counters);
  counters.record_read(roles.a, a.rows * a.cols);
  counters.record_read(roles.b, b.rows * b.cols);
  counters.record_write(roles.c, c.rows * c.cols);
}

Tensor tiled_gemm(const Tensor& a, const Tensor& b, const TileConfig& tile,
                  Counters& counters, std::size_t scratch_bytes,
                  GemmRoles roles) {
  tile.validate();
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("tiled_gemm: inner dimensions do not match");
  }
  Tensor c({a.dim(0), b.dim(1)});
  gemm(matrix_view(a), matrix_view(b), matrix_view(c),
       {tile.t_n, tile.t_q, tile.t_p}, scratch_bytes, counters, roles);
  return c;
}

Tensor batched_gemm(const Tensor& a, const Tensor& b, const TileConfig& tile,
                    Counters& counters, std::size_t scratch_bytes,
                    GemmRoles roles) {
  tile.validate();
  if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) ||
      a.dim(2) != b.dim(1)) {
    throw ShapeError("batched_gemm: batch or inner dimensions do not match");
  }
  Tensor c({a.dim(0), a.dim(1), b.dim(2)});
  for (std::size_t batch = 0; batch < a.dim(0); ++batch) {
    gemm(batch_view(a, batch), batch_view(b, batch), batch_view(c, batch),
         {tile.t_n, tile.t_q, tile.t_p}, scratch_bytes, counters, roles);
  }
  return c;
}

Tensor permute(const Tensor& t, std::span<const std::size_t> axes,
               Counters& counters, Role source_role, Role dest_role) {
  const std::size_t rank = t.rank();
  if (axes.size() != rank) throw ShapeError("permute: axes length != rank");
  std::vector<bool> seen(rank, false);
  for (std::size_t axis : axes) {
    if (axis >= rank || seen[axis]) {
      throw ShapeError("permute: axes are not a permutation");
    }
    seen[axis] = true;
  }

  const auto in_strides = row_major_strides(t.shape());
  Shape out_shape(rank);
  std::vector<std::size_t> src_stride(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    out_shape[d] = t.shape()[axes[d]];
    src_stride[d] = in_strides[axes[d]];
  }
  Tensor out(out_shape);
  const std::size_t count = t.size();
  if (count > 0) {
    std::vector<std::size_t> index(rank, 0);
    std::size_t src = 0;
    const float* in = t.raw();
    float* dst = out.raw();
    for (std::size_t flat = 0; flat < count; ++flat) {
      dst[flat] = in[src];
      for (std::size_t d = rank; d-- > 0;) {
        if (++index[d] < out_shape[d]) {
          src += src_stride[d];
          break;
        }
        src -= (out_shape[d] - 1) * src_stride[d];
        index[d] = 0;
      }
    }
  }
  counters.record_read(source_role, count);
  counters.record_write(dest_role, count);
  counters.record_tile_read(source_role, count);
  counters.record_tile_write(dest_role, count);
  return out;
}

Tensor permute(const Tensor& t, std::initializer_list<std::size_t> axes,
               Counters& counters, Role source_role, Role dest_role) {
  return permute(t, std::span<const std::size_t>(axes.begin(), axes.size()),
                 counters, source_role, dest_role);
}

void transpose_tile(std::span<const float> src, std::size_t rows,
                    std::size_t cols, std::span<float> dst) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
  }
}

Tensor transpose_tile_in_scratch(const Tensor& tile) {
  if (tile.rank() != 2) throw ShapeError("transpose_tile needs a 2-D tile");
  Tensor out({tile.dim(1), tile.dim(0)});
  transpose_tile(tile.data(), tile.dim(0), tile.dim(1), out.data());
  return out;
}

}  // namespace blr
