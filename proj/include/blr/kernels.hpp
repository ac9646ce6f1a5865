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

#ifndef BLR_KERNELS_HPP_
#define BLR_KERNELS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "blr/counters.hpp"
#include "blr/tensor.hpp"
#include "blr/tile.hpp"

namespace blr {

// Read-only strided 2-D window into a global array.
struct ConstMatrixView {
  const float* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_stride = 0;
  std::size_t col_stride = 1;

  float operator()(std::size_t r, std::size_t c) const {
    return data[r * row_stride + c * col_stride];
  }
  ConstMatrixView transposed() const {
    return {data, cols, rows, col_stride, row_stride};
  }
};

struct MatrixView {
  float* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_stride = 0;
  std::size_t col_stride = 1;

  float& operator()(std::size_t r, std::size_t c) const {
    return data[r * row_stride + c * col_stride];
  }
  operator ConstMatrixView() const {
    return {data, rows, cols, row_stride, col_stride};
  }
};

// Whole rank-2 tensor, or slice `batch` of a rank-3 tensor.
ConstMatrixView matrix_view(const Tensor& t);
MatrixView matrix_view(Tensor& t);
ConstMatrixView batch_view(const Tensor& t, std::size_t batch);
MatrixView batch_view(Tensor& t, std::size_t batch);

// Number of worker threads used for tile tasks. Defaults to the hardware
// concurrency; 1 runs every task inline on the calling thread.
std::size_t worker_threads();
void set_worker_threads(std::size_t threads);

// Runs `count` independent tile tasks. Each task gets a private Counters that
// is summed into `counters` after all tasks have joined.
void run_tile_tasks(std::size_t count,
                    const std::function<void(std::size_t, Counters&)>& task,
                    Counters& counters);

// Private scratch owned by one tile task.
class TileScratch {
 public:
  TileScratch(const GemmTile& tile, std::size_t extra_elements = 0);

  std::span<float> a() { return a_; }
  std::span<float> b() { return b_; }
  std::span<float> acc() { return acc_; }
  std::span<float> extra() { return extra_; }

 private:
  std::vector<float> a_;
  std::vector<float> b_;
  std::vector<float> acc_;
  std::vector<float> extra_;
};

// The dot() building block of every kernel: accumulates
//   acc[rows x cols] = a[row0 : row0 + rows, :] * b[:, col0 : col0 + cols]
// by walking the contraction dimension in chunks of tile.inner. Operand tiles
// are copied into scratch; each copy is one tile-region read. acc is
// row-major with leading dimension `cols` and is overwritten. Accumulation
// runs in ascending contraction order, independent of the tiling.
void tile_dot(ConstMatrixView a, ConstMatrixView b, std::size_t row0,
              std::size_t col0, std::size_t rows, std::size_t cols,
              std::size_t inner, TileScratch& scratch, std::span<float> acc,
              Counters& counters, Role a_role, Role b_role);

struct GemmRoles {
  Role a = Role::input;
  Role b = Role::weight;
  Role c = Role::output;
};

// C = A * B over a 2-D grid of output tiles. Records region traffic for the
// three arrays, tile traffic per task and 2*rows*inner*cols FLOP.
void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView c,
          const GemmTile& tile, std::size_t scratch_bytes, Counters& counters,
          GemmRoles roles = {});

// Tensor-level GEMM of (n x k) by (k x m), tiled as rows=t_n, cols=t_q,
// inner=t_p.
Tensor tiled_gemm(const Tensor& a, const Tensor& b, const TileConfig& tile,
                  Counters& counters,
                  std::size_t scratch_bytes = kDefaultScratchBytes,
                  GemmRoles roles = {});

// (b x n x k) by (b x k x m); batches are independent.
Tensor batched_gemm(const Tensor& a, const Tensor& b, const TileConfig& tile,
                    Counters& counters,
                    std::size_t scratch_bytes = kDefaultScratchBytes,
                    GemmRoles roles = {});

// Materialized copy with out.shape[d] = t.shape[axes[d]]. Always a copy, even
// for the identity permutation; counts one read and one write per element.
Tensor permute(const Tensor& t, std::span<const std::size_t> axes,
               Counters& counters, Role source_role = Role::intermediate,
               Role dest_role = Role::intermediate);
Tensor permute(const Tensor& t, std::initializer_list<std::size_t> axes,
               Counters& counters, Role source_role = Role::intermediate,
               Role dest_role = Role::intermediate);

// In-scratch transpose of a rows x cols row-major block into cols x rows.
// No global traffic.
void transpose_tile(std::span<const float> src, std::size_t rows,
                    std::size_t cols, std::span<float> dst);
Tensor transpose_tile_in_scratch(const Tensor& tile);

}  // namespace blr

#endif  // BLR_KERNELS_HPP_
