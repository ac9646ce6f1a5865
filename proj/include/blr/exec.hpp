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

#ifndef BLR_EXEC_HPP_
#define BLR_EXEC_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "blr/counters.hpp"
#include "blr/formats.hpp"
#include "blr/tensor.hpp"
#include "blr/tile.hpp"

namespace blr {

// Column order of the (n x o) output of blocked layers.
enum class OutputMode {
  canonical,   // (n, b2, q): column k * q + j
  transposed,  // (n, q, b2): column j * b2 + k
};

std::string_view output_mode_name(OutputMode mode);
std::optional<OutputMode> parse_output_mode(std::string_view name);

// Output column holding element j of output block k.
inline std::size_t output_column(OutputMode mode, std::size_t k, std::size_t j,
                                 std::size_t b2, std::size_t q) {
  return mode == OutputMode::canonical ? k * q + j : j * b2 + k;
}

// Every executable forward path.
enum class PathId {
  dense,
  lowrank,
  lowrank_fused,
  monarch_base,
  monarch_opt,
  blast_base,
  blast_partial,
  blast_reordered,
};

std::string_view path_name(PathId path);
std::optional<PathId> parse_path(std::string_view name);
Method path_method(PathId path);
std::span<const PathId> all_paths();

struct ExecOptions {
  TileConfig tile;
  std::size_t scratch_bytes = kDefaultScratchBytes;
  OutputMode mode = OutputMode::canonical;
  // forward_blast_reordered only: keep Y feature-major (o x n), the layout
  // its last pass produces, for a following layer that consumes it directly.
  // Row order follows `mode`.
  bool feature_major_output = false;
};

struct ForwardResult {
  Tensor y;
  Counters counters;
  double wall_time_s = 0.0;
  OutputMode mode = OutputMode::canonical;
};

// Y = X W through one tiled GEMM.
ForwardResult forward_dense(const Tensor& x, const Tensor& w,
                            const ExecOptions& options = {});

// Z = X V is materialized in global memory, then Y = Z U.
ForwardResult forward_lowrank_baseline(const Tensor& x,
                                       const LowRankFactors& f,
                                       const ExecOptions& options = {});

// One pass with 1-D tiling over n: each task keeps its whole (t_n x r) slice
// of Z in scratch (t_r = r) and never writes it out. Throws
// RankTooLargeForScratch when that does not fit the budget.
ForwardResult forward_lowrank_fully_fused(const Tensor& x,
                                          const LowRankFactors& f,
                                          const ExecOptions& options = {});

// Scratch elements one fully fused task needs for the given rank and the
// tile sizes clipped to (n, i, o).
std::size_t fused_lowrank_scratch_elements(const TileConfig& tile,
                                           std::size_t rank, std::size_t n,
                                           std::size_t i, std::size_t o);
// Largest rank the fully fused kernel accepts when n, i, o are at least as
// large as the tiles.
std::size_t max_fused_lowrank_rank(const TileConfig& tile,
                                   std::size_t scratch_bytes);

// Reference Monarch execution with original V layout (b2_fastest): bmm,
// materialized r' <-> b2 and b2 <-> b1 permutations, bmm, materialized
// output permutation.
ForwardResult forward_monarch_baseline(const Tensor& x,
                                       const MonarchFactors& f,
                                       const ExecOptions& options = {});

// Needs rprime_fastest V. The first bmm scatters its tiles straight into the
// b2-batched layout of the second bmm, which stores Y in the requested mode.
ForwardResult forward_monarch_optimized(const Tensor& x,
                                        const MonarchFactors& f,
                                        const ExecOptions& options = {});

struct MonarchScatterShape {
  std::size_t b1;
  std::size_t b2;
  std::size_t n;
  std::size_t block_rank;
};

// Flat destination in the (b2, n, b1 r') intermediate of lane `lane` of the
// r-tile `r_tile` (width t_r) computed for input block l and token `row`:
// the output block is (r_tile t_r + lane) div r', the innermost index is
// offset by the b1 block, and the store uses the swapped indices.
std::size_t monarch_scatter_destination(const MonarchScatterShape& shape,
                                        std::size_t l, std::size_t row,
                                        std::size_t r_tile, std::size_t lane,
                                        std::size_t t_r);

// bmm, materialized permutation, diagonal scale-and-sum over l, materialized
// permutation, bmm, materialized output permutation. The two permutations
// are kept so that intermediate traffic is 8 b n r: Z1 and Z2 are each
// written once and read once, and each permutation reads and writes one of
// them again.
ForwardResult forward_blast_baseline(const Tensor& x, const BlastFactors& f,
                                     const ExecOptions& options = {});

// Tasks over (n, r) tiles loop over b1 internally, scale each X_l V_l tile by
// the matching S slice and accumulate a (b2, t_n, t_r) tile of Z'' in scratch.
// The scale-and-accumulate is scalar work, not a GEMM.
ForwardResult forward_blast_partial_fused(const Tensor& x,
                                          const BlastFactors& f,
                                          const ExecOptions& options = {});

// Three GEMM passes, no permutation kernels (needs s_t):
//   K1: A (r, b1, n) <- transposed tiles of X_l V_l
//   K2: B (b2, r, n) <- S_T[rho] A[rho] for every rho
//   K3: Y <- transposed tiles of U_k^T B[k]
ForwardResult forward_blast_reordered(const Tensor& x, const BlastFactors& f,
                                      const ExecOptions& options = {});

// Scratch elements the largest task of `path` needs for `spec` and `tile`.
std::size_t required_scratch_elements(PathId path, const WorkloadSpec& spec,
                                      const TileConfig& tile);

}  // namespace blr

#endif  // BLR_EXEC_HPP_
