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

#ifndef BLR_FORMATS_HPP_
#define BLR_FORMATS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blr/tensor.hpp"

namespace blr {

enum class Method { dense, low_rank, monarch, blast };

std::string_view method_name(Method method);
// Accepts the canonical names plus the spellings "lowrank" and "low-rank".
std::optional<Method> parse_method(std::string_view name);

// Shape of one linear layer: X (n x i) times a structured (i x o) weight.
// `b` is the block count for Monarch/BLAST (b1 = b2 = b) and ignored otherwise.
struct WorkloadSpec {
  Method method = Method::dense;
  std::size_t n = 1;
  std::size_t i = 1;
  std::size_t o = 1;
  std::size_t r = 1;
  std::size_t b = 1;

  // Throws ShapeError naming the violated rule.
  void validate() const;
  std::string to_string() const;

  bool operator==(const WorkloadSpec&) const = default;
};

// W = V U with V: i x r, U: r x o.
struct LowRankFactors {
  Tensor v;
  Tensor u;

  std::size_t rank() const { return v.dim(1); }
  std::size_t in_features() const { return v.dim(0); }
  std::size_t out_features() const { return u.dim(1); }
  void validate() const;
};

// Ordering of the (b2, r') pairs in the middle dimension of Monarch V.
enum class MonarchVLayout {
  b2_fastest,      // position = r' * b2 + k (original storage)
  rprime_fastest,  // position = k * r' + s (after re-layout)
};

// Block (l, k) is V_{l,k} U_{l,k} with
//   V_{l,k}[x, s] = v[l, pos(k, s), x]   v: (b1, r' b2, p)
//   U_{l,k}[s, y] = u[k, y, l r' + s]    u: (b2, q, b1 r')
struct MonarchFactors {
  Tensor v;
  Tensor u;
  std::size_t b1 = 1;
  std::size_t b2 = 1;
  std::size_t block_rank = 1;  // r'
  MonarchVLayout v_layout = MonarchVLayout::b2_fastest;

  std::size_t p() const { return v.dim(2); }
  std::size_t q() const { return u.dim(1); }
  std::size_t in_features() const { return b1 * p(); }
  std::size_t out_features() const { return b2 * q(); }
  std::size_t rank() const { return block_rank * b2; }
  // Index of pair (k, s) inside v's middle dimension for the current layout.
  std::size_t v_position(std::size_t k, std::size_t s) const {
    return v_layout == MonarchVLayout::b2_fastest ? s * b2 + k
                                                  : k * block_rank + s;
  }
  void validate() const;
};

// Block (l, k) is V_l diag(S[l, k, :]) U_k with
//   v: (b1, p, r), s: (b1, b2, r), u: (b2, r, q)
// and the optional pre-transposed s_t: (r, b2, b1), s_t[rho, k, l] = s[l, k, rho].
struct BlastFactors {
  Tensor v;
  Tensor s;
  Tensor u;
  std::optional<Tensor> s_t;

  std::size_t b1() const { return v.dim(0); }
  std::size_t b2() const { return u.dim(0); }
  std::size_t p() const { return v.dim(1); }
  std::size_t q() const { return u.dim(2); }
  std::size_t rank() const { return v.dim(2); }
  std::size_t in_features() const { return b1() * p(); }
  std::size_t out_features() const { return b2() * q(); }
  void validate() const;
};

std::uint64_t param_count(const WorkloadSpec& spec);
std::uint64_t param_count(const LowRankFactors& f);
std::uint64_t param_count(const MonarchFactors& f);
std::uint64_t param_count(const BlastFactors& f);

// Canonical dense weight (i x o): input block l owns rows [l p, (l+1) p),
// output block k owns columns [k q, (k+1) q). Evaluated in double by direct
// summation over the factor definitions; this is the reference for every
// forward path.
Tensor reconstruct_dense(const LowRankFactors& f);
Tensor reconstruct_dense(const MonarchFactors& f);
Tensor reconstruct_dense(const BlastFactors& f);

// Selected columns of the canonical dense weight, row-major i x cols.size(),
// kept in double.
std::vector<double> reconstruct_dense_columns(
    const LowRankFactors& f, std::span<const std::size_t> cols);
std::vector<double> reconstruct_dense_columns(
    const MonarchFactors& f, std::span<const std::size_t> cols);
std::vector<double> reconstruct_dense_columns(
    const BlastFactors& f, std::span<const std::size_t> cols);

// Truncated SVD: V = left vectors scaled by singular values, U = right vectors.
LowRankFactors factor_low_rank(const Tensor& w, std::size_t rank);

// Block-wise truncated SVD with b1 = b2 = blocks, stored with b2_fastest.
MonarchFactors factor_monarch(const Tensor& w, std::size_t blocks,
                              std::size_t block_rank);

enum class BlastInit {
  svd,   // shared subspaces from block rows/columns, S by least squares
  ones,  // same V/U, S filled with ones
};

struct BlastFitOptions {
  std::size_t steps = 300;
  double learning_rate = 1.0;
  // Tikhonov term added to each preconditioner, relative to its mean diagonal.
  double damping = 1e-9;
  BlastInit init = BlastInit::svd;
  // After each step, try current + c (current - previous) and keep it if the
  // loss drops; c doubles on success and resets to 1 on failure.
  bool extrapolate = true;
  // Up to this many parameters every step is a Levenberg-Marquardt step on
  // all factors jointly instead of the alternating updates.
  std::size_t joint_max_params = 600;
  std::uint64_t seed = 0;
};

struct BlastFit {
  BlastFactors factors;
  // Sum of squared block residuals after initialization (entry 0) and after
  // each step.
  std::vector<double> loss_trace;
  double relative_error = 0.0;  // sqrt(final loss) / ||W||_F
};

// Fits sum_{l,k} ||W_{l,k} - V_l S_{l,k} U_k||_F^2. Small problems take
// Levenberg-Marquardt steps on all factors; larger ones take preconditioned
// gradient steps where every factor's gradient is scaled by the inverse Gram
// matrix of the factors it is multiplied with. Throws DivergenceError on a
// non-finite loss.
BlastFit factor_blast(const Tensor& w, std::size_t blocks, std::size_t rank,
                      const BlastFitOptions& options = {});

// Static re-layout of V to rprime_fastest. Throws LayoutError if already done.
MonarchFactors relayout_monarch_v(const MonarchFactors& f);
// Inverse of relayout_monarch_v.
MonarchFactors restore_monarch_v(const MonarchFactors& f);

// Reorders the rows of a downstream weight so that the transposed-mode
// output (column j * b2 + k) times the result equals the canonical output
// (column k * q + j) times w_next.
Tensor prepermute_downstream_weight(const Tensor& w_next, std::size_t b2,
                                    std::size_t q);

// Populates s_t. Throws LayoutError if s_t is already present.
BlastFactors pretranspose_blast_s(const BlastFactors& f);

// Deterministic random factors, normal entries scaled by 1/sqrt(fan-in).
Tensor random_normal(Shape shape, float scale, std::uint64_t seed);
Tensor random_dense(std::size_t i, std::size_t o, std::uint64_t seed);
LowRankFactors random_low_rank(std::size_t i, std::size_t o, std::size_t r,
                               std::uint64_t seed);
MonarchFactors random_monarch(std::size_t i, std::size_t o, std::size_t b,
                              std::size_t block_rank, std::uint64_t seed);
BlastFactors random_blast(std::size_t i, std::size_t o, std::size_t b,
                          std::size_t r, std::uint64_t seed);

}  // namespace blr

#endif  // BLR_FORMATS_HPP_
