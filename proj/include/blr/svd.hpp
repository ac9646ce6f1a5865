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

#ifndef BLR_SVD_HPP_
#define BLR_SVD_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace blr {

// Thin SVD A = U diag(s) V^T of a row-major rows x cols matrix, k = min(rows,
// cols). Singular values are sorted descending. u is rows x k, v is cols x k,
// both row-major.
struct SvdResult {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t k = 0;
  std::vector<double> u;
  std::vector<double> s;
  std::vector<double> v;
};

// One-sided (Hestenes) Jacobi SVD with a cyclic, fixed sweep order. A column
// pair is rotated while |<a_p, a_q>| > tolerance * |a_p| |a_q|. Throws
// ConvergenceError if a sweep still rotates after max_sweeps.
SvdResult jacobi_svd(std::span<const double> a, std::size_t rows,
                     std::size_t cols, double tolerance = 1e-10,
                     std::size_t max_sweeps = 80);

}  // namespace blr

#endif  // BLR_SVD_HPP_
