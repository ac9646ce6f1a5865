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

#include "blr/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blr/error.hpp"

namespace blr {

namespace {

// Column-oriented SVD for rows >= cols. g holds A column-major (cols columns
// of length rows) and is orthogonalized in place; vt accumulates rotations.
void orthogonalize_columns(std::vector<double>& g, std::vector<double>& v,
                           std::size_t rows, std::size_t cols,
                           double tolerance, std::size_t max_sweeps) {
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      double* gp = g.data() + p * rows;
      for (std::size_t q = p + 1; q < cols; ++q) {
        double* gq = g.data() + q * rows;
        double alpha = 0.0;
        double beta = 0.0;
        double gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += gp[i] * gp[i];
          beta += gq[i] * gq[i];
          gamma += gp[i] * gq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= tolerance * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = gp[i];
          const double y = gq[i];
          gp[i] = c * x - s * y;
          gq[i] = s * x + c * y;
        }
        double* vp = v.data() + p * cols;
        double* vq = v.data() + q * cols;
        for (std::size_t i = 0; i < cols; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) return;
  }
  throw ConvergenceError("Jacobi SVD did not converge in " +
                         std::to_string(max_sweeps) + " sweeps");
}

SvdResult tall_svd(std::span<const double> a, std::size_t rows,
                   std::size_t cols, double tolerance, std::size_t max_sweeps) {
  std::vector<double> g(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) g[j * rows + i] = a[i * cols + j];
  }
  // v stored column-major too: column j of V is v[j * cols : (j+1) * cols].
  std::vector<double> v(cols * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) v[j * cols + j] = 1.0;
  orthogonalize_columns(g, v, rows, cols, tolerance, max_sweeps);

  std::vector<double> norms(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rows; ++i) sum += g[j * rows + i] * g[j * rows + i];
    norms[j] = std::sqrt(sum);
  }
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult out;
  out.rows = rows;
  out.cols = cols;
  out.k = cols;
  out.u.assign(rows * cols, 0.0);
  out.s.resize(cols);
  out.v.resize(cols * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const std::size_t j = order[c];
    const double sigma = norms[j];
    out.s[c] = sigma;
    for (std::size_t i = 0; i < rows; ++i) {
      out.u[i * cols + c] = sigma > 0.0 ? g[j * rows + i] / sigma : 0.0;
    }
    for (std::size_t i = 0; i < cols; ++i) out.v[i * cols + c] = v[j * cols + i];
  }
  return out;
}

}  // namespace

SvdResult jacobi_svd(std::span<const double> a, std::size_t rows,
                     std::size_t cols, double tolerance,
                     std::size_t max_sweeps) {
  if (a.size() != rows * cols) throw ShapeError("jacobi_svd: size mismatch");
  if (rows >= cols) return tall_svd(a, rows, cols, tolerance, max_sweeps);

  std::vector<double> at(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) at[j * rows + i] = a[i * cols + j];
  }
  SvdResult t = tall_svd(at, cols, rows, tolerance, max_sweeps);
  SvdResult out;
  out.rows = rows;
  out.cols = cols;
  out.k = t.k;
  out.u = std::move(t.v);
  out.v = std::move(t.u);
  out.s = std::move(t.s);
  return out;
}

}  // namespace blr
