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

#include "blr/formats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "blr/error.hpp"
#include "blr/svd.hpp"

namespace blr {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<double> to_double(const Tensor& t) {
  return {t.data().begin(), t.data().end()};
}

Tensor from_double(Shape shape, const std::vector<double>& values) {
  std::vector<float> data(values.begin(), values.end());
  return Tensor(std::move(shape), std::move(data));
}

std::vector<std::size_t> all_columns(std::size_t o) {
  std::vector<std::size_t> cols(o);
  for (std::size_t c = 0; c < o; ++c) cols[c] = c;
  return cols;
}

void check_columns(std::span<const std::size_t> cols, std::size_t o) {
  for (std::size_t c : cols) require(c < o, "column index out of range");
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::dense:
      return "dense";
    case Method::low_rank:
      return "lowrank";
    case Method::monarch:
      return "monarch";
    case Method::blast:
      return "blast";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  const std::string key = lower(name);
  if (key == "dense") return Method::dense;
  if (key == "lowrank" || key == "low-rank" || key == "low_rank") {
    return Method::low_rank;
  }
  if (key == "monarch") return Method::monarch;
  if (key == "blast") return Method::blast;
  return std::nullopt;
}

void WorkloadSpec::validate() const {
  require(n >= 1 && i >= 1 && o >= 1, "n, i and o must be positive");
  if (method == Method::dense) return;
  require(r >= 1, "rank must be positive");
  if (method == Method::low_rank) return;
  require(b >= 1, "block count must be positive");
  require(i % b == 0, "b=" + std::to_string(b) + " does not divide i=" +
                          std::to_string(i));
  require(o % b == 0, "b=" + std::to_string(b) + " does not divide o=" +
                          std::to_string(o));
  if (method == Method::monarch) {
    require(r % b == 0, "Monarch rank r=" + std::to_string(r) +
                            " is not a multiple of b=" + std::to_string(b));
  }
}

std::string WorkloadSpec::to_string() const {
  return std::string(method_name(method)) + "(n=" + std::to_string(n) +
         ", i=" + std::to_string(i) + ", o=" + std::to_string(o) +
         ", r=" + std::to_string(r) + ", b=" + std::to_string(b) + ")";
}

void LowRankFactors::validate() const {
  require(v.rank() == 2 && u.rank() == 2, "low-rank factors must be 2-D");
  require(v.dim(1) == u.dim(0), "low-rank V columns != U rows");
  require(rank() >= 1, "low-rank rank must be positive");
}

void MonarchFactors::validate() const {
  require(v.rank() == 3 && u.rank() == 3, "Monarch factors must be 3-D");
  require(b1 >= 1 && b2 >= 1 && block_rank >= 1,
          "Monarch block counts and rank must be positive");
  require(v.dim(0) == b1 && v.dim(1) == block_rank * b2,
          "Monarch V must be (b1, r' b2, p)");
  require(u.dim(0) == b2 && u.dim(2) == b1 * block_rank,
          "Monarch U must be (b2, q, b1 r')");
}

void BlastFactors::validate() const {
  require(v.rank() == 3 && s.rank() == 3 && u.rank() == 3,
          "BLAST factors must be 3-D");
  require(s.dim(0) == b1() && s.dim(1) == b2() && s.dim(2) == rank(),
          "BLAST S must be (b1, b2, r)");
  require(u.dim(1) == rank(), "BLAST U must be (b2, r, q)");
  if (s_t) {
    require(s_t->rank() == 3 && s_t->dim(0) == rank() &&
                s_t->dim(1) == b2() && s_t->dim(2) == b1(),
            "BLAST S_T must be (r, b2, b1)");
  }
}

std::uint64_t param_count(const WorkloadSpec& spec) {
  spec.validate();
  const std::uint64_t i = spec.i, o = spec.o, r = spec.r, b = spec.b;
  switch (spec.method) {
    case Method::dense:
      return i * o;
    case Method::low_rank:
      return r * (i + o);
    case Method::monarch: {
      const std::uint64_t r_block = r / b;
      return b * b * r_block * (i / b + o / b);
    }
    case Method::blast:
      return r * (i + o + b * b);
  }
  return 0;
}

std::uint64_t param_count(const LowRankFactors& f) {
  return f.v.size() + f.u.size();
}

std::uint64_t param_count(const MonarchFactors& f) {
  return f.v.size() + f.u.size();
}

std::uint64_t param_count(const BlastFactors& f) {
  return f.v.size() + f.s.size() + f.u.size();
}

std::vector<double> reconstruct_dense_columns(
    const LowRankFactors& f, std::span<const std::size_t> cols) {
  f.validate();
  const std::size_t i = f.in_features();
  const std::size_t o = f.out_features();
  const std::size_t r = f.rank();
  check_columns(cols, o);
  std::vector<double> w(i * cols.size(), 0.0);
  for (std::size_t a = 0; a < i; ++a) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double sum = 0.0;
      for (std::size_t rho = 0; rho < r; ++rho) {
        sum += static_cast<double>(f.v[a * r + rho]) * f.u[rho * o + cols[c]];
      }
      w[a * cols.size() + c] = sum;
    }
  }
  return w;
}

std::vector<double> reconstruct_dense_columns(
    const MonarchFactors& f, std::span<const std::size_t> cols) {
  f.validate();
  const std::size_t p = f.p(), q = f.q(), rb = f.block_rank;
  const std::size_t i = f.in_features();
  const std::size_t mid = f.v.dim(1);
  const std::size_t u_inner = f.u.dim(2);
  check_columns(cols, f.out_features());
  std::vector<double> w(i * cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const std::size_t k = cols[c] / q;
    const std::size_t y = cols[c] % q;
    for (std::size_t l = 0; l < f.b1; ++l) {
      for (std::size_t x = 0; x < p; ++x) {
        double sum = 0.0;
        for (std::size_t s = 0; s < rb; ++s) {
          const double v = f.v[(l * mid + f.v_position(k, s)) * p + x];
          const double u = f.u[(k * q + y) * u_inner + l * rb + s];
          sum += v * u;
        }
        w[(l * p + x) * cols.size() + c] = sum;
      }
    }
  }
  return w;
}

std::vector<double> reconstruct_dense_columns(
    const BlastFactors& f, std::span<const std::size_t> cols) {
  f.validate();
  const std::size_t b1 = f.b1(), b2 = f.b2(), p = f.p(), q = f.q(),
                    r = f.rank();
  const std::size_t i = f.in_features();
  check_columns(cols, f.out_features());
  std::vector<double> w(i * cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const std::size_t k = cols[c] / q;
    const std::size_t y = cols[c] % q;
    for (std::size_t l = 0; l < b1; ++l) {
      for (std::size_t x = 0; x < p; ++x) {
        double sum = 0.0;
        for (std::size_t rho = 0; rho < r; ++rho) {
          sum += static_cast<double>(f.v[(l * p + x) * r + rho]) *
                 f.s[(l * b2 + k) * r + rho] * f.u[(k * r + rho) * q + y];
        }
        w[(l * p + x) * cols.size() + c] = sum;
      }
    }
  }
  return w;
}

Tensor reconstruct_dense(const LowRankFactors& f) {
  const auto cols = all_columns(f.out_features());
  return from_double({f.in_features(), f.out_features()},
                     reconstruct_dense_columns(f, cols));
}

Tensor reconstruct_dense(const MonarchFactors& f) {
  f.validate();
  const auto cols = all_columns(f.out_features());
  return from_double({f.in_features(), f.out_features()},
                     reconstruct_dense_columns(f, cols));
}

Tensor reconstruct_dense(const BlastFactors& f) {
  f.validate();
  const auto cols = all_columns(f.out_features());
  return from_double({f.in_features(), f.out_features()},
                     reconstruct_dense_columns(f, cols));
}

LowRankFactors factor_low_rank(const Tensor& w, std::size_t rank) {
  require(w.rank() == 2, "factor_low_rank needs a 2-D weight");
  const std::size_t i = w.dim(0), o = w.dim(1);
  require(rank >= 1 && rank <= std::min(i, o),
          "rank " + std::to_string(rank) + " outside [1, min(i, o)]");
  const SvdResult svd = jacobi_svd(to_double(w), i, o);
  LowRankFactors f{Tensor({i, rank}), Tensor({rank, o})};
  for (std::size_t a = 0; a < i; ++a) {
    for (std::size_t rho = 0; rho < rank; ++rho) {
      f.v[a * rank + rho] =
          static_cast<float>(svd.u[a * svd.k + rho] * svd.s[rho]);
    }
  }
  for (std::size_t rho = 0; rho < rank; ++rho) {
    for (std::size_t c = 0; c < o; ++c) {
      f.u[rho * o + c] = static_cast<float>(svd.v[c * svd.k + rho]);
    }
  }
  return f;
}

MonarchFactors factor_monarch(const Tensor& w, std::size_t blocks,
                              std::size_t block_rank) {
  require(w.rank() == 2, "factor_monarch needs a 2-D weight");
  const std::size_t i = w.dim(0), o = w.dim(1);
  require(blocks >= 1 && i % blocks == 0 && o % blocks == 0,
          "b=" + std::to_string(blocks) + " must divide i=" +
              std::to_string(i) + " and o=" + std::to_string(o));
  const std::size_t p = i / blocks, q = o / blocks;
  require(block_rank >= 1 && block_rank <= std::min(p, q),
          "block rank " + std::to_string(block_rank) + " outside [1, min(p, q)]");

  MonarchFactors f;
  f.b1 = blocks;
  f.b2 = blocks;
  f.block_rank = block_rank;
  f.v_layout = MonarchVLayout::b2_fastest;
  f.v = Tensor({blocks, block_rank * blocks, p});
  f.u = Tensor({blocks, q, blocks * block_rank});
  const std::size_t mid = block_rank * blocks;
  const std::size_t u_inner = blocks * block_rank;

  std::vector<double> block(p * q);
  for (std::size_t l = 0; l < blocks; ++l) {
    for (std::size_t k = 0; k < blocks; ++k) {
      for (std::size_t x = 0; x < p; ++x) {
        for (std::size_t y = 0; y < q; ++y) {
          block[x * q + y] = w[(l * p + x) * o + k * q + y];
        }
      }
      const SvdResult svd = jacobi_svd(block, p, q);
      for (std::size_t s = 0; s < block_rank; ++s) {
        for (std::size_t x = 0; x < p; ++x) {
          f.v[(l * mid + f.v_position(k, s)) * p + x] =
              static_cast<float>(svd.u[x * svd.k + s] * svd.s[s]);
        }
        for (std::size_t y = 0; y < q; ++y) {
          f.u[(k * q + y) * u_inner + l * block_rank + s] =
              static_cast<float>(svd.v[y * svd.k + s]);
        }
      }
    }
  }
  return f;
}

MonarchFactors relayout_monarch_v(const MonarchFactors& f) {
  f.validate();
  if (f.v_layout != MonarchVLayout::b2_fastest) {
    throw LayoutError("Monarch V is already r'-fastest");
  }
  MonarchFactors out = f;
  out.v_layout = MonarchVLayout::rprime_fastest;
  const std::size_t p = f.p(), mid = f.v.dim(1);
  for (std::size_t l = 0; l < f.b1; ++l) {
    for (std::size_t k = 0; k < f.b2; ++k) {
      for (std::size_t s = 0; s < f.block_rank; ++s) {
        const float* src = f.v.raw() + (l * mid + f.v_position(k, s)) * p;
        float* dst = out.v.raw() + (l * mid + out.v_position(k, s)) * p;
        std::copy(src, src + p, dst);
      }
    }
  }
  return out;
}

MonarchFactors restore_monarch_v(const MonarchFactors& f) {
  f.validate();
  if (f.v_layout != MonarchVLayout::rprime_fastest) {
    throw LayoutError("Monarch V is already b2-fastest");
  }
  MonarchFactors out = f;
  out.v_layout = MonarchVLayout::b2_fastest;
  const std::size_t p = f.p(), mid = f.v.dim(1);
  for (std::size_t l = 0; l < f.b1; ++l) {
    for (std::size_t k = 0; k < f.b2; ++k) {
      for (std::size_t s = 0; s < f.block_rank; ++s) {
        const float* src = f.v.raw() + (l * mid + f.v_position(k, s)) * p;
        float* dst = out.v.raw() + (l * mid + out.v_position(k, s)) * p;
        std::copy(src, src + p, dst);
      }
    }
  }
  return out;
}

Tensor prepermute_downstream_weight(const Tensor& w_next, std::size_t b2,
                                    std::size_t q) {
  require(w_next.rank() == 2, "downstream weight must be 2-D");
  require(b2 >= 1 && q >= 1 && w_next.dim(0) == b2 * q,
          "downstream weight has " + std::to_string(w_next.dim(0)) +
              " rows, expected b2 * q = " + std::to_string(b2 * q));
  const std::size_t m = w_next.dim(1);
  Tensor out({b2 * q, m});
  for (std::size_t k = 0; k < b2; ++k) {
    for (std::size_t y = 0; y < q; ++y) {
      const float* src = w_next.raw() + (k * q + y) * m;
      std::copy(src, src + m, out.raw() + (y * b2 + k) * m);
    }
  }
  return out;
}

BlastFactors pretranspose_blast_s(const BlastFactors& f) {
  f.validate();
  if (f.s_t) throw LayoutError("BLAST S_T is already present");
  const std::size_t b1 = f.b1(), b2 = f.b2(), r = f.rank();
  Tensor s_t({r, b2, b1});
  for (std::size_t l = 0; l < b1; ++l) {
    for (std::size_t k = 0; k < b2; ++k) {
      for (std::size_t rho = 0; rho < r; ++rho) {
        s_t[(rho * b2 + k) * b1 + l] = f.s[(l * b2 + k) * r + rho];
      }
    }
  }
  BlastFactors out = f;
  out.s_t = std::move(s_t);
  return out;
}

Tensor random_normal(Shape shape, float scale, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, scale);
  for (float& x : t.data()) x = dist(rng);
  return t;
}

Tensor random_dense(std::size_t i, std::size_t o, std::uint64_t seed) {
  return random_normal({i, o}, 1.0f / std::sqrt(static_cast<float>(i)), seed);
}

LowRankFactors random_low_rank(std::size_t i, std::size_t o, std::size_t r,
                               std::uint64_t seed) {
  return {random_normal({i, r}, 1.0f / std::sqrt(static_cast<float>(i)), seed),
          random_normal({r, o}, 1.0f / std::sqrt(static_cast<float>(r)),
                        seed + 1)};
}

MonarchFactors random_monarch(std::size_t i, std::size_t o, std::size_t b,
                              std::size_t block_rank, std::uint64_t seed) {
  require(b >= 1 && i % b == 0 && o % b == 0,
          "b must divide both i and o for Monarch");
  const std::size_t p = i / b, q = o / b;
  MonarchFactors f;
  f.b1 = b;
  f.b2 = b;
  f.block_rank = block_rank;
  f.v = random_normal({b, block_rank * b, p},
                      1.0f / std::sqrt(static_cast<float>(p)), seed);
  f.u = random_normal({b, q, b * block_rank},
                      1.0f / std::sqrt(static_cast<float>(b * block_rank)),
                      seed + 1);
  return f;
}

BlastFactors random_blast(std::size_t i, std::size_t o, std::size_t b,
                          std::size_t r, std::uint64_t seed) {
  require(b >= 1 && i % b == 0 && o % b == 0,
          "b must divide both i and o for BLAST");
  const std::size_t p = i / b, q = o / b;
  BlastFactors f;
  f.v = random_normal({b, p, r}, 1.0f / std::sqrt(static_cast<float>(p)), seed);
  f.s = random_normal({b, b, r}, 1.0f / std::sqrt(static_cast<float>(b)),
                      seed + 1);
  f.u = random_normal({b, r, q}, 1.0f / std::sqrt(static_cast<float>(r)),
                      seed + 2);
  return f;
}

}  // namespace blr
