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

#include <gtest/gtest.h>

#include <cmath>

#include "blr/error.hpp"
#include "blr/formats.hpp"
#include "blr/svd.hpp"
#include "oracle.hpp"

namespace blr {
namespace {

using oracle::MatrixD;

TEST(ParamCount, Formulas) {
  EXPECT_EQ(param_count(WorkloadSpec{Method::dense, 1, 4, 4, 1, 1}), 16u);
  EXPECT_EQ(param_count(WorkloadSpec{Method::low_rank, 1, 4096, 4096, 1024, 1}),
            8388608u);
  EXPECT_EQ(param_count(WorkloadSpec{Method::blast, 1, 4096, 4096, 1024, 16}),
            1024u * (4096 + 4096 + 256));
}

TEST(ParamCount, LowRankEqualsSymmetricMonarch) {
  for (std::size_t b : {1, 2, 4, 8}) {
    const WorkloadSpec m{Method::monarch, 1, 64, 128, 8 * b, b};
    const WorkloadSpec lr{Method::low_rank, 1, 64, 128, 8 * b, 1};
    EXPECT_EQ(param_count(m), param_count(lr));
    EXPECT_EQ(param_count(random_monarch(64, 128, b, 8, 1)), param_count(m));
  }
}

TEST(ParamCount, ContainersAgreeWithSpecs) {
  EXPECT_EQ(param_count(random_low_rank(12, 20, 3, 1)),
            param_count(WorkloadSpec{Method::low_rank, 1, 12, 20, 3, 1}));
  EXPECT_EQ(param_count(random_blast(12, 18, 3, 5, 1)),
            param_count(WorkloadSpec{Method::blast, 1, 12, 18, 5, 3}));
}

TEST(WorkloadSpec, RejectsBadDivisibility) {
  EXPECT_THROW((WorkloadSpec{Method::blast, 1, 10, 12, 4, 4}.validate()), ShapeError);
  EXPECT_THROW((WorkloadSpec{Method::monarch, 1, 8, 8, 6, 4}.validate()), ShapeError);
  EXPECT_NO_THROW((WorkloadSpec{Method::low_rank, 1, 10, 12, 4, 4}.validate()));
}

TEST(Reconstruct, BlastHandCase) {
  BlastFactors f{Tensor({1, 2, 1}, {1, 0}), Tensor({1, 1, 1}, {2}),
                 Tensor({1, 1, 2}, {3, 4}), std::nullopt};
  EXPECT_EQ(reconstruct_dense(f), Tensor::from_rows({{6, 8}, {0, 0}}));
}

TEST(Reconstruct, PaddedIdentityExposesU) {
  Tensor v({5, 2});
  v.at({0, 0}) = 1;
  v.at({1, 1}) = 1;
  const Tensor u = random_normal({2, 3}, 1.0f, 1);
  const Tensor w = reconstruct_dense(LowRankFactors{v, u});
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(w.at({r, c}), u.at({r, c}));
  }
}

TEST(Reconstruct, SingleBlockMonarchIsLowRank) {
  const MonarchFactors m = random_monarch(6, 7, 1, 3, 2);
  LowRankFactors lr{Tensor({6, 3}), Tensor({3, 7})};
  for (std::size_t x = 0; x < 6; ++x) {
    for (std::size_t s = 0; s < 3; ++s) lr.v.at({x, s}) = m.v.at({0, s, x});
  }
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t y = 0; y < 7; ++y) lr.u.at({s, y}) = m.u.at({0, y, s});
  }
  EXPECT_LE(oracle::rel_err(reconstruct_dense(m), reconstruct_dense(lr)), 1e-6);
}

TEST(Reconstruct, MatchesIndependentDefinitions) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto lr = random_low_rank(9, 11, 4, seed);
    EXPECT_LE(oracle::rel_err(reconstruct_dense(lr), oracle::dense_of(lr)), 1e-6);
    const auto m = random_monarch(12, 8, 4, 3, seed);
    EXPECT_LE(oracle::rel_err(reconstruct_dense(m), oracle::dense_of(m)), 1e-6);
    const auto b = random_blast(9, 12, 3, 5, seed);
    EXPECT_LE(oracle::rel_err(reconstruct_dense(b), oracle::dense_of(b)), 1e-6);
  }
}

TEST(Reconstruct, ColumnsAgreeWithFullMatrix) {
  const auto b = random_blast(8, 12, 2, 3, 4);
  const Tensor w = reconstruct_dense(b);
  const std::vector<std::size_t> cols = {0, 5, 11};
  const auto part = reconstruct_dense_columns(b, cols);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      EXPECT_NEAR(part[r * 3 + j], w.at({r, cols[j]}), 1e-6);
    }
  }
}

TEST(Svd, MatchesEigenSingularValues) {
  const Tensor a = random_normal({17, 11}, 1.0f, 5);
  std::vector<double> ad(a.data().begin(), a.data().end());
  const SvdResult ours = jacobi_svd(ad, 17, 11);
  Eigen::JacobiSVD<MatrixD> ref(oracle::to_eigen(a));
  ASSERT_EQ(ours.s.size(), 11u);
  for (std::size_t j = 0; j < 11; ++j) {
    EXPECT_NEAR(ours.s[j], ref.singularValues()(j), 1e-9);
  }
}

TEST(Svd, WideMatrixReconstructs) {
  const Tensor a = random_normal({5, 9}, 1.0f, 6);
  std::vector<double> ad(a.data().begin(), a.data().end());
  const SvdResult s = jacobi_svd(ad, 5, 9);
  MatrixD recon = MatrixD::Zero(5, 9);
  for (std::size_t j = 0; j < s.k; ++j) {
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 9; ++c) {
        recon(r, c) += s.u[r * s.k + j] * s.s[j] * s.v[c * s.k + j];
      }
    }
  }
  EXPECT_LE((recon - oracle::to_eigen(a)).norm(), 1e-9);
}

TEST(FactorLowRank, RankOneIsExact) {
  Tensor w({6, 4});
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 4; ++c) w.at({r, c}) = float(r + 1) * float(c + 2);
  }
  const auto f = factor_low_rank(w, 1);
  EXPECT_LE(oracle::rel_err(reconstruct_dense(f), w), 1e-5);
}

TEST(FactorLowRank, DiagonalDropsSmallestValue) {
  const Tensor w = Tensor::from_rows({{3, 0, 0}, {0, 2, 0}, {0, 0, 1}});
  const auto f = factor_low_rank(w, 2);
  const double err =
      (oracle::to_eigen(reconstruct_dense(f)) - oracle::to_eigen(w)).norm();
  EXPECT_NEAR(err, 1.0, 1e-5);
}

TEST(FactorLowRank, MatchesEckartYoungOptimum) {
  const Tensor w = random_normal({32, 24}, 1.0f, 7);
  const auto f = factor_low_rank(w, 8);
  const double err =
      (oracle::to_eigen(reconstruct_dense(f)) - oracle::to_eigen(w)).norm();
  EXPECT_NEAR(err, oracle::eckart_young_error(w, 8), 1e-4);
}

TEST(FactorLowRank, RejectsBadRank) {
  EXPECT_THROW(factor_low_rank(Tensor({4, 3}), 0), ShapeError);
  EXPECT_THROW(factor_low_rank(Tensor({4, 3}), 4), ShapeError);
}

TEST(FactorMonarch, RecoversStructuredWeight) {
  const auto truth = random_monarch(24, 16, 4, 2, 8);
  const Tensor w = reconstruct_dense(truth);
  const auto f = factor_monarch(w, 4, 2);
  EXPECT_EQ(f.v_layout, MonarchVLayout::b2_fastest);
  EXPECT_LE(oracle::rel_err(reconstruct_dense(f), w), 1e-4);
}

TEST(FactorMonarch, SingleBlockEqualsLowRank) {
  const Tensor w = random_normal({10, 8}, 1.0f, 9);
  EXPECT_LE(oracle::rel_err(reconstruct_dense(factor_monarch(w, 1, 3)),
                            reconstruct_dense(factor_low_rank(w, 3))),
            1e-5);
}

TEST(FactorMonarch, PerBlockErrorIsOptimal) {
  const Tensor w = random_normal({8, 8}, 1.0f, 10);
  const auto f = factor_monarch(w, 2, 1);
  const MatrixD diff = oracle::to_eigen(reconstruct_dense(f)) - oracle::to_eigen(w);
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t k = 0; k < 2; ++k) {
      Tensor block({4, 4});
      for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
          block.at({r, c}) = w.at({l * 4 + r, k * 4 + c});
        }
      }
      EXPECT_NEAR(diff.block(l * 4, k * 4, 4, 4).norm(),
                  oracle::eckart_young_error(block, 1), 1e-5);
    }
  }
}

TEST(FactorMonarch, RejectsBadDivisibility) {
  EXPECT_THROW(factor_monarch(Tensor({9, 8}), 2, 1), ShapeError);
}

TEST(FactorBlast, RecoversStructuredWeight) {
  const auto truth = random_blast(16, 16, 2, 4, 11);
  const Tensor w = reconstruct_dense(truth);
  const BlastFit fit = factor_blast(w, 2, 4);
  EXPECT_LE(fit.relative_error, 1e-3);
  EXPECT_LE(oracle::rel_err(reconstruct_dense(fit.factors), w), 1e-3);
}

TEST(FactorBlast, SingleBlockOnesInitFitsRankR) {
  const Tensor w = reconstruct_dense(random_low_rank(12, 10, 3, 12));
  BlastFitOptions options;
  options.init = BlastInit::ones;
  const BlastFit fit = factor_blast(w, 1, 3, options);
  EXPECT_LE(fit.relative_error, 1e-3);
}

TEST(FactorBlast, LossDoesNotIncreaseOverSteps) {
  const Tensor w = random_normal({16, 24}, 1.0f, 13);
  BlastFitOptions options;
  options.steps = 50;
  const BlastFit fit = factor_blast(w, 2, 3, options);
  ASSERT_EQ(fit.loss_trace.size(), 51u);
  EXPECT_LE(fit.loss_trace.back(), fit.loss_trace[1]);
  EXPECT_NEAR(std::sqrt(fit.loss_trace.back()) /
                  oracle::to_eigen(w).norm(),
              fit.relative_error, 1e-9);
}

TEST(FactorBlast, ReportsDivergence) {
  Tensor w = random_normal({8, 8}, 1.0f, 14);
  w[3] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(factor_blast(w, 2, 2), Error);
}

TEST(Relayout, HandIndexBookkeeping) {
  MonarchFactors f;
  f.b1 = 1;
  f.b2 = 2;
  f.block_rank = 2;
  // Entry value encodes (b2 index, r' index) = (k, s) as 10 k + s.
  f.v = Tensor({1, 4, 1}, {0, 10, 1, 11});
  f.u = Tensor({2, 1, 2});
  const auto g = relayout_monarch_v(f);
  EXPECT_EQ(g.v_layout, MonarchVLayout::rprime_fastest);
  EXPECT_EQ(g.v, Tensor({1, 4, 1}, {0, 1, 10, 11}));
  EXPECT_THROW(relayout_monarch_v(g), LayoutError);
}

TEST(Relayout, RoundTripAndDenseUnchanged) {
  const auto f = random_monarch(12, 18, 3, 2, 15);
  const auto g = relayout_monarch_v(f);
  EXPECT_EQ(restore_monarch_v(g).v, f.v);
  EXPECT_EQ(reconstruct_dense(g), reconstruct_dense(f));
  EXPECT_LE(oracle::rel_err(reconstruct_dense(g), oracle::dense_of(g)), 1e-6);
}

TEST(PrepermuteDownstream, SingleBlockIsIdentity) {
  const Tensor w = random_normal({6, 3}, 1.0f, 16);
  EXPECT_EQ(prepermute_downstream_weight(w, 1, 6), w);
}

TEST(PrepermuteDownstream, FourRowHandCase) {
  const Tensor w({4, 1}, {0, 1, 2, 3});
  EXPECT_EQ(prepermute_downstream_weight(w, 2, 2), Tensor({4, 1}, {0, 2, 1, 3}));
}

TEST(PrepermuteDownstream, BruteForceIndexMap) {
  // Transposed column j b2 + k holds canonical column k q + j.
  for (std::size_t b2 : {2, 3}) {
    for (std::size_t q : {2, 5}) {
      const std::size_t o = b2 * q;
      Tensor w({o, 1});
      for (std::size_t r = 0; r < o; ++r) w[r] = float(r);
      const Tensor pre = prepermute_downstream_weight(w, b2, q);
      for (std::size_t k = 0; k < b2; ++k) {
        for (std::size_t j = 0; j < q; ++j) {
          EXPECT_EQ(pre[j * b2 + k], w[k * q + j]);
        }
      }
    }
  }
  EXPECT_THROW(prepermute_downstream_weight(Tensor({5, 1}), 2, 2), ShapeError);
}

TEST(PretransposeS, SingleBlockKeepsValues) {
  const auto f = random_blast(4, 4, 1, 3, 17);
  const auto g = pretranspose_blast_s(f);
  ASSERT_TRUE(g.s_t.has_value());
  EXPECT_EQ(std::vector<float>(g.s_t->data().begin(), g.s_t->data().end()),
            std::vector<float>(f.s.data().begin(), f.s.data().end()));
  EXPECT_THROW(pretranspose_blast_s(g), LayoutError);
}

TEST(PretransposeS, IndexOracleAndRoundTrip) {
  BlastFactors f = random_blast(4, 6, 2, 4, 18);
  f.s = random_normal({2, 3, 4}, 1.0f, 19);
  f.u = random_normal({3, 4, 2}, 1.0f, 20);
  const auto g = pretranspose_blast_s(f);
  EXPECT_EQ(g.s_t->shape(), (Shape{4, 3, 2}));
  Tensor back({2, 3, 4});
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t rho = 0; rho < 4; ++rho) {
        EXPECT_EQ(g.s_t->at({rho, k, l}), f.s.at({l, k, rho}));
        back.at({l, k, rho}) = g.s_t->at({rho, k, l});
      }
    }
  }
  EXPECT_EQ(back, f.s);
  EXPECT_EQ(reconstruct_dense(g), reconstruct_dense(f));
}

}  // namespace
}  // namespace blr
