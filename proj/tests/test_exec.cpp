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

#include <tuple>

#include "blr/autotune.hpp"
#include "blr/error.hpp"
#include "blr/exec.hpp"
#include "blr/formats.hpp"
#include "blr/kernels.hpp"
#include "oracle.hpp"

namespace blr {
namespace {

using oracle::MatrixD;

ExecOptions with_tile(TileConfig tile, OutputMode mode = OutputMode::canonical) {
  ExecOptions e;
  e.tile = tile;
  e.mode = mode;
  return e;
}

const TileConfig kSmall{16, 16, 16, 16};

MatrixD reference(const Tensor& x, const MatrixD& w) { return oracle::to_eigen(x) * w; }

TEST(Dense, IdentityInputReturnsWeight) {
  Tensor x({5, 5});
  for (std::size_t d = 0; d < 5; ++d) x.at({d, d}) = 1;
  const Tensor w = random_normal({5, 7}, 1.0f, 1);
  EXPECT_EQ(forward_dense(x, w).y, w);
}

TEST(Dense, ScalarCase) {
  const auto r = forward_dense(Tensor({1, 1}, {2}), Tensor({1, 1}, {3}));
  EXPECT_EQ(r.y[0], 6.0f);
  EXPECT_EQ(r.counters.flops(), 2u);
}

TEST(Dense, MatchesNaiveOracle) {
  const Tensor x = random_normal({8, 8}, 1.0f, 2), w = random_normal({8, 8}, 1.0f, 3);
  const auto r = forward_dense(x, w);
  EXPECT_LE(oracle::rel_err(r.y, oracle::naive_matmul(x, w)), 1e-5);
  EXPECT_EQ(r.counters.flops(), 2u * 8 * 8 * 8);
  EXPECT_EQ(r.counters.intermediate_elements(), 0u);
  EXPECT_THROW(forward_dense(Tensor({2, 3}), w), ShapeError);
}

TEST(LowRank, FullRankSvdEqualsDense) {
  const Tensor x = random_normal({9, 12}, 1.0f, 4), w = random_normal({12, 10}, 1.0f, 5);
  const auto f = factor_low_rank(w, 10);
  EXPECT_LE(oracle::rel_err(forward_lowrank_baseline(x, f).y, forward_dense(x, w).y),
            1e-4);
}

TEST(LowRank, IntermediateTrafficIsTwoNR) {
  for (auto [n, i, o, r] : {std::tuple{3, 20, 17, 5}, std::tuple{40, 33, 64, 16},
                            std::tuple{1, 8, 8, 1}}) {
    const auto f = random_low_rank(i, o, r, 6);
    const auto res = forward_lowrank_baseline(random_normal({std::size_t(n), std::size_t(i)}, 1.0f, 7), f,
                                              with_tile(kSmall));
    EXPECT_EQ(res.counters.intermediate_elements(), 2u * n * r);
    EXPECT_EQ(res.counters.flops(), 2u * n * r * (i + o));
  }
}

TEST(LowRank, MatchesOracle) {
  const auto f = random_low_rank(30, 22, 6, 8);
  const Tensor x = random_normal({11, 30}, 1.0f, 9);
  EXPECT_LE(oracle::rel_err(forward_lowrank_baseline(x, f).y,
                            reference(x, oracle::dense_of(f))),
            1e-4);
}

TEST(LowRankFused, SmallRankMatchesBaselineWithoutIntermediates) {
  const auto f = random_low_rank(64, 64, 8, 10);
  const Tensor x = random_normal({32, 64}, 1.0f, 11);
  const auto fused = forward_lowrank_fully_fused(x, f);
  EXPECT_LE(oracle::rel_err(fused.y, forward_lowrank_baseline(x, f).y), 1e-5);
  EXPECT_EQ(fused.counters.intermediate_bytes(2), 0u);
  EXPECT_EQ(fused.counters.tile_traffic(Role::intermediate).total(), 0u);
  EXPECT_EQ(fused.counters.flops(), 2u * 32 * 8 * 128);
}

TEST(LowRankFused, RankBeyondBudgetThrows) {
  const TileConfig tile{};
  const std::size_t limit = max_fused_lowrank_rank(tile, kDefaultScratchBytes);
  const auto f = random_low_rank(64, 64, limit + 1, 12);
  try {
    forward_lowrank_fully_fused(random_normal({64, 64}, 1.0f, 13), f);
    FAIL() << "expected RankTooLargeForScratch";
  } catch (const RankTooLargeForScratch& e) {
    EXPECT_EQ(e.rank(), limit + 1);
    EXPECT_EQ(e.max_rank(), limit);
  }
}

TEST(LowRankFused, OuterProductCase) {
  const auto f = random_low_rank(10, 6, 1, 14);
  const Tensor x = random_normal({4, 10}, 1.0f, 15);
  EXPECT_LE(oracle::rel_err(forward_lowrank_fully_fused(x, f).y,
                            reference(x, oracle::dense_of(f))),
            1e-5);
}

TEST(MonarchBaseline, SingleBlockEqualsLowRank) {
  const auto m = random_monarch(12, 9, 1, 4, 16);
  LowRankFactors lr{Tensor({12, 4}), Tensor({4, 9})};
  for (std::size_t x = 0; x < 12; ++x) {
    for (std::size_t s = 0; s < 4; ++s) lr.v.at({x, s}) = m.v.at({0, s, x});
  }
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t y = 0; y < 9; ++y) lr.u.at({s, y}) = m.u.at({0, y, s});
  }
  const Tensor x = random_normal({5, 12}, 1.0f, 17);
  EXPECT_LE(oracle::rel_err(forward_monarch_baseline(x, m).y,
                            forward_lowrank_baseline(x, lr).y),
            1e-5);
}

TEST(MonarchBaseline, SmallCaseMatchesOracle) {
  const auto m = random_monarch(8, 8, 2, 1, 18);
  const Tensor x = random_normal({4, 8}, 1.0f, 19);
  EXPECT_LE(oracle::rel_err(forward_monarch_baseline(x, m).y,
                            reference(x, oracle::dense_of(m))),
            1e-4);
}

TEST(MonarchBaseline, IntermediateTrafficIsSixBNR) {
  const std::size_t b = 4, rp = 3, n = 10;
  const auto m = random_monarch(16, 20, b, rp, 20);
  const auto res = forward_monarch_baseline(random_normal({n, 16}, 1.0f, 21), m);
  const std::size_t r = rp * b;
  EXPECT_EQ(res.counters.intermediate_elements(), 6 * b * n * r);
  EXPECT_EQ(res.counters.flops(), 2 * n * b * b * rp * (4 + 5));
}

TEST(MonarchBaseline, RequiresOriginalLayout) {
  const auto m = relayout_monarch_v(random_monarch(8, 8, 2, 1, 22));
  EXPECT_THROW(forward_monarch_baseline(Tensor({2, 8}), m), LayoutError);
  EXPECT_THROW(forward_monarch_optimized(Tensor({2, 8}), random_monarch(8, 8, 2, 1, 22)),
               LayoutError);
}

TEST(MonarchOptimized, EqualsBaselineWithLessTraffic) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t b = 1 + seed % 4, rp = 1 + seed % 3, n = 3 + 7 * seed;
    const auto m = random_monarch(b * 5, b * 6, b, rp, seed);
    const Tensor x = random_normal({n, b * 5}, 1.0f, seed + 100);
    for (OutputMode mode : {OutputMode::canonical, OutputMode::transposed}) {
      const auto base = forward_monarch_baseline(x, m, with_tile(kSmall, mode));
      const auto opt =
          forward_monarch_optimized(x, relayout_monarch_v(m), with_tile(kSmall, mode));
      EXPECT_LE(oracle::rel_err(opt.y, base.y), 1e-5);
      EXPECT_EQ(opt.counters.intermediate_elements(), 2 * b * n * rp * b);
      EXPECT_LT(opt.counters.intermediate_elements(),
                base.counters.intermediate_elements());
      EXPECT_EQ(opt.counters.flops(), base.counters.flops());
    }
  }
}

TEST(MonarchOptimized, TransposedChainWithPrepermutedWeight) {
  const std::size_t b = 3, q = 4;
  const auto m = relayout_monarch_v(random_monarch(9, b * q, b, 2, 23));
  const Tensor x = random_normal({6, 9}, 1.0f, 24);
  const Tensor w_next = random_normal({b * q, 5}, 1.0f, 25);
  const Tensor canon = forward_monarch_optimized(x, m).y;
  const Tensor trans =
      forward_monarch_optimized(x, m, with_tile({}, OutputMode::transposed)).y;
  const Tensor w_pre = prepermute_downstream_weight(w_next, b, q);
  EXPECT_LE(oracle::rel_err(forward_dense(trans, w_pre).y,
                            forward_dense(canon, w_next).y),
            1e-5);
}

TEST(OutputMode, TransposedIndexMap) {
  const auto m = random_monarch(8, 12, 2, 2, 26);
  const Tensor x = random_normal({3, 8}, 1.0f, 27);
  const Tensor canon = forward_monarch_baseline(x, m).y;
  const Tensor trans =
      forward_monarch_baseline(x, m, with_tile({}, OutputMode::transposed)).y;
  EXPECT_LE((oracle::untranspose(trans, 2) - oracle::to_eigen(canon)).norm(), 0.0);
}

TEST(ScatterMap, EqualsComposedPermutations) {
  for (std::size_t b1 : {1, 2, 3}) {
    for (std::size_t b2 : {1, 2, 4}) {
      for (std::size_t rp : {1, 3}) {
        const std::size_t n = 2, mid = rp * b2;
        Tensor ids({b1, n, rp, b2});
        for (std::size_t e = 0; e < ids.size(); ++e) ids[e] = float(e);
        Counters c;
        const Tensor a = permute(ids, {0, 1, 3, 2}, c);
        const Tensor z = permute(a, {2, 1, 0, 3}, c);
        const MonarchScatterShape shape{b1, b2, n, rp};
        for (std::size_t l = 0; l < b1; ++l) {
          for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t col = 0; col < mid; ++col) {
              const std::size_t k = col / rp, s = col % rp;
              const float id = ids.at({l, t, s, k});
              const std::size_t t_r = 2;
              EXPECT_EQ(z[monarch_scatter_destination(shape, l, t, col / t_r,
                                                      col % t_r, t_r)],
                        id);
            }
          }
        }
      }
    }
  }
}

TEST(BlastBaseline, SingleBlockOnesEqualsLowRank) {
  BlastFactors f = random_blast(10, 7, 1, 3, 28);
  f.s = Tensor({1, 1, 3}, 1.0f);
  LowRankFactors lr{f.v.reshaped({10, 3}), f.u.reshaped({3, 7})};
  const Tensor x = random_normal({6, 10}, 1.0f, 29);
  EXPECT_LE(oracle::rel_err(forward_blast_baseline(x, f).y,
                            forward_lowrank_baseline(x, lr).y),
            1e-5);
}

TEST(BlastBaseline, SmallCaseMatchesOracle) {
  const auto f = random_blast(8, 8, 2, 4, 30);
  const Tensor x = random_normal({5, 8}, 1.0f, 31);
  EXPECT_LE(oracle::rel_err(forward_blast_baseline(x, f).y,
                            reference(x, oracle::dense_of(f))),
            1e-4);
}

TEST(BlastBaseline, TrafficAndFlops) {
  const std::size_t b = 3, n = 7, r = 5, i = 12, o = 9;
  const auto res = forward_blast_baseline(random_normal({n, i}, 1.0f, 32),
                                          random_blast(i, o, b, r, 33));
  EXPECT_EQ(res.counters.intermediate_elements(), 8 * b * n * r);
  EXPECT_EQ(res.counters.flops(), 2 * n * r * (i + o + b * b));
}

TEST(BlastPaths, EquivalentWithOrderedTraffic) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t b = 1 + seed % 4, r = 2 + 3 * seed, n = 1 + 9 * seed;
    const auto f = random_blast(b * 6, b * 5, b, r, seed);
    const Tensor x = random_normal({n, b * 6}, 1.0f, seed + 50);
    for (OutputMode mode : {OutputMode::canonical, OutputMode::transposed}) {
      const auto base = forward_blast_baseline(x, f, with_tile(kSmall, mode));
      const auto part = forward_blast_partial_fused(x, f, with_tile(kSmall, mode));
      const auto reo = forward_blast_reordered(x, pretranspose_blast_s(f),
                                               with_tile(kSmall, mode));
      EXPECT_LE(oracle::rel_err(part.y, base.y), 1e-5);
      EXPECT_LE(oracle::rel_err(reo.y, base.y), 1e-5);
      const auto bnr = b * n * r;
      EXPECT_EQ(base.counters.intermediate_elements(), 8 * bnr);
      EXPECT_EQ(reo.counters.intermediate_elements(), 4 * bnr);
      EXPECT_EQ(part.counters.intermediate_elements(), 2 * bnr);
      EXPECT_EQ(part.counters.flops(), base.counters.flops());
      EXPECT_EQ(reo.counters.flops(), base.counters.flops());
    }
  }
}

TEST(BlastPartial, SingleInputBlockIsScaledLowRank) {
  BlastFactors f = random_blast(6, 12, 1, 4, 34);
  f.u = random_normal({1, 4, 12}, 1.0f, 35);
  LowRankFactors lr{f.v.reshaped({6, 4}), Tensor({4, 12})};
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t y = 0; y < 12; ++y) lr.u.at({s, y}) = f.s[s] * f.u.at({0, s, y});
  }
  const Tensor x = random_normal({3, 6}, 1.0f, 36);
  EXPECT_LE(oracle::rel_err(forward_blast_partial_fused(x, f).y,
                            forward_lowrank_baseline(x, lr).y),
            1e-5);
}

TEST(BlastPartial, AccumulatorOverBudgetThrows) {
  const auto f = random_blast(256, 256, 16, 256, 37);
  ExecOptions e = with_tile({256, 256, 16, 16});
  EXPECT_THROW(forward_blast_partial_fused(Tensor({256, 256}), f, e),
               ScratchBudgetError);
}

TEST(BlastReordered, NeedsPretransposedS) {
  EXPECT_THROW(forward_blast_reordered(Tensor({2, 4}), random_blast(4, 4, 2, 2, 38)),
               LayoutError);
}

TEST(BlastReordered, SingleBlockDegeneracy) {
  BlastFactors f = random_blast(7, 5, 1, 3, 39);
  LowRankFactors lr{f.v.reshaped({7, 3}), Tensor({3, 5})};
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t y = 0; y < 5; ++y) lr.u.at({s, y}) = f.s[s] * f.u.at({0, s, y});
  }
  const Tensor x = random_normal({4, 7}, 1.0f, 40);
  EXPECT_LE(oracle::rel_err(forward_blast_reordered(x, pretranspose_blast_s(f)).y,
                            forward_lowrank_baseline(x, lr).y),
            1e-5);
}

TEST(BlastReordered, FeatureMajorOutputIsTranspose) {
  const auto f = pretranspose_blast_s(random_blast(8, 12, 2, 3, 41));
  const Tensor x = random_normal({5, 8}, 1.0f, 42);
  ExecOptions e;
  e.feature_major_output = true;
  const Tensor yt = forward_blast_reordered(x, f, e).y;
  const Tensor y = forward_blast_reordered(x, f).y;
  EXPECT_EQ(yt.shape(), (Shape{12, 5}));
  EXPECT_EQ(oracle::to_eigen(yt).transpose(), oracle::to_eigen(y));
}

TEST(TileInvariance, EveryPathIsTileIndependent) {
  const std::vector<TileConfig> tiles = {
      {16, 16, 16, 16}, {64, 64, 64, 64}, {32, 16, 64, 32}, {16, 128, 32, 64}};
  const Tensor x = random_normal({37, 48}, 1.0f, 43);
  const auto lr = random_low_rank(48, 36, 20, 44);
  const auto m = random_monarch(48, 36, 4, 5, 45);
  const auto mo = relayout_monarch_v(m);
  const auto b = pretranspose_blast_s(random_blast(48, 36, 3, 20, 46));
  const Tensor w = random_normal({48, 36}, 1.0f, 47);
  auto run_all = [&](const TileConfig& t) {
    const ExecOptions e = with_tile(t);
    return std::vector<Tensor>{forward_dense(x, w, e).y,
                               forward_lowrank_baseline(x, lr, e).y,
                               forward_lowrank_fully_fused(x, lr, e).y,
                               forward_monarch_baseline(x, m, e).y,
                               forward_monarch_optimized(x, mo, e).y,
                               forward_blast_baseline(x, b, e).y,
                               forward_blast_partial_fused(x, b, e).y,
                               forward_blast_reordered(x, b, e).y};
  };
  const auto ref = run_all(tiles[0]);
  for (const TileConfig& t : tiles) {
    const auto got = run_all(t);
    for (std::size_t p = 0; p < got.size(); ++p) {
      EXPECT_LE(oracle::rel_err(got[p], ref[p]), 1e-5) << p << " " << t.to_string();
    }
  }
}

TEST(Autotune, SingleCandidateIsReturned) {
  Autotuner tuner({{16, 32, 16, 32}});
  const auto f = random_low_rank(32, 32, 4, 48);
  const Tensor x = random_normal({8, 32}, 1.0f, 49);
  const WorkloadSpec spec{Method::low_rank, 8, 32, 32, 4, 1};
  const auto res = tuner.tune(PathId::lowrank, spec, kDefaultScratchBytes,
                              OutputMode::canonical, [&](const TileConfig& t) {
                                return forward_lowrank_baseline(x, f, with_tile(t));
                              });
  EXPECT_EQ(res.best, (TileConfig{16, 32, 16, 32}));
  EXPECT_EQ(res.sweep.size(), 1u);
}

TEST(Autotune, BestIsFastestAndOutputsAgreeAndCached) {
  Autotuner tuner;
  const auto f = pretranspose_blast_s(random_blast(64, 64, 4, 16, 50));
  const Tensor x = random_normal({33, 64}, 1.0f, 51);
  const WorkloadSpec spec{Method::blast, 33, 64, 64, 16, 4};
  int calls = 0;
  auto run = [&](const TileConfig& t) {
    ++calls;
    return forward_blast_reordered(x, f, with_tile(t));
  };
  const auto res = tuner.tune(PathId::blast_reordered, spec, kDefaultScratchBytes,
                              OutputMode::canonical, run);
  ASSERT_EQ(res.sweep.size(), default_tile_candidates().size());
  double best = 0;
  for (const auto& rec : res.sweep) {
    if (rec.tile == res.best) best = rec.time_s;
  }
  for (const auto& rec : res.sweep) EXPECT_LE(best, rec.time_s);
  EXPECT_LE(res.max_output_deviation, 1e-5f);
  for (std::size_t k = 1; k < res.sweep.size(); ++k) {
    EXPECT_LE(res.sweep[k - 1].tile, res.sweep[k].tile);
  }

  const int before = calls;
  const auto again = tuner.tune(PathId::blast_reordered, spec, kDefaultScratchBytes,
                                OutputMode::canonical, run);
  EXPECT_TRUE(again.cached);
  EXPECT_EQ(again.best, res.best);
  EXPECT_EQ(calls, before);

  WorkloadSpec other = spec;
  other.n = 34;
  const Tensor x2 = random_normal({34, 64}, 1.0f, 52);
  const auto fresh = tuner.tune(PathId::blast_reordered, other, kDefaultScratchBytes,
                                OutputMode::canonical, [&](const TileConfig& t) {
                                  return forward_blast_reordered(x2, f, with_tile(t));
                                });
  EXPECT_FALSE(fresh.cached);
}

TEST(Autotune, NoLegalCandidateThrows) {
  Autotuner tuner({{64, 64, 64, 64}});
  const WorkloadSpec spec{Method::low_rank, 64, 64, 64, 4096, 1};
  EXPECT_THROW(tuner.tune(PathId::lowrank_fused, spec, kDefaultScratchBytes,
                          OutputMode::canonical,
                          [](const TileConfig&) { return ForwardResult{}; }),
               ScratchBudgetError);
}

}  // namespace
}  // namespace blr
