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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "blr/bench.hpp"
#include "blr/cli.hpp"
#include "blr/config.hpp"
#include "blr/error.hpp"
#include "blr/formats.hpp"
#include "blr/kernels.hpp"
#include "blr/tensor_io.hpp"

namespace blr {
namespace {

namespace fs = std::filesystem;

const std::string kData = BLR_TEST_DATA_DIR;
const HardwareProfile kProfile{"a40_like", 149.7e12, 696e9};

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("blr_test_" + name);
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  args.insert(args.begin(), "blr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

TEST(LayerConfigs, ShippedTableLoads) {
  const auto configs = load_layer_configs(kData + "/configs/layers.cfg");
  std::set<std::string> models;
  bool found_gpt2 = false, adaln_disabled = false;
  for (const auto& c : configs) {
    models.insert(c.model);
    if (c.model == "GPT2-S" && c.layer == "c_attn" && c.method == Method::blast) {
      EXPECT_EQ(c.i, 768u);
      EXPECT_EQ(c.o, 2304u);
      EXPECT_EQ(c.r, 192u);
      EXPECT_EQ(c.b, 6u);
      found_gpt2 = true;
    }
    if (c.layer == "adaLN_proj") adaln_disabled = !c.bench;
  }
  EXPECT_EQ(models.size(), 5u);
  EXPECT_TRUE(found_gpt2);
  EXPECT_TRUE(adaln_disabled);
}

TEST(LayerConfigs, EmptyFileGivesEmptyList) {
  EXPECT_TRUE(parse_layer_configs("", "empty").empty());
  EXPECT_TRUE(parse_layer_configs("# only a comment\n\n", "empty").empty());
}

TEST(LayerConfigs, BadDivisibilityCitesRow) {
  const std::string text =
      "model=a layer=x i=8 o=8 method=lowrank r=2\n"
      "model=a layer=y i=10 o=8 method=blast r=2 b=4\n";
  try {
    parse_layer_configs(text, "bad.cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("bad.cfg:2"), std::string::npos);
  }
}

TEST(LayerConfigs, UnknownKeyAndBadFieldRejected) {
  try {
    parse_layer_configs("model=a layer=x i=8 o=8 method=lowrank r=2 color=red\n", "f");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("color"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_layer_configs("model=a layer=x i=8 o=8 method=foo r=2\n", "f"),
               ParseError);
  EXPECT_THROW(parse_layer_configs("model=a layer=x i=8 o=8 method=lowrank\n", "f"),
               ParseError);
  EXPECT_THROW(parse_layer_configs("model=a layer=x i=8 o=8 method=lowrank r=2 n=0\n", "f"),
               ParseError);
}

TEST(ModelParams, LlamaSevenBLowRankNearTwo) {
  const auto configs = load_layer_configs(kData + "/configs/layers.cfg");
  const auto params = load_model_params(kData + "/configs/model_params.cfg");
  for (const auto& p : params) {
    if (p.model != "Llama-7B") continue;
    const double cf = model_compression_factor(configs, p, Method::low_rank);
    EXPECT_NEAR(cf, 2.0, 0.1);
  }
}

TEST(TensorIo, RoundTrip) {
  const Tensor t = random_normal({3, 4, 5}, 1.0f, 1);
  const auto path = temp_path("rt.blrt");
  write_tensor(path, t);
  EXPECT_EQ(read_tensor(path), t);
  fs::remove(path);
}

TEST(TensorIo, ScalarSupported) {
  Tensor s;
  s[0] = 4.5f;
  const Tensor back = decode_tensor(encode_tensor(s));
  EXPECT_EQ(back.rank(), 0u);
  EXPECT_EQ(back[0], 4.5f);
}

TEST(TensorIo, HeaderLayout) {
  const auto bytes = encode_tensor(Tensor({2, 1}, {1, 2}));
  ASSERT_EQ(bytes.size(), 4u + 12 + 16 + 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "BLRT");
  EXPECT_EQ(bytes[4], 1);   // version
  EXPECT_EQ(bytes[8], 0);   // dtype
  EXPECT_EQ(bytes[12], 2);  // rank
  EXPECT_EQ(bytes[16], 2);  // dim 0, little-endian
}

TEST(TensorIo, TruncationAndCorruptionDetected) {
  auto bytes = encode_tensor(random_normal({3, 3}, 1.0f, 2));
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  try {
    decode_tensor(truncated);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_tensor(bad_magic), IoError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(decode_tensor(bad_version), IoError);
  std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 10);
  EXPECT_THROW(decode_tensor(header_only), IoError);
}

TEST(Csv, GoldenHeader) {
  std::ostringstream out;
  emit_csv(BenchReport{}, out);
  EXPECT_EQ(out.str(),
            "model,layer,method,path,n,i,o,r,b,time_median_s,flops_counted,"
            "flops_modeled,bytes_intermediate_counted,bytes_modeled,alpha_"
            "modeled,bound,est_runtime_s,speedup_vs_dense,oracle_maxrelerr\n");
}

TEST(Csv, QuotedFieldsRoundTrip) {
  EXPECT_EQ(parse_csv_line("a,\"b,c\",\"d\"\"e\","),
            (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
}

BenchOptions quick_options() {
  BenchOptions o;
  o.warmups = 1;
  o.repeats = 3;
  o.tile_candidates = {{16, 16, 16, 16}, {64, 64, 64, 64}};
  return o;
}

std::vector<LayerConfig> tiny_configs(std::size_t n) {
  return parse_layer_configs(
      "model=t layer=a i=64 o=96 method=lowrank r=8 n=" + std::to_string(n) + "\n"
      "model=t layer=a i=64 o=96 method=monarch r=8 b=4 n=" + std::to_string(n) + "\n"
      "model=t layer=a i=64 o=96 method=blast r=8 b=4 n=" + std::to_string(n) + "\n",
      "tiny");
}

TEST(RunBench, RowsCheckedAndSane) {
  const auto report = run_bench(tiny_configs(9), kProfile, quick_options());
  ASSERT_EQ(report.rows.size(), 8u);
  EXPECT_EQ(report.error_count(), 0u);
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.oracle_checked);
    EXPECT_LE(row.oracle_rel_err, 1e-4);
    EXPECT_GE(row.timing.median_s, row.timing.min_s);
    EXPECT_LE(row.timing.median_s, row.timing.max_s);
    EXPECT_TRUE(row.speedup_vs_dense.has_value());
    EXPECT_EQ(row.counters.flops(), row.cost.flops) << path_name(row.path);
  }
  std::ostringstream out;
  emit_csv(report, out);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(parse_csv_line(line).size(), csv_columns().size());
    ++count;
  }
  EXPECT_EQ(count, 9u);
}

TEST(RunBench, SingleTokenRowsAreMemoryBound) {
  const auto report = run_bench(tiny_configs(1), kProfile, quick_options());
  for (const auto& row : report.rows) EXPECT_EQ(row.cost.bound, Bound::memory);
}

TEST(RunBench, LlamaPatternInModeledBounds) {
  const auto configs = load_layer_configs(kData + "/configs/layers.cfg");
  for (const auto& c : configs) {
    if (c.model != "Llama-7B" || c.layer != "q_k_v_o_proj") continue;
    const auto cost = classify(c.spec(), kProfile);
    const bool compute = c.method == Method::low_rank;
    EXPECT_EQ(cost.bound, compute ? Bound::compute : Bound::memory);
  }
}

TEST(RunBench, DeterministicForSeed) {
  BenchOptions pinned = quick_options();
  pinned.tile_candidates = {{16, 16, 16, 16}};
  const auto a = run_bench(tiny_configs(5), kProfile, pinned);
  const auto b = run_bench(tiny_configs(5), kProfile, pinned);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].counters, b.rows[k].counters);
    EXPECT_EQ(a.rows[k].oracle_rel_err, b.rows[k].oracle_rel_err);
  }
  // With timing-driven tile choice only tile-invariant counts must agree.
  const auto c = run_bench(tiny_configs(5), kProfile, quick_options());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].counters.flops(), c.rows[k].counters.flops());
    EXPECT_EQ(a.rows[k].counters.intermediate_elements(),
              c.rows[k].counters.intermediate_elements());
  }
}

TEST(RunBench, FailuresBecomeRowErrors) {
  BenchOptions o = quick_options();
  o.oracle_tolerance = -1.0;
  const auto report = run_bench(tiny_configs(3), kProfile, o);
  EXPECT_EQ(report.error_count(), report.rows.size());
  for (const auto& row : report.rows) {
    EXPECT_NE(row.error.find("oracle mismatch"), std::string::npos);
  }

  BenchOptions tight = quick_options();
  tight.scratch_bytes = 64;
  tight.paths = {PathId::lowrank_fused};
  const auto scratch = run_bench(tiny_configs(3), kProfile, tight);
  ASSERT_EQ(scratch.rows.size(), 1u);
  EXPECT_FALSE(scratch.rows[0].error.empty());
}

TEST(RunBench, RejectsTooFewRepeats) {
  BenchOptions o = quick_options();
  o.repeats = 2;
  EXPECT_THROW(run_bench({}, kProfile, o), ShapeError);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  std::string err;
  EXPECT_EQ(run_cli({"frobnicate"}, nullptr, &err), kExitUsage);
  EXPECT_NE(err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}), kExitUsage);
  EXPECT_EQ(run_cli({"bench", "--repeats", "1"}), kExitUsage);
  EXPECT_EQ(run_cli({"bench", "--paths", "nope"}), kExitUsage);
  EXPECT_EQ(run_cli({"bench", "--config", "/nonexistent/table.cfg"}), kExitUsage);
  EXPECT_EQ(run_cli({"roofline", "--profile", "no_such_profile"}), kExitUsage);
}

TEST(Cli, RooflinePrintsPattern) {
  std::string out;
  ASSERT_EQ(run_cli({"roofline", "--config", "default", "--profile", "a40_like"}, &out),
            kExitOk);
  EXPECT_NE(out.find("breakpoint 215.1"), std::string::npos);
  EXPECT_NE(out.find("682.7  ComputeBound"), std::string::npos);
  EXPECT_NE(out.find("455.1  ComputeBound"), std::string::npos);
  EXPECT_NE(out.find("102.4  MemoryBound"), std::string::npos);
  EXPECT_NE(out.find("58.6  MemoryBound"), std::string::npos);
}

TEST(Cli, VerifyPasses) {
  std::string out;
  EXPECT_EQ(run_cli({"verify", "--seed", "0"}, &out), kExitOk);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
}

TEST(Cli, FactorThenForward) {
  const auto w_path = temp_path("w.blrt");
  const auto x_path = temp_path("x.blrt");
  const auto y_path = temp_path("y.blrt");
  const std::string prefix = temp_path("f").string();
  const auto truth = random_blast(16, 16, 2, 4, 3);
  const Tensor w = reconstruct_dense(truth);
  const Tensor x = random_normal({5, 16}, 1.0f, 4);
  write_tensor(w_path, w);
  write_tensor(x_path, x);
  for (const std::string method : {"lowrank", "monarch", "blast"}) {
    ASSERT_EQ(run_cli({"factor", "--input", w_path.string(), "--method", method,
                       "--rank", method == "lowrank" ? "8" : "4", "--blocks", "2",
                       "--out", prefix}),
              kExitOk)
        << method;
  }
  std::string out;
  ASSERT_EQ(run_cli({"forward", "--path", "blast_reordered", "--x", x_path.string(),
                     "--weights", prefix, "--out", y_path.string()},
                    &out),
            kExitOk);
  EXPECT_NE(out.find("flops"), std::string::npos);
  const Tensor y = read_tensor(y_path);
  Counters c;
  const Tensor ref = tiled_gemm(x, w, {}, c);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    num += (y[k] - ref[k]) * (y[k] - ref[k]);
    den += ref[k] * ref[k];
  }
  EXPECT_LE(std::sqrt(num / den), 1e-3);
  for (const auto& p : {w_path, x_path, y_path}) fs::remove(p);
  for (const char* part : {"v", "s", "u"}) fs::remove(prefix + "." + part + ".blrt");
}

TEST(Cli, BenchWritesCsvAndFlagsRowErrors) {
  const auto cfg = temp_path("tiny.cfg");
  {
    std::ofstream f(cfg);
    f << "model=t layer=a i=128 o=128 method=blast r=64 b=4 n=64\n";
  }
  const auto csv = temp_path("out.csv");
  EXPECT_EQ(run_cli({"bench", "--config", cfg.string(), "--profile", "a40_like",
                     "--warmups", "1", "--repeats", "3", "--out", csv.string()}),
            kExitOk);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(parse_csv_line(header), csv_columns());
  EXPECT_EQ(run_cli({"bench", "--config", cfg.string(), "--paths", "lowrank_fused",
                     "--warmups", "1", "--repeats", "3", "--out", csv.string()}),
            kExitOk);
  EXPECT_EQ(run_cli({"bench", "--config", cfg.string(), "--paths", "blast_partial",
                     "--scratch-kib", "1", "--warmups", "1", "--repeats", "3",
                     "--out", csv.string()}),
            kExitRowError);
  fs::remove(cfg);
  fs::remove(csv);
}

}  // namespace
}  // namespace blr
