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

#include "blr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blr/bench.hpp"
#include "blr/config.hpp"
#include "blr/error.hpp"
#include "blr/exec.hpp"
#include "blr/formats.hpp"
#include "blr/roofline.hpp"
#include "blr/tensor_io.hpp"

namespace blr {

namespace {

std::vector<PathId> parse_path_list(const std::string& text) {
  if (text == "all") return {all_paths().begin(), all_paths().end()};
  std::vector<PathId> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto path = parse_path(item);
    if (!path) throw CLI::ValidationError("--paths", "unknown path '" + item + "'");
    out.push_back(*path);
  }
  if (out.empty()) throw CLI::ValidationError("--paths", "empty path list");
  return out;
}

std::string weight_file(const std::string& prefix, const char* part) {
  return prefix + "." + part + ".blrt";
}

// Canonical column order regardless of the mode the path produced.
std::vector<double> canonical_output(const Tensor& y, OutputMode mode,
                                     std::size_t b2) {
  const std::size_t n = y.dim(0), o = y.dim(1), q = o / b2;
  std::vector<double> out(n * o);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < b2; ++k) {
      for (std::size_t j = 0; j < q; ++j) {
        out[t * o + k * q + j] = y[t * o + output_column(mode, k, j, b2, q)];
      }
    }
  }
  return out;
}

std::vector<double> multiply_double(const Tensor& x, const Tensor& w) {
  const std::size_t n = x.dim(0), i = x.dim(1), o = w.dim(1);
  std::vector<double> y(n * o, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < i; ++k) {
      const double xv = x[t * i + k];
      for (std::size_t j = 0; j < o; ++j) y[t * o + j] += xv * w[k * o + j];
    }
  }
  return y;
}

double path_error(PathId path, const Tensor& x, const WorkloadSpec& spec,
                  std::uint64_t seed, const ExecOptions& options) {
  ForwardResult result;
  Tensor w;
  std::size_t b2 = 1;
  switch (path_method(path)) {
    case Method::dense:
      w = random_dense(spec.i, spec.o, seed);
      result = forward_dense(x, w, options);
      break;
    case Method::low_rank: {
      const auto f = random_low_rank(spec.i, spec.o, spec.r, seed);
      w = reconstruct_dense(f);
      result = path == PathId::lowrank_fused
                   ? forward_lowrank_fully_fused(x, f, options)
                   : forward_lowrank_baseline(x, f, options);
      break;
    }
    case Method::monarch: {
      const auto f =
          random_monarch(spec.i, spec.o, spec.b, spec.r / spec.b, seed);
      w = reconstruct_dense(f);
      b2 = spec.b;
      result = path == PathId::monarch_opt
                   ? forward_monarch_optimized(x, relayout_monarch_v(f), options)
                   : forward_monarch_baseline(x, f, options);
      break;
    }
    case Method::blast: {
      const auto f = random_blast(spec.i, spec.o, spec.b, spec.r, seed);
      w = reconstruct_dense(f);
      b2 = spec.b;
      if (path == PathId::blast_reordered) {
        result = forward_blast_reordered(x, pretranspose_blast_s(f), options);
      } else if (path == PathId::blast_partial) {
        result = forward_blast_partial_fused(x, f, options);
      } else {
        result = forward_blast_baseline(x, f, options);
      }
      break;
    }
  }
  const auto expected = multiply_double(x, w);
  const auto actual = canonical_output(result.y, options.mode, b2);
  std::vector<float> actual_f(actual.begin(), actual.end());
  return relative_frobenius_error(actual_f, expected);
}

int cmd_factor(const std::string& input, const std::string& method_text,
               std::size_t rank, std::size_t blocks, std::size_t steps,
               std::uint64_t seed, const std::string& prefix,
               std::ostream& out) {
  const auto method = parse_method(method_text);
  if (!method || *method == Method::dense) {
    throw CLI::ValidationError("--method", "expected lowrank, monarch or blast");
  }
  const Tensor w = read_tensor(input);
  if (w.rank() != 2) throw ShapeError("factor input must be a 2-D tensor");
  switch (*method) {
    case Method::low_rank: {
      const auto f = factor_low_rank(w, rank);
      write_tensor(weight_file(prefix, "v"), f.v);
      write_tensor(weight_file(prefix, "u"), f.u);
      out << "relative_error " << relative_frobenius_error(reconstruct_dense(f), w)
          << "\n";
      break;
    }
    case Method::monarch: {
      if (rank % blocks != 0) throw ShapeError("Monarch rank must be a multiple of b");
      const auto f = factor_monarch(w, blocks, rank / blocks);
      write_tensor(weight_file(prefix, "v"), f.v);
      write_tensor(weight_file(prefix, "u"), f.u);
      out << "relative_error " << relative_frobenius_error(reconstruct_dense(f), w)
          << "\n";
      break;
    }
    case Method::blast: {
      BlastFitOptions options;
      options.steps = steps;
      options.seed = seed;
      const auto fit = factor_blast(w, blocks, rank, options);
      write_tensor(weight_file(prefix, "v"), fit.factors.v);
      write_tensor(weight_file(prefix, "s"), fit.factors.s);
      write_tensor(weight_file(prefix, "u"), fit.factors.u);
      out << "relative_error " << fit.relative_error << "\n";
      break;
    }
    case Method::dense:
      break;
  }
  return kExitOk;
}

int cmd_forward(const std::string& path_text, const std::string& x_file,
                const std::string& prefix, const std::string& mode_text,
                std::size_t scratch_bytes, const std::string& out_file,
                std::ostream& out) {
  const auto path = parse_path(path_text);
  if (!path) throw CLI::ValidationError("--path", "unknown path '" + path_text + "'");
  const auto mode = parse_output_mode(mode_text);
  if (!mode) throw CLI::ValidationError("--mode", "expected canonical or transposed");
  ExecOptions options;
  options.mode = *mode;
  options.scratch_bytes = scratch_bytes;
  const Tensor x = read_tensor(x_file);
  ForwardResult result;
  switch (path_method(*path)) {
    case Method::dense:
      result = forward_dense(x, read_tensor(weight_file(prefix, "w")), options);
      break;
    case Method::low_rank: {
      const LowRankFactors f{read_tensor(weight_file(prefix, "v")),
                             read_tensor(weight_file(prefix, "u"))};
      result = *path == PathId::lowrank_fused
                   ? forward_lowrank_fully_fused(x, f, options)
                   : forward_lowrank_baseline(x, f, options);
      break;
    }
    case Method::monarch: {
      MonarchFactors f;
      f.v = read_tensor(weight_file(prefix, "v"));
      f.u = read_tensor(weight_file(prefix, "u"));
      if (f.v.rank() != 3 || f.u.rank() != 3) {
        throw ShapeError("Monarch factor files must be 3-D");
      }
      f.b1 = f.v.dim(0);
      f.b2 = f.u.dim(0);
      f.block_rank = f.u.dim(2) / f.b1;
      f.validate();
      result = *path == PathId::monarch_opt
                   ? forward_monarch_optimized(x, relayout_monarch_v(f), options)
                   : forward_monarch_baseline(x, f, options);
      break;
    }
    case Method::blast: {
      BlastFactors f{read_tensor(weight_file(prefix, "v")),
                     read_tensor(weight_file(prefix, "s")),
                     read_tensor(weight_file(prefix, "u")),
                     std::nullopt};
      if (*path == PathId::blast_reordered) {
        result = forward_blast_reordered(x, pretranspose_blast_s(f), options);
      } else if (*path == PathId::blast_partial) {
        result = forward_blast_partial_fused(x, f, options);
      } else {
        result = forward_blast_baseline(x, f, options);
      }
      break;
    }
  }
  write_tensor(out_file, result.y);
  out << "path " << path_name(*path) << " flops " << result.counters.flops()
      << " intermediate_elements " << result.counters.intermediate_elements()
      << " wall_time_s " << result.wall_time_s << "\n";
  return kExitOk;
}

void print_roofline(const std::vector<LayerConfig>& configs,
                    const HardwareProfile& profile, std::size_t elem_bytes,
                    std::optional<std::size_t> n, std::ostream& out) {
  out << "profile " << profile.name << " peak_flops " << profile.peak_flops
      << " mem_bandwidth " << profile.mem_bandwidth << " breakpoint "
      << std::fixed << std::setprecision(1) << profile.breakpoint() << "\n";
  out << std::left << std::setw(14) << "model" << std::setw(16) << "layer"
      << std::setw(9) << "method" << std::right << std::setw(7) << "n"
      << std::setw(7) << "i" << std::setw(7) << "o" << std::setw(6) << "r"
      << std::setw(4) << "b" << std::setw(18) << "flops" << std::setw(14)
      << "bytes" << std::setw(9) << "alpha" << "  " << std::left
      << std::setw(13) << "bound" << "est_runtime_s\n";
  std::map<std::tuple<std::string, std::string, std::size_t>, bool> dense_done;
  auto line = [&](const LayerConfig& cfg, const WorkloadSpec& spec) {
    const CostReport c = classify(spec, profile, elem_bytes);
    out << std::left << std::setw(14) << cfg.model << std::setw(16) << cfg.layer
        << std::setw(9) << method_name(spec.method) << std::right
        << std::setw(7) << spec.n << std::setw(7) << spec.i << std::setw(7)
        << spec.o << std::setw(6) << (spec.method == Method::dense ? 0 : spec.r)
        << std::setw(4) << (spec.method == Method::dense || spec.method == Method::low_rank ? 0 : spec.b)
        << std::setw(18) << c.flops << std::setw(14) << c.bytes << std::setw(9)
        << std::fixed << std::setprecision(1) << c.alpha << "  " << std::left
        << std::setw(13) << bound_name(c.bound) << std::scientific
        << std::setprecision(3) << c.est_runtime_s << "\n";
  };
  for (const LayerConfig& cfg : configs) {
    const WorkloadSpec spec = cfg.spec(n);
    if (!dense_done[{cfg.model, cfg.layer, spec.n}]) {
      dense_done[{cfg.model, cfg.layer, spec.n}] = true;
      line(cfg, {Method::dense, spec.n, spec.i, spec.o, spec.r, 1});
    }
    line(cfg, spec);
  }
}

}  // namespace

int run_verify_suite(std::uint64_t seed, std::size_t cases, double tolerance,
                     std::ostream& out) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::initializer_list<std::size_t> values) {
    std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
    return *(values.begin() + d(rng));
  };
  std::map<PathId, double> worst;
  int failures = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto method = static_cast<Method>(c % 4);
    const std::size_t b = method == Method::monarch || method == Method::blast
                              ? pick({1, 2, 3, 4})
                              : 1;
    const std::size_t p = pick({4, 8, 12, 20});
    const std::size_t q = pick({4, 8, 12, 20});
    const std::size_t n = pick({1, 7, 33});
    const std::size_t r = method == Method::monarch ? b * pick({1, 2, 4})
                                                    : pick({1, 4, 8, 16});
    const WorkloadSpec spec{method, n, b * p, b * q, r, b};
    const Tensor x = random_normal({n, spec.i}, 1.0f, seed + 7919 * c);
    for (PathId path : all_paths()) {
      if (path_method(path) != method) continue;
      for (OutputMode mode : {OutputMode::canonical, OutputMode::transposed}) {
        if (mode == OutputMode::transposed &&
            (method == Method::dense || method == Method::low_rank)) {
          continue;
        }
        ExecOptions options;
        options.tile = c % 2 ? TileConfig{16, 16, 16, 16} : TileConfig{};
        options.mode = mode;
        const double e = path_error(path, x, spec, seed + c, options);
        worst[path] = std::max(worst[path], e);
        if (!(e <= tolerance)) {
          ++failures;
          out << "FAIL " << path_name(path) << " " << spec.to_string() << " "
              << output_mode_name(mode) << " relerr " << e << "\n";
        }
      }
    }
  }
  for (const auto& [path, e] : worst) {
    out << std::left << std::setw(16) << path_name(path) << " max_relerr "
        << std::scientific << std::setprecision(3) << e
        << (e <= tolerance ? "  ok" : "  FAIL") << "\n";
  }
  return failures;
}

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Structured linear-layer kernels: factorization, execution, "
               "benchmarking and roofline modeling"};
  app.name("blr");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::uint64_t seed = 0;
  std::size_t scratch_kib = kDefaultScratchBytes / 1024;
  std::size_t elem_bytes = 2;
  std::string config = "default";
  std::string profile_name = "a40_like";
  std::string paths_text = "all";
  std::size_t warmups = 10;
  std::size_t repeats = 50;
  std::string out_path;
  std::size_t n_override = 0;

  auto* factor = app.add_subcommand("factor", "Factor a dense weight tensor file");
  std::string input, method_text;
  std::size_t rank = 0, blocks = 1, steps = 300;
  factor->add_option("--input", input, "Dense (i x o) tensor file")->required();
  factor->add_option("--method", method_text, "lowrank, monarch or blast")->required();
  factor->add_option("--rank", rank, "Total rank r")->required();
  factor->add_option("--blocks", blocks, "Block count b");
  factor->add_option("--steps", steps, "BLAST fitting steps");
  factor->add_option("--seed", seed);
  factor->add_option("--out", out_path, "Output prefix for <prefix>.<v|s|u>.blrt")
      ->required();

  auto* forward = app.add_subcommand("forward", "Run one execution path");
  std::string path_text, x_file, weights, mode_text = "canonical";
  forward->add_option("--path", path_text, "Execution path")->required();
  forward->add_option("--x", x_file, "Input (n x i) tensor file")->required();
  forward->add_option("--weights", weights, "Weight file prefix")->required();
  forward->add_option("--mode", mode_text, "canonical or transposed");
  forward->add_option("--scratch-kib", scratch_kib);
  forward->add_option("--out", out_path, "Output tensor file")->required();

  auto* verify = app.add_subcommand("verify", "Oracle-equivalence sweep");
  std::size_t cases = 48;
  verify->add_option("--seed", seed);
  verify->add_option("--cases", cases);

  auto* bench = app.add_subcommand("bench", "Benchmark configured layers");
  bool include_disabled = false;
  bench->add_option("--config", config, "Layer table file or 'default'");
  bench->add_option("--profile", profile_name, "Hardware profile file or name");
  bench->add_option("--paths", paths_text, "Comma-separated paths or 'all'");
  bench->add_option("--warmups", warmups)->check(CLI::PositiveNumber);
  bench->add_option("--repeats", repeats)->check(CLI::Range(3, 1000000));
  bench->add_option("--seed", seed);
  bench->add_option("--out", out_path, "CSV file (default: stdout)");
  bench->add_option("--scratch-kib", scratch_kib)->check(CLI::PositiveNumber);
  bench->add_option("--elem-bytes", elem_bytes)->check(CLI::PositiveNumber);
  bench->add_option("--n", n_override, "Override every layer's n (0 keeps the table value)");
  bench->add_flag("--include-disabled", include_disabled,
                  "Also run rows marked bench=false");

  auto* roofline = app.add_subcommand("roofline", "Print modeled costs");
  roofline->add_option("--config", config, "Layer table file or 'default'");
  roofline->add_option("--profile", profile_name, "Hardware profile file or name");
  roofline->add_option("--elem-bytes", elem_bytes)->check(CLI::PositiveNumber);
  roofline->add_option("--n", n_override, "Override every layer's n (0 keeps the table value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  const std::optional<std::size_t> n =
      n_override ? std::optional<std::size_t>(n_override) : std::nullopt;
  try {
    if (factor->parsed()) {
      return cmd_factor(input, method_text, rank, blocks, steps, seed, out_path,
                        out);
    }
    if (forward->parsed()) {
      return cmd_forward(path_text, x_file, weights, mode_text,
                         scratch_kib * 1024, out_path, out);
    }
    if (verify->parsed()) {
      return run_verify_suite(seed, cases, 1e-4, out) == 0 ? kExitOk
                                                           : kExitRowError;
    }
    if (roofline->parsed()) {
      const auto configs = load_layer_configs(resolve_config_path(config));
      const auto profile = load_profile(resolve_profile_path(profile_name));
      print_roofline(configs, profile, elem_bytes, n, out);
      return kExitOk;
    }
    if (bench->parsed()) {
      BenchOptions options;
      options.paths = parse_path_list(paths_text);
      options.warmups = warmups;
      options.repeats = repeats;
      options.seed = seed;
      options.scratch_bytes = scratch_kib * 1024;
      options.elem_bytes = elem_bytes;
      options.n_override = n;
      options.include_disabled = include_disabled;
      const auto configs = load_layer_configs(resolve_config_path(config));
      const auto profile = load_profile(resolve_profile_path(profile_name));
      const BenchReport report = run_bench(configs, profile, options, &err);
      if (out_path.empty()) {
        emit_csv(report, out);
      } else {
        emit_csv(report, std::filesystem::path(out_path));
      }
      for (const BenchRow& row : report.rows) {
        if (row.path == PathId::monarch_base && row.error.empty()) {
          const double modeled = 4.0 * row.spec.b * row.spec.n * row.spec.r;
          err << "note: " << row.model << " " << row.layer
              << " monarch_base counted intermediate traffic is "
              << row.counters.intermediate_elements() / modeled
              << "x the analytic 4bnr term\n";
        }
      }
      err << report.rows.size() << " rows, " << report.error_count()
          << " errors\n";
      return report.error_count() == 0 ? kExitOk : kExitRowError;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRowError;
  }
  return kExitUsage;
}

}  // namespace blr
