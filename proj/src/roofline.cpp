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

#include "blr/roofline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "blr/error.hpp"
#include "blr/text.hpp"

namespace blr {

void HardwareProfile::validate() const {
  if (!(peak_flops > 0.0) || !(mem_bandwidth > 0.0)) {
    throw ShapeError("hardware profile '" + name +
                     "' needs positive peak_flops and mem_bandwidth");
  }
}

std::string_view bound_name(Bound bound) {
  return bound == Bound::compute ? "ComputeBound" : "MemoryBound";
}

std::uint64_t model_flops(const WorkloadSpec& spec) {
  spec.validate();
  const std::uint64_t n = spec.n, i = spec.i, o = spec.o, r = spec.r,
                      b = spec.b;
  switch (spec.method) {
    case Method::dense:
      return 2 * n * i * o;
    case Method::low_rank:
    case Method::monarch:
      return 2 * n * r * (i + o);
    case Method::blast:
      return 2 * n * r * (i + o + b * b);
  }
  return 0;
}

std::uint64_t model_bytes(const WorkloadSpec& spec, std::size_t elem_bytes) {
  spec.validate();
  const std::uint64_t n = spec.n, i = spec.i, o = spec.o, r = spec.r,
                      b = spec.b, e = elem_bytes;
  switch (spec.method) {
    case Method::dense:
      return e * (n * i + i * o + n * o);
    case Method::low_rank:
      return e * (n * i + i * r + r * o + n * o + 2 * n * r);
    case Method::monarch:
      return e * (n * i + i * r + r * o + n * o + 4 * b * n * r);
    case Method::blast:
      return e * (n * i + i * r + r * o + r * b * b + n * o + 8 * b * n * r);
  }
  return 0;
}

Bound classify_intensity(double alpha, const HardwareProfile& profile) {
  return alpha >= profile.breakpoint() ? Bound::compute : Bound::memory;
}

CostReport classify(const WorkloadSpec& spec, const HardwareProfile& profile,
                    std::size_t elem_bytes) {
  profile.validate();
  CostReport report;
  report.spec = spec;
  report.elem_bytes = elem_bytes;
  report.flops = model_flops(spec);
  report.bytes = model_bytes(spec, elem_bytes);
  report.alpha =
      static_cast<double>(report.flops) / static_cast<double>(report.bytes);
  report.bound = classify_intensity(report.alpha, profile);
  report.est_runtime_s =
      std::max(static_cast<double>(report.flops) / profile.peak_flops,
               static_cast<double>(report.bytes) / profile.mem_bandwidth);
  return report;
}

double estimate_runtime(const WorkloadSpec& spec,
                        const HardwareProfile& profile,
                        std::size_t elem_bytes) {
  return classify(spec, profile, elem_bytes).est_runtime_s;
}

HardwareProfile parse_profile(std::string_view text,
                              const std::string& source) {
  HardwareProfile profile;
  bool have_peak = false, have_bw = false;
  for (const KeyValueLine& kv : parse_key_value_lines(text, source)) {
    if (kv.key == "name") {
      profile.name = kv.value;
    } else if (kv.key == "peak_flops") {
      profile.peak_flops = parse_double(kv.value, source, kv.line);
      have_peak = true;
    } else if (kv.key == "mem_bandwidth_bytes_per_s") {
      profile.mem_bandwidth = parse_double(kv.value, source, kv.line);
      have_bw = true;
    } else {
      throw ParseError(source, kv.line, "unknown key '" + kv.key + "'");
    }
  }
  if (!have_peak) throw ParseError(source, 0, "missing peak_flops");
  if (!have_bw) throw ParseError(source, 0, "missing mem_bandwidth_bytes_per_s");
  try {
    profile.validate();
  } catch (const ShapeError& e) {
    throw ParseError(source, 0, e.what());
  }
  return profile;
}

HardwareProfile load_profile(const std::filesystem::path& path) {
  return parse_profile(read_text_file(path), path.string());
}

}  // namespace blr
