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

#ifndef BLR_ROOFLINE_HPP_
#define BLR_ROOFLINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "blr/formats.hpp"

namespace blr {

struct HardwareProfile {
  std::string name;
  double peak_flops = 0.0;     // FLOP/s
  double mem_bandwidth = 0.0;  // bytes/s

  // Throws ShapeError unless both rates are strictly positive.
  void validate() const;
  double breakpoint() const { return peak_flops / mem_bandwidth; }
};

enum class Bound { compute, memory };

std::string_view bound_name(Bound bound);

struct CostReport {
  WorkloadSpec spec;
  std::size_t elem_bytes = 2;
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
  double alpha = 0.0;
  Bound bound = Bound::memory;
  double est_runtime_s = 0.0;
};

// Dense 2nio; low-rank and Monarch 2nr(i+o); BLAST 2nr(i+o+b^2).
std::uint64_t model_flops(const WorkloadSpec& spec);

// Dense e(ni+io+no); low-rank e(ni+ir+ro+no+2nr); Monarch adds 4bnr
// instead of 2nr; BLAST e(ni+ir+ro+rb^2+no+8bnr). e = elem_bytes.
std::uint64_t model_bytes(const WorkloadSpec& spec, std::size_t elem_bytes = 2);

// alpha >= breakpoint is compute bound.
Bound classify_intensity(double alpha, const HardwareProfile& profile);

CostReport classify(const WorkloadSpec& spec, const HardwareProfile& profile,
                    std::size_t elem_bytes = 2);

// max(flops / peak, bytes / bandwidth).
double estimate_runtime(const WorkloadSpec& spec,
                        const HardwareProfile& profile,
                        std::size_t elem_bytes = 2);

// key = value lines with keys name, peak_flops, mem_bandwidth_bytes_per_s.
// '#' starts a comment.
HardwareProfile parse_profile(std::string_view text,
                              const std::string& source = "<profile>");
HardwareProfile load_profile(const std::filesystem::path& path);

}  // namespace blr

#endif  // BLR_ROOFLINE_HPP_
