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

#ifndef BLR_COUNTERS_HPP_
#define BLR_COUNTERS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace blr {

// Role of a global array, used to break traffic down per kind of tensor.
enum class Role : std::uint8_t { input = 0, weight, intermediate, output };
inline constexpr std::size_t kRoleCount = 4;

std::string_view role_name(Role role);

struct Traffic {
  std::uint64_t read = 0;     // elements
  std::uint64_t written = 0;  // elements

  std::uint64_t total() const { return read + written; }
  Traffic& operator+=(const Traffic& other) {
    read += other.read;
    written += other.written;
    return *this;
  }
  bool operator==(const Traffic&) const = default;
};

// FLOP and traffic instrumentation for one execution.
//
// Traffic is tracked in elements and converted to bytes with a caller-chosen
// element size, so f32 execution can be reported under BF16 accounting.
// Two views are kept:
//   * region traffic: every kernel pass moves each global region it touches
//     exactly once. This is the whole-tensor accounting of the analytic model.
//   * tile traffic: one count per tile-region load/store issued by a tile
//     task, so redundant reloads across tasks remain visible.
// Multiply-add counts as 2 FLOP. Counts only ever grow until reset().
class Counters {
 public:
  void add_flops(std::uint64_t flops) { flops_ += flops; }

  void record_read(Role role, std::uint64_t elements) {
    region_[index(role)].read += elements;
  }
  void record_write(Role role, std::uint64_t elements) {
    region_[index(role)].written += elements;
  }
  void record_tile_read(Role role, std::uint64_t elements) {
    tile_[index(role)].read += elements;
  }
  void record_tile_write(Role role, std::uint64_t elements) {
    tile_[index(role)].written += elements;
  }

  std::uint64_t flops() const { return flops_; }
  const Traffic& traffic(Role role) const { return region_[index(role)]; }
  const Traffic& tile_traffic(Role role) const { return tile_[index(role)]; }

  // Region reads + writes of arrays tagged intermediate.
  std::uint64_t intermediate_elements() const {
    return traffic(Role::intermediate).total();
  }
  std::uint64_t intermediate_bytes(std::size_t elem_bytes) const {
    return intermediate_elements() * elem_bytes;
  }

  std::uint64_t elements_read() const;
  std::uint64_t elements_written() const;
  std::uint64_t tile_elements_read() const;
  std::uint64_t tile_elements_written() const;

  std::uint64_t global_bytes_read(std::size_t elem_bytes) const {
    return elements_read() * elem_bytes;
  }
  std::uint64_t global_bytes_written(std::size_t elem_bytes) const {
    return elements_written() * elem_bytes;
  }

  Counters& operator+=(const Counters& other);
  bool operator==(const Counters&) const = default;

  void reset() { *this = Counters{}; }

 private:
  static constexpr std::size_t index(Role role) {
    return static_cast<std::size_t>(role);
  }

  std::uint64_t flops_ = 0;
  std::array<Traffic, kRoleCount> region_{};
  std::array<Traffic, kRoleCount> tile_{};
};

}  // namespace blr

#endif  // BLR_COUNTERS_HPP_
