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

#include "blr/counters.hpp"

namespace blr {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::input:
      return "input";
    case Role::weight:
      return "weight";
    case Role::intermediate:
      return "intermediate";
    case Role::output:
      return "output";
  }
  return "unknown";
}

std::uint64_t Counters::elements_read() const {
  std::uint64_t sum = 0;
  for (const auto& t : region_) sum += t.read;
  return sum;
}

std::uint64_t Counters::elements_written() const {
  std::uint64_t sum = 0;
  for (const auto& t : region_) sum += t.written;
  return sum;
}

std::uint64_t Counters::tile_elements_read() const {
  std::uint64_t sum = 0;
  for (const auto& t : tile_) sum += t.read;
  return sum;
}

std::uint64_t Counters::tile_elements_written() const {
  std::uint64_t sum = 0;
  for (const auto& t : tile_) sum += t.written;
  return sum;
}

Counters& Counters::operator+=(const Counters& other) {
  flops_ += other.flops_;
  for (std::size_t k = 0; k < kRoleCount; ++k) {
    region_[k] += other.region_[k];
    tile_[k] += other.tile_[k];
  }
  return *this;
}

}  // namespace blr
