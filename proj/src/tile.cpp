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

#include "blr/tile.hpp"

#include <bit>

#include "blr/error.hpp"

namespace blr {

namespace {

bool legal_tile(std::size_t t) {
  return t >= kMinTile && t <= kMaxTile && std::has_single_bit(t);
}

}  // namespace

void TileConfig::validate() const {
  if (!legal_tile(t_n) || !legal_tile(t_r) || !legal_tile(t_p) ||
      !legal_tile(t_q)) {
    throw ShapeError("tile sizes must be powers of two in [16, 256], got " +
                     to_string());
  }
}

std::string TileConfig::to_string() const {
  return "(t_n=" + std::to_string(t_n) + ", t_r=" + std::to_string(t_r) +
         ", t_p=" + std::to_string(t_p) + ", t_q=" + std::to_string(t_q) + ")";
}

void check_scratch(std::size_t elements, std::size_t budget_bytes,
                   const std::string& what) {
  const std::size_t bytes = elements * kScratchElementBytes;
  if (bytes > budget_bytes) throw ScratchBudgetError(what, bytes, budget_bytes);
}

}  // namespace blr
