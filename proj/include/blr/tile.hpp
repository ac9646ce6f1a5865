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

#ifndef BLR_TILE_HPP_
#define BLR_TILE_HPP_

#include <cstddef>
#include <string>

namespace blr {

inline constexpr std::size_t kDefaultScratchBytes = 192 * 1024;
inline constexpr std::size_t kScratchElementBytes = sizeof(float);
inline constexpr std::size_t kMinTile = 16;
inline constexpr std::size_t kMaxTile = 256;

// Tile sizes along the n (tokens), r (rank), p (input block) and q (output
// block) loop dimensions. Each is a power of two in [16, 256].
struct TileConfig {
  std::size_t t_n = 64;
  std::size_t t_r = 64;
  std::size_t t_p = 64;
  std::size_t t_q = 64;

  // Throws ShapeError if any tile size is out of range or not a power of two.
  void validate() const;
  std::string to_string() const;

  bool operator==(const TileConfig&) const = default;
  auto operator<=>(const TileConfig&) const = default;
};

// Tile of one GEMM pass: output rows x cols, contraction chunk `inner`.
struct GemmTile {
  std::size_t rows;
  std::size_t cols;
  std::size_t inner;

  // A tile + B tile + accumulator, in elements.
  std::size_t footprint_elements() const {
    return rows * inner + inner * cols + rows * cols;
  }
};

// Throws ScratchBudgetError when `elements` f32 values exceed the budget.
void check_scratch(std::size_t elements, std::size_t budget_bytes,
                   const std::string& what);

}  // namespace blr

#endif  // BLR_TILE_HPP_
