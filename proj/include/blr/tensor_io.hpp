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

#ifndef BLR_TENSOR_IO_HPP_
#define BLR_TENSOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "blr/tensor.hpp"

namespace blr {

// Layout, all little-endian:
//   "BLRT" | u32 version = 1 | u32 dtype = 0 (f32) | u32 rank |
//   rank x u64 dims | row-major f32 payload
inline constexpr std::uint32_t kTensorFileVersion = 1;
inline constexpr std::uint32_t kTensorDtypeF32 = 0;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
// Throws IoError on bad magic, version, dtype or length.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace blr

#endif  // BLR_TENSOR_IO_HPP_
