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

#include "blr/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "blr/error.hpp"

namespace blr {

namespace {

constexpr char kMagic[4] = {'B', 'L', 'R', 'T'};
constexpr std::size_t kMaxRank = 16;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    if (bytes_.size() - pos_ < sizeof(U)) {
      throw IoError(std::string("truncated tensor file while reading ") + what);
    }
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      bits |= static_cast<U>(bytes_[pos_ + b]) << (8 * b);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put(out, kTensorFileVersion);
  put(out, kTensorDtypeF32);
  put(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put(out, static_cast<std::uint64_t>(d));
  out.reserve(out.size() + 4 * t.size());
  for (float v : t.data()) put(out, v);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a BLRT tensor file (bad magic)");
  }
  Reader in(bytes.subspan(4));
  const auto version = in.get<std::uint32_t>("version");
  if (version != kTensorFileVersion) {
    throw IoError("unsupported tensor file version " + std::to_string(version));
  }
  const auto dtype = in.get<std::uint32_t>("dtype");
  if (dtype != kTensorDtypeF32) {
    throw IoError("unsupported tensor dtype code " + std::to_string(dtype));
  }
  const auto rank = in.get<std::uint32_t>("rank");
  if (rank > kMaxRank) throw IoError("tensor rank " + std::to_string(rank) + " too large");
  Shape shape(rank);
  std::uint64_t count = 1;
  for (auto& d : shape) {
    const auto dim = in.get<std::uint64_t>("dims");
    if (dim != 0 && count > std::numeric_limits<std::uint64_t>::max() / 4 / dim) {
      throw IoError("tensor dimensions overflow");
    }
    count *= dim;
    d = static_cast<std::size_t>(dim);
  }
  if (in.remaining() < count * 4) {
    throw IoError("truncated tensor payload: expected " +
                  std::to_string(count * 4) + " bytes, found " +
                  std::to_string(in.remaining()));
  }
  if (in.remaining() > count * 4) {
    throw IoError("trailing bytes after tensor payload");
  }
  std::vector<float> data(count);
  for (auto& v : data) v = in.get<float>("payload");
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace blr
