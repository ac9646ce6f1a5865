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

#ifndef BLR_TEXT_HPP_
#define BLR_TEXT_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blr {

// Whole file as a string. Throws IoError.
std::string read_text_file(const std::filesystem::path& path);

struct KeyValueLine {
  std::size_t line = 0;
  std::string key;
  std::string value;
};

// One `key = value` per line; blank lines and '#' comments are skipped.
std::vector<KeyValueLine> parse_key_value_lines(std::string_view text,
                                                const std::string& source);

struct Record {
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> fields;
};

// One record per line made of whitespace-separated key=value tokens.
std::vector<Record> parse_records(std::string_view text,
                                  const std::string& source);

double parse_double(std::string_view value, const std::string& source,
                    std::size_t line);
std::size_t parse_size(std::string_view value, const std::string& source,
                       std::size_t line);
bool parse_bool(std::string_view value, const std::string& source,
                std::size_t line);

std::string_view trim(std::string_view s);

}  // namespace blr

#endif  // BLR_TEXT_HPP_
