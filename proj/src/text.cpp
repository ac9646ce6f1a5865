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

#include "blr/text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blr/error.hpp"

namespace blr {

namespace {

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = strip_comment(line);
    if (!line.empty()) fn(line_no, line);
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
}

}  // namespace

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<KeyValueLine> parse_key_value_lines(std::string_view text,
                                                const std::string& source) {
  std::vector<KeyValueLine> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source, line_no, "expected key = value");
    }
    KeyValueLine kv{line_no, std::string(trim(line.substr(0, eq))),
                    std::string(trim(line.substr(eq + 1)))};
    if (kv.key.empty()) throw ParseError(source, line_no, "empty key");
    out.push_back(std::move(kv));
  });
  return out;
}

std::vector<Record> parse_records(std::string_view text,
                                  const std::string& source) {
  std::vector<Record> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    Record record{line_no, {}};
    std::istringstream tokens{std::string(line)};
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError(source, line_no, "expected key=value, got '" + token + "'");
      }
      record.fields.emplace_back(token.substr(0, eq), token.substr(eq + 1));
    }
    out.push_back(std::move(record));
  });
  return out;
}

double parse_double(std::string_view value, const std::string& source,
                    std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() ||
      !std::isfinite(out)) {
    throw ParseError(source, line, "not a number: '" + std::string(value) + "'");
  }
  return out;
}

std::size_t parse_size(std::string_view value, const std::string& source,
                       std::size_t line) {
  std::size_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ParseError(source, line,
                     "not a non-negative integer: '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view value, const std::string& source,
                std::size_t line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError(source, line, "not a boolean: '" + std::string(value) + "'");
}

}  // namespace blr
