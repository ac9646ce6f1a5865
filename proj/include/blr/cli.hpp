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

#ifndef BLR_CLI_HPP_
#define BLR_CLI_HPP_

#include <cstdint>
#include <ostream>

namespace blr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRowError = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: factor, forward, verify, bench, roofline. Returns kExitUsage
// for bad arguments and unreadable or malformed input files, kExitRowError
// for failed bench rows or any other runtime failure.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

// Oracle-equivalence sweep over seeded random cases and every path. Prints
// one line per path with its worst relative error; returns the number of
// failing cases.
int run_verify_suite(std::uint64_t seed, std::size_t cases, double tolerance,
                     std::ostream& out);

}  // namespace blr

#endif  // BLR_CLI_HPP_
