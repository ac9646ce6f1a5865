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

#ifndef BLR_ERROR_HPP_
#define BLR_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes, ranks or divisibility constraints do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A tile task would need more scratch than the configured per-task budget.
class ScratchBudgetError : public Error {
 public:
  ScratchBudgetError(const std::string& what, std::size_t required_bytes,
                     std::size_t budget_bytes)
      : Error(what + ": needs " + std::to_string(required_bytes) +
              " scratch bytes, budget is " + std::to_string(budget_bytes)),
        required_bytes_(required_bytes),
        budget_bytes_(budget_bytes) {}

  std::size_t required_bytes() const { return required_bytes_; }
  std::size_t budget_bytes() const { return budget_bytes_; }

 private:
  std::size_t required_bytes_;
  std::size_t budget_bytes_;
};

// Raised by the fully fused low-rank kernel when the whole rank dimension
// (t_r = r) does not fit in one task's scratch.
class RankTooLargeForScratch : public ScratchBudgetError {
 public:
  RankTooLargeForScratch(std::size_t rank, std::size_t max_rank,
                         std::size_t required_bytes, std::size_t budget_bytes)
      : ScratchBudgetError("rank " + std::to_string(rank) +
                               " exceeds fused limit " +
                               std::to_string(max_rank),
                           required_bytes, budget_bytes),
        rank_(rank),
        max_rank_(max_rank) {}

  std::size_t rank() const { return rank_; }
  std::size_t max_rank() const { return max_rank_; }

 private:
  std::size_t rank_;
  std::size_t max_rank_;
};

// Weight container is not in the layout an operation requires.
class LayoutError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Iterative factorization produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, double loss)
      : Error("factorization diverged at iteration " +
              std::to_string(iteration) + " (loss " + std::to_string(loss) +
              ")"),
        iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Malformed config/profile/tensor file. Line is 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& message)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) +
              ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace blr

#endif  // BLR_ERROR_HPP_
