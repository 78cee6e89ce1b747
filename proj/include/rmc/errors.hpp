// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity, ReservedName };

  ParseError(Kind kind, std::size_t offset, std::string message,
             std::string expected = {})
      : Error(format(offset, message, expected)),
        kind_(kind),
        offset_(offset),
        expected_(std::move(expected)) {}

  Kind kind() const noexcept { return kind_; }
  /// Byte offset into the source text.
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  static std::string format(std::size_t offset, const std::string& message,
                            const std::string& expected) {
    std::string out = "at offset " + std::to_string(offset) + ": " + message;
    if (!expected.empty()) out += " (expected " + expected + ")";
    return out;
  }

  Kind kind_;
  std::size_t offset_;
  std::string expected_;
};

/// Evaluation hit log of a non-positive, sqrt of a negative, division by
/// zero, 0^negative, or any other operation that would produce NaN.
class DomainError : public Error {
 public:
  DomainError(std::size_t node, std::string what_text)
      : Error(std::move(what_text)), node_(node) {}

  /// Index of the offending node in its expression.
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Invalid model input: degenerate box, negative or non-finite density,
/// violated envelope constant.
class ModelError : public Error {
 public:
  ModelError(std::string what_text, std::vector<double> point = {},
             double value = 0.0)
      : Error(std::move(what_text)), point_(std::move(point)), value_(value) {}

  /// Probe point where the check failed (empty when not point-specific).
  const std::vector<double>& point() const noexcept { return point_; }
  double value() const noexcept { return value_; }

 private:
  std::vector<double> point_;
  double value_;
};

/// The rejection loop drew more proposals than its budget allows.
class BudgetError : public Error {
 public:
  BudgetError(std::uint64_t proposals, std::uint64_t accepted, double rate)
      : Error("proposal budget exhausted after " + std::to_string(proposals) +
              " proposals (" + std::to_string(accepted) +
              " accepted, running acceptance rate " + std::to_string(rate) +
              ")"),
        proposals_(proposals),
        accepted_(accepted),
        rate_(rate) {}

  std::uint64_t proposals_drawn() const noexcept { return proposals_; }
  std::uint64_t accepted() const noexcept { return accepted_; }
  double acceptance_rate() const noexcept { return rate_; }

 private:
  std::uint64_t proposals_;
  std::uint64_t accepted_;
  double rate_;
};

}  // namespace rmc
