// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rmc/errors.hpp"

namespace rmc {

/// Axis-aligned hyper-rectangle [lower_0, upper_0) x ... x [lower_{d-1}, upper_{d-1}).
class Box {
 public:
  struct Interval {
    double lower;
    double upper;
    double width() const noexcept { return upper - lower; }
    friend bool operator==(const Interval&, const Interval&) = default;
  };

  Box() = default;

  explicit Box(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
    if (bounds_.empty()) throw ModelError("box must have at least one dimension");
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      const auto& b = bounds_[i];
      if (!std::isfinite(b.lower) || !std::isfinite(b.upper))
        throw ModelError("box bound in dimension " + std::to_string(i) +
                         " is not finite");
      if (!(b.lower < b.upper))
        throw ModelError("degenerate box: dimension " + std::to_string(i) +
                         " has lower >= upper");
    }
    if (!(volume() > 0.0) || !std::isfinite(volume()))
      throw ModelError("box volume is not finite and positive");
  }

  Box(std::initializer_list<Interval> bounds)
      : Box(std::vector<Interval>(bounds)) {}

  /// Parses "lo:hi,lo:hi,..." with one pair per dimension.
  static Box parse(std::string_view text) {
    std::vector<Interval> bounds;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      const auto piece = text.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      const auto colon = piece.find(':');
      if (colon == std::string_view::npos)
        throw ModelError("box component '" + std::string(piece) +
                         "' is not of the form lo:hi");
      bounds.push_back({parse_number(piece.substr(0, colon)),
                        parse_number(piece.substr(colon + 1))});
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return Box(std::move(bounds));
  }

  std::size_t dims() const noexcept { return bounds_.size(); }
  const std::vector<Interval>& bounds() const noexcept { return bounds_; }
  const Interval& operator[](std::size_t i) const { return bounds_[i]; }

  double volume() const noexcept {
    double v = 1.0;
    for (const auto& b : bounds_) v *= b.width();
    return v;
  }

  /// Half-open membership test.
  template <class Point>
  bool contains(const Point& p) const noexcept {
    for (std::size_t i = 0; i < bounds_.size(); ++i)
      if (!(p[i] >= bounds_[i].lower && p[i] < bounds_[i].upper)) return false;
    return true;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      if (i) out += ',';
      out += number(bounds_[i].lower) + ":" + number(bounds_[i].upper);
    }
    return out;
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  static double parse_number(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw ModelError("box bound '" + std::string(s) + "' is not a number");
    return v;
  }

  static std::string number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

  std::vector<Interval> bounds_;
};

}  // namespace rmc
