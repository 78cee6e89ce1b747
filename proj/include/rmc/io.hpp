// SPDX-License-Identifier: Apache-2.0
//
// Deterministic text outputs: sample CSV and SVG scatter plots.
#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rmc/box.hpp"
#include "rmc/expression.hpp"
#include "rmc/model.hpp"
#include "rmc/samplers.hpp"

namespace rmc {

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v) { return detail::format_double(v); }

/// Header of variable names, then one row per sample; LF endings.
inline void write_csv(std::ostream& os, const SampleBatch& batch,
                      const VarOrder& vars) {
  os << vars.joined() << '\n';
  std::array<char, 32> buf{};
  std::string line;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    line.clear();
    const auto row = batch.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), row[i]);
      line.append(buf.data(), res.ptr);
    }
    line += '\n';
    os << line;
  }
}

namespace detail {

inline constexpr double kSvgSize = 800.0;
inline constexpr double kSvgMargin = 60.0;

/// Maps data coordinates in [lo, hi] onto the plotting area.
struct SvgFrame {
  double x_lo, x_hi, y_lo, y_hi;

  double px(double x) const {
    return kSvgMargin + (x - x_lo) / (x_hi - x_lo) * (kSvgSize - 2 * kSvgMargin);
  }
  double py(double y) const {
    return kSvgSize - kSvgMargin -
           (y - y_lo) / (y_hi - y_lo) * (kSvgSize - 2 * kSvgMargin);
  }
};

inline std::string fixed2(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, 2);
  return std::string(buf.data(), res.ptr);
}

inline void svg_open(std::ostream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
        "viewBox=\"0 0 800 800\">\n"
     << "<title>" << title << "</title>\n"
     << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
}

inline void svg_axes(std::ostream& os, const SvgFrame& f, const std::string& x_name,
                     const std::string& y_name) {
  const double lo = kSvgMargin, hi = kSvgSize - kSvgMargin;
  os << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
     << "<rect x=\"" << lo << "\" y=\"" << lo << "\" width=\"" << hi - lo
     << "\" height=\"" << hi - lo << "\"/>\n</g>\n";
  os << "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"14\" "
        "fill=\"black\">\n";
  os << "<text x=\"" << lo << "\" y=\"" << hi + 20 << "\" text-anchor=\"middle\">"
     << format_number(f.x_lo) << "</text>\n";
  os << "<text x=\"" << hi << "\" y=\"" << hi + 20 << "\" text-anchor=\"middle\">"
     << format_number(f.x_hi) << "</text>\n";
  os << "<text x=\"" << lo - 8 << "\" y=\"" << hi + 5 << "\" text-anchor=\"end\">"
     << format_number(f.y_lo) << "</text>\n";
  os << "<text x=\"" << lo - 8 << "\" y=\"" << lo + 5 << "\" text-anchor=\"end\">"
     << format_number(f.y_hi) << "</text>\n";
  os << "<text x=\"400\" y=\"" << hi + 45 << "\" text-anchor=\"middle\">" << x_name
     << "</text>\n";
  os << "<text x=\"20\" y=\"400\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 20 400)\">"
     << y_name << "</text>\n</g>\n";
}

}  // namespace detail

/// 800x800 scatter of a two-dimensional batch over its support box; one
/// radius-1 circle per sample, axes labelled with the box bounds.
inline void write_svg_scatter(std::ostream& os, const SampleBatch& batch,
                              const Box& box, const VarOrder& vars) {
  if (batch.dims != 2 || box.dims() != 2)
    throw Error("scatter plots need two-dimensional samples");
  const detail::SvgFrame f{box[0].lower, box[0].upper, box[1].lower, box[1].upper};
  detail::svg_open(os, "Rejection sampling scatter, n = " +
                           std::to_string(batch.size()));
  detail::svg_axes(os, f, vars[0], vars[1]);
  os << "<g id=\"points\" fill=\"steelblue\">\n";
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto row = batch.row(r);
    os << "<circle cx=\"" << detail::fixed2(f.px(row[0])) << "\" cy=\""
       << detail::fixed2(f.py(row[1])) << "\" r=\"1\"/>\n";
  }
  os << "</g>\n</svg>\n";
}

/// One-dimensional rejection picture: proposals (x, y) over [lo, hi] x [0, c],
/// accepted ones (y below the density) in one colour, rejected in another,
/// with the density curve on top.
inline void write_svg_rejection(std::ostream& os, const TargetSpec& target,
                                std::span<const Proposal> trace) {
  if (target.dims() != 1) throw Error("rejection plots need a one-dimensional target");
  const auto& b = target.support()[0];
  const detail::SvgFrame f{b.lower, b.upper, 0.0, target.bound_c()};
  detail::svg_open(os, "Rejection sampling principle, " +
                           std::to_string(trace.size()) + " proposals");
  detail::svg_axes(os, f, target.field().vars()[0], "y");
  for (const bool accepted : {false, true}) {
    os << "<g id=\"" << (accepted ? "accepted" : "rejected") << "\" fill=\""
       << (accepted ? "steelblue" : "lightgray") << "\">\n";
    for (const auto& p : trace) {
      if (p.accepted != accepted) continue;
      os << "<circle cx=\"" << detail::fixed2(f.px(p.point[0])) << "\" cy=\""
         << detail::fixed2(f.py(p.y)) << "\" r=\"1\"/>\n";
    }
    os << "</g>\n";
  }
  os << "<polyline id=\"density\" fill=\"none\" stroke=\"firebrick\" "
        "stroke-width=\"2\" points=\"";
  constexpr int kCurve = 200;
  for (int i = 0; i <= kCurve; ++i) {
    const double x = i == kCurve ? b.upper : b.lower + b.width() * i / kCurve;
    const double v = target.field()(std::span<const double>(&x, 1));
    if (i) os << ' ';
    os << detail::fixed2(f.px(x)) << ',' << detail::fixed2(f.py(v));
  }
  os << "\"/>\n</svg>\n";
}

}  // namespace rmc
