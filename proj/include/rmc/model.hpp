// SPDX-License-Identifier: Apache-2.0
//
// Targets, supports and envelopes: the inputs every rejection sampler
// consumes.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmc/box.hpp"
#include "rmc/errors.hpp"
#include "rmc/expression.hpp"
#include "rmc/random.hpp"

namespace rmc {

/// A real-valued function of the coordinates named by its VarOrder.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Expression expr) : expr_(std::move(expr)) {}

  static ScalarField parse(std::string_view text, const VarOrder& vars) {
    return ScalarField(Expression::parse(text, vars));
  }

  double operator()(std::span<const double> point) const {
    return expr_.eval(point);
  }

  std::size_t dims() const noexcept { return expr_.dims(); }
  const VarOrder& vars() const noexcept { return expr_.vars(); }
  const Expression& expr() const noexcept { return expr_; }

 private:
  Expression expr_;
};

namespace detail {

inline void require_dims(const ScalarField& field, const Box& box) {
  if (field.dims() != box.dims())
    throw ModelError("field has " + std::to_string(field.dims()) +
                     " variables but the box has " +
                     std::to_string(box.dims()) + " dimensions");
}

inline std::string point_string(std::span<const double> p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += format_double(p[i]);
  }
  return out + ")";
}

/// Evaluates a density-like field and rejects negative or non-finite values.
inline double density_value(const ScalarField& field,
                            std::span<const double> p) {
  const double v = field(p);
  if (!std::isfinite(v))
    throw ModelError("field is not finite at " + point_string(p),
                     {p.begin(), p.end()}, v);
  if (v < 0.0)
    throw ModelError("field is negative (" + format_double(v) + ") at " +
                         point_string(p),
                     {p.begin(), p.end()}, v);
  return v;
}

inline std::uint64_t checked_grid_size(std::size_t per_dim, std::size_t dims,
                                       std::uint64_t limit) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < dims; ++i) {
    if (total > limit / per_dim)
      throw ModelError("grid of " + std::to_string(per_dim) + "^" +
                       std::to_string(dims) + " points exceeds the limit of " +
                       std::to_string(limit));
    total *= per_dim;
  }
  return total;
}

}  // namespace detail

inline constexpr std::uint64_t kMaxGridPoints = std::uint64_t{1} << 22;

struct BoundEstimate {
  double bound = 0.0;          // safety * max_value
  double max_value = 0.0;      // largest field value seen on the grid
  std::vector<double> argmax;  // first grid point (row-major) reaching it
};

/// Maximum of `field` over a regular grid of `grid_per_dim` points per axis
/// that includes every box corner, scaled by `safety`.
inline BoundEstimate estimate_bound_detail(const ScalarField& field,
                                           const Box& box,
                                           std::size_t grid_per_dim,
                                           double safety) {
  detail::require_dims(field, box);
  if (grid_per_dim < 2) throw ModelError("grid_per_dim must be at least 2");
  if (!(safety >= 1.0)) throw ModelError("safety factor must be at least 1");
  const auto d = box.dims();
  const auto total = detail::checked_grid_size(grid_per_dim, d, kMaxGridPoints);

  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  BoundEstimate out;
  out.max_value = -1.0;
  const double last = static_cast<double>(grid_per_dim - 1);
  for (std::uint64_t n = 0; n < total; ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto& b = box[i];
      p[i] = idx[i] + 1 == grid_per_dim
                 ? b.upper
                 : b.lower + (static_cast<double>(idx[i]) / last) * b.width();
    }
    const double v = detail::density_value(field, p);
    if (v > out.max_value) {
      out.max_value = v;
      out.argmax = p;
    }
    // row-major odometer: last dimension varies fastest
    for (std::size_t i = d; i-- > 0;) {
      if (++idx[i] < grid_per_dim) break;
      idx[i] = 0;
    }
  }
  out.bound = safety * out.max_value;
  return out;
}

inline double estimate_bound(const ScalarField& field, const Box& box,
                             std::size_t grid_per_dim, double safety) {
  return estimate_bound_detail(field, box, grid_per_dim, safety).bound;
}

/// Odd grid size per dimension keeping the total near 2^20 points.
inline std::size_t default_bound_grid(std::size_t dims) {
  auto g = static_cast<std::size_t>(
      std::floor(std::pow(double(std::uint64_t{1} << 20), 1.0 / double(dims))));
  g = std::clamp<std::size_t>(g, 3, 1025);
  if (g % 2 == 0) --g;
  return g;
}

/// Plain Monte Carlo estimate of the share of f's mass lying outside the
/// support, measured on the support widened by `expansion` widths per side.
struct TruncationReport {
  Box widened;
  double outside_fraction = 0.0;
  double std_error = 0.0;
  std::uint64_t draws = 0;
};

inline TruncationReport estimate_truncation_mass(const ScalarField& field,
                                                 const Box& box,
                                                 std::uint64_t draws,
                                                 RandomStream stream,
                                                 double expansion = 1.0) {
  detail::require_dims(field, box);
  std::vector<Box::Interval> wide;
  for (const auto& b : box.bounds())
    wide.push_back({b.lower - expansion * b.width(), b.upper + expansion * b.width()});
  TruncationReport rep{Box(wide)};
  rep.draws = draws;
  std::vector<double> p(box.dims());
  double total = 0.0, outside = 0.0, outside_sq = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    uniform_box(stream, rep.widened, p);
    const double v = detail::density_value(field, p);
    total += v;
    if (!box.contains(p)) {
      outside += v;
      outside_sq += v * v;
    }
  }
  if (total > 0.0) {
    rep.outside_fraction = outside / total;
    // ratio-estimator variance with denominator treated as fixed
    const double n = static_cast<double>(draws);
    const double mean_out = outside / n;
    const double var_out = std::max(0.0, outside_sq / n - mean_out * mean_out);
    rep.std_error = std::sqrt(var_out / n) / (total / n);
  }
  return rep;
}

/// A validated target: field, bounded support and envelope constant c with
/// c >= f on every validation probe.
class TargetSpec {
 public:
  const ScalarField& field() const noexcept { return field_; }
  const Box& support() const noexcept { return support_; }
  double bound_c() const noexcept { return bound_c_; }
  std::size_t dims() const noexcept { return support_.dims(); }
  /// True when c was estimated rather than supplied.
  bool bound_estimated() const noexcept { return estimated_; }
  const std::optional<TruncationReport>& truncation() const noexcept {
    return truncation_;
  }

 private:
  friend struct TargetBuilder;
  TargetSpec(ScalarField f, Box b, double c, bool estimated)
      : field_(std::move(f)), support_(std::move(b)), bound_c_(c),
        estimated_(estimated) {}

  ScalarField field_;
  Box support_;
  double bound_c_ = 0.0;
  bool estimated_ = false;
  std::optional<TruncationReport> truncation_;
};

struct ValidationOptions {
  std::uint64_t probes = 1000;
  std::uint64_t probe_seed = 0x5EED5EED5EED5EEDull;
  /// Grid and safety used when no bound is supplied.
  std::size_t bound_grid = 0;  // 0 = default_bound_grid(dims)
  double bound_safety = 1.0;
  /// Draws for the optional truncation-mass estimate; 0 disables it.
  std::uint64_t truncation_draws = 0;
};

struct TargetBuilder {
  static TargetSpec make(ScalarField f, Box b, double c, bool estimated) {
    return TargetSpec(std::move(f), std::move(b), c, estimated);
  }
  static void set_truncation(TargetSpec& t, TruncationReport r) {
    t.truncation_ = std::move(r);
  }
};

/// Probe-checks `field` on `box` and either checks the supplied envelope
/// constant or estimates one.
inline TargetSpec validate_target(const ScalarField& field, const Box& box,
                                  std::optional<double> bound_c = std::nullopt,
                                  const ValidationOptions& opts = {}) {
  detail::require_dims(field, box);
  if (bound_c && !(*bound_c > 0.0 && std::isfinite(*bound_c)))
    throw ModelError("envelope constant must be positive and finite, got " +
                     detail::format_double(*bound_c));

  auto stream = make_stream(opts.probe_seed);
  std::vector<double> p(box.dims());
  double probe_max = 0.0;
  for (std::uint64_t i = 0; i < opts.probes; ++i) {
    uniform_box(stream, box, p);
    const double v = detail::density_value(field, p);
    if (bound_c && v > *bound_c)
      throw ModelError("envelope constant " + detail::format_double(*bound_c) +
                           " is violated at " + detail::point_string(p) +
                           " where f = " + detail::format_double(v),
                       p, v);
    probe_max = std::max(probe_max, v);
  }

  double c = 0.0;
  if (bound_c) {
    c = *bound_c;
  } else {
    const auto grid =
        opts.bound_grid ? opts.bound_grid : default_bound_grid(box.dims());
    const auto est = estimate_bound_detail(field, box, grid, opts.bound_safety);
    c = std::max(est.bound, opts.bound_safety * probe_max);
    if (!(c > 0.0))
      throw ModelError("field is zero on every grid and probe point; no envelope "
                       "constant can be estimated");
  }

  auto target = TargetBuilder::make(field, box, c, !bound_c.has_value());
  if (opts.truncation_draws > 0)
    TargetBuilder::set_truncation(
        target, estimate_truncation_mass(field, box, opts.truncation_draws,
                                         make_stream(opts.probe_seed + 1)));
  return target;
}

/// Histogram-shaped envelope: constant height h_k on each cell of a regular
/// partition of the box, h_k >= f on cell k.
class PiecewiseUniformProposal {
 public:
  static constexpr double kSafety = 1.2;
  static constexpr std::size_t kRefine = 8;

  const Box& box() const noexcept { return box_; }
  const std::vector<std::size_t>& bins() const noexcept { return bins_; }
  const std::vector<double>& heights() const noexcept { return heights_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  /// Running sums of masses(); the last entry is total_mass().
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  double total_mass() const noexcept { return cumulative_.back(); }
  double cell_volume() const noexcept { return cell_volume_; }
  std::size_t cells() const noexcept { return heights_.size(); }
  double width(std::size_t dim) const noexcept { return widths_[dim]; }

  /// Lower corner coordinate of cell `k` along `dim`.
  double cell_lower(std::size_t k, std::size_t dim) const noexcept {
    return box_[dim].lower + static_cast<double>(coord(k, dim)) * widths_[dim];
  }

  /// Per-dimension index of cell `k` (row-major, last dimension fastest).
  std::size_t coord(std::size_t k, std::size_t dim) const noexcept {
    for (std::size_t i = bins_.size(); --i > dim;) k /= bins_[i];
    return k % bins_[dim];
  }

  std::size_t cell_of(std::span<const double> p) const noexcept {
    std::size_t k = 0;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      auto c = static_cast<std::size_t>(
          std::floor((p[i] - box_[i].lower) / widths_[i]));
      c = std::min(c, bins_[i] - 1);
      k = k * bins_[i] + c;
    }
    return k;
  }

  double height_at(std::span<const double> p) const noexcept {
    return heights_[cell_of(p)];
  }

  /// The only positive-mass cell, or cells() when there are several.
  std::size_t sole_cell() const noexcept { return sole_cell_; }

  static PiecewiseUniformProposal build(const ScalarField& field, const Box& box,
                                        std::vector<std::size_t> bins);

 private:
  Box box_;
  std::vector<std::size_t> bins_;
  std::vector<double> widths_;
  std::vector<double> heights_;
  std::vector<double> masses_;
  std::vector<double> cumulative_;
  double cell_volume_ = 0.0;
  std::size_t sole_cell_ = 0;
};

inline PiecewiseUniformProposal PiecewiseUniformProposal::build(
    const ScalarField& field, const Box& box, std::vector<std::size_t> bins) {
  detail::require_dims(field, box);
  if (bins.size() != box.dims())
    throw ModelError("need one bin count per dimension");
  std::uint64_t cells = 1;
  for (auto b : bins) {
    if (b < 1) throw ModelError("bin counts must be at least 1");
    if (cells > kMaxGridPoints / b)
      throw ModelError("partition exceeds " + std::to_string(kMaxGridPoints) +
                       " cells");
    cells *= b;
  }

  PiecewiseUniformProposal out;
  out.box_ = box;
  out.bins_ = std::move(bins);
  const auto d = box.dims();
  out.cell_volume_ = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    out.widths_.push_back(box[i].width() / static_cast<double>(out.bins_[i]));
    out.cell_volume_ *= out.widths_.back();
  }

  // (kRefine + 1)^d points per cell: corners of an 8^d refinement
  const std::size_t per_dim = kRefine + 1;
  const auto sub = detail::checked_grid_size(per_dim, d, ~std::uint64_t{0});
  out.heights_.resize(cells);
  out.masses_.resize(cells);
  out.cumulative_.resize(cells);
  std::vector<std::size_t> idx(d);
  std::vector<double> p(d);
  double running = 0.0;
  std::size_t positive = 0;
  for (std::size_t k = 0; k < cells; ++k) {
    double peak = 0.0;
    std::fill(idx.begin(), idx.end(), 0);
    for (std::uint64_t n = 0; n < sub; ++n) {
      for (std::size_t i = 0; i < d; ++i) {
        const double lo = out.cell_lower(k, i);
        p[i] = std::min(lo + out.widths_[i] * static_cast<double>(idx[i]) /
                                 static_cast<double>(kRefine),
                        box[i].upper);
      }
      peak = std::max(peak, detail::density_value(field, p));
      for (std::size_t i = d; i-- > 0;) {
        if (++idx[i] < per_dim) break;
        idx[i] = 0;
      }
    }
    out.heights_[k] = kSafety * peak;
    out.masses_[k] = out.heights_[k] * out.cell_volume_;
    running += out.masses_[k];
    out.cumulative_[k] = running;
    if (out.masses_[k] > 0.0) {
      ++positive;
      out.sole_cell_ = k;
    }
  }
  if (positive == 0)
    throw ModelError("field vanishes on every refinement point; the proposal "
                     "has zero mass");
  if (positive > 1) out.sole_cell_ = cells;
  return out;
}

inline PiecewiseUniformProposal build_piecewise_proposal(
    const ScalarField& field, const Box& box, std::vector<std::size_t> bins) {
  return PiecewiseUniformProposal::build(field, box, std::move(bins));
}

inline PiecewiseUniformProposal build_piecewise_proposal(
    const ScalarField& field, const Box& box, std::size_t bins_per_dim) {
  return PiecewiseUniformProposal::build(
      field, box, std::vector<std::size_t>(box.dims(), bins_per_dim));
}

struct RunMetadata {
  std::uint64_t seed = 0;
  std::uint64_t requested_n = 0;
  std::uint64_t proposals_drawn = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate = 0.0;
  double wall_time_ms = 0.0;
  double bound_c = 0.0;
};

/// Accepted draws in acceptance order, stored row-major (N x d).
struct SampleBatch {
  std::size_t dims = 0;
  std::vector<double> points;
  RunMetadata meta;

  std::size_t size() const noexcept { return dims ? points.size() / dims : 0; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {points.data() + i * dims, dims};
  }
  /// Coordinate `dim` of every row.
  std::vector<double> column(std::size_t dim) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = points[i * dims + dim];
    return out;
  }
};

}  // namespace rmc
