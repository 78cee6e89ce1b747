// SPDX-License-Identifier: Apache-2.0
//
// Summaries and goodness-of-fit checks for sample batches.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/model.hpp"

namespace rmc {

/// Mean, unbiased covariance and correlation of a sample of d-vectors.
/// Correlation entries are empty where a dimension has zero variance.
struct SummaryStats {
  std::uint64_t n = 0;
  std::size_t dims = 0;
  std::vector<double> mean;
  std::vector<double> covariance;  // row-major d x d
  std::vector<std::optional<double>> correlation;

  double cov(std::size_t i, std::size_t j) const { return covariance[i * dims + j]; }
  std::optional<double> corr(std::size_t i, std::size_t j) const {
    return correlation[i * dims + j];
  }
};

/// Single-pass mean / co-moment accumulator. merge() combines two partial
/// accumulators exactly as if their inputs had been pushed into one.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dims)
      : dims_(dims), mean_(dims, 0.0), comoment_(dims * dims, 0.0), delta_(dims) {}

  void push(std::span<const double> x) {
    ++n_;
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < dims_; ++i) {
      delta_[i] = x[i] - mean_[i];
      mean_[i] += delta_[i] * inv;
    }
    // uses the pre-update delta and the post-update residual
    for (std::size_t i = 0; i < dims_; ++i)
      for (std::size_t j = 0; j < dims_; ++j)
        comoment_[i * dims_ + j] += delta_[i] * (x[j] - mean_[j]);
  }

  void merge(const MomentAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    for (std::size_t i = 0; i < dims_; ++i) delta_[i] = other.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < dims_; ++i)
      for (std::size_t j = 0; j < dims_; ++j)
        comoment_[i * dims_ + j] += other.comoment_[i * dims_ + j] +
                                    delta_[i] * delta_[j] * na * nb / n;
    for (std::size_t i = 0; i < dims_; ++i) mean_[i] += delta_[i] * nb / n;
    n_ += other.n_;
  }

  std::uint64_t count() const noexcept { return n_; }

  SummaryStats finish() const {
    if (n_ < 2) throw Error("summary needs at least two points");
    SummaryStats s;
    s.n = n_;
    s.dims = dims_;
    s.mean = mean_;
    s.covariance.resize(dims_ * dims_);
    s.correlation.resize(dims_ * dims_);
    const double denom = static_cast<double>(n_ - 1);
    for (std::size_t i = 0; i < dims_; ++i)
      for (std::size_t j = 0; j < dims_; ++j) {
        // symmetrise: the two triangles accumulate in different orders
        const double c =
            0.5 * (comoment_[i * dims_ + j] + comoment_[j * dims_ + i]) / denom;
        s.covariance[i * dims_ + j] = c;
      }
    for (std::size_t i = 0; i < dims_; ++i)
      for (std::size_t j = 0; j < dims_; ++j) {
        const double vi = s.covariance[i * dims_ + i];
        const double vj = s.covariance[j * dims_ + j];
        if (!(vi > 0.0) || !(vj > 0.0)) continue;
        const double r = i == j ? 1.0 : s.covariance[i * dims_ + j] / std::sqrt(vi * vj);
        s.correlation[i * dims_ + j] = std::clamp(r, -1.0, 1.0);
      }
    return s;
  }

 private:
  std::size_t dims_;
  std::uint64_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
  std::vector<double> delta_;
};

inline SummaryStats summarize(const SampleBatch& batch) {
  MomentAccumulator acc(batch.dims);
  for (std::size_t i = 0; i < batch.size(); ++i) acc.push(batch.row(i));
  return acc.finish();
}

enum class GofKind { KolmogorovSmirnov, ChiSquare };

struct GofReport {
  GofKind kind = GofKind::KolmogorovSmirnov;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t dof = 0;  // chi-square only
  std::uint64_t n = 0;
  double alpha = 0.0;
  bool pass = false;
};

inline const char* to_string(GofKind k) {
  return k == GofKind::KolmogorovSmirnov ? "ks" : "chi-square";
}

/// Asymptotic one-sample KS critical value c(alpha) / sqrt(n).
inline double ks_threshold(std::uint64_t n, double alpha) {
  double c = 0.0;
  if (alpha == 0.05)
    c = 1.358;
  else if (alpha == 0.01)
    c = 1.628;
  else
    throw Error("KS test supports alpha = 0.05 or 0.01");
  return c / std::sqrt(static_cast<double>(n));
}

/// One-sample Kolmogorov-Smirnov test of ascending `sorted` against `cdf`.
template <class Cdf>
GofReport ks_test_1d(std::span<const double> sorted, Cdf&& cdf, double alpha) {
  if (sorted.empty()) throw Error("KS test needs at least one sample");
  if (!std::is_sorted(sorted.begin(), sorted.end()))
    throw Error("KS test input must be sorted ascending");
  GofReport r;
  r.kind = GofKind::KolmogorovSmirnov;
  r.n = sorted.size();
  r.alpha = alpha;
  r.threshold = ks_threshold(r.n, alpha);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  r.statistic = d;
  r.pass = r.statistic < r.threshold;
  return r;
}

/// 0.999 quantile of the chi-square distribution: tabulated for dof <= 30,
/// Wilson-Hilferty above (relative error below 2e-3 there).
inline double chi_square_quantile_999(std::size_t dof) {
  static constexpr std::array<double, 30> kTable{
      10.8276, 13.8155, 16.2662, 18.4668, 20.5150, 22.4577, 24.3219, 26.1245,
      27.8772, 29.5883, 31.2641, 32.9095, 34.5282, 36.1233, 37.6973, 39.2524,
      40.7902, 42.3124, 43.8202, 45.3147, 46.7970, 48.2679, 49.7282, 51.1786,
      52.6197, 54.0520, 55.4760, 56.8923, 58.3012, 59.7031};
  if (dof == 0) throw Error("chi-square quantile needs dof >= 1");
  if (dof <= kTable.size()) return kTable[dof - 1];
  constexpr double z = 3.090232306167813;  // standard normal 0.999 quantile
  const double k = static_cast<double>(dof);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

/// Pearson statistic sum (obs - exp)^2 / exp.
inline double chi_square_statistic(std::span<const double> observed,
                                   std::span<const double> expected) {
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = observed[i] - expected[i];
    s += diff * diff / expected[i];
  }
  return s;
}

/// Pearson test at the 0.999 level; dof = cells - 1.
inline GofReport chi_square_test(std::span<const double> observed,
                                 std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw Error("chi-square test needs matching tables of at least two cells");
  GofReport r;
  r.kind = GofKind::ChiSquare;
  r.n = static_cast<std::uint64_t>(
      std::accumulate(observed.begin(), observed.end(), 0.0));
  r.alpha = 0.001;
  r.dof = observed.size() - 1;
  r.statistic = chi_square_statistic(observed, expected);
  r.threshold = chi_square_quantile_999(r.dof);
  r.pass = r.statistic < r.threshold;
  return r;
}

namespace detail {

/// Groups cells with expected count < 5 into their largest face neighbour,
/// scanning in row-major order until every group reaches 5 (or only one
/// group remains). Returns the group root of every cell.
inline std::vector<std::size_t> merge_small_cells(
    const std::vector<double>& expected, const std::vector<std::size_t>& bins) {
  const auto cells = expected.size();
  std::vector<std::size_t> parent(cells);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<double> mass = expected;
  std::size_t groups = cells;
  auto find = [&](std::size_t k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  std::vector<std::size_t> stride(bins.size(), 1);
  for (std::size_t i = bins.size(); i-- > 1;) stride[i - 1] = stride[i] * bins[i];

  bool changed = true;
  while (changed && groups > 1) {
    changed = false;
    for (std::size_t k = 0; k < cells && groups > 1; ++k) {
      const auto g = find(k);
      if (mass[g] >= 5.0) continue;
      std::size_t best = cells;
      for (std::size_t i = 0; i < bins.size(); ++i) {
        const auto c = (k / stride[i]) % bins[i];
        for (int dir : {-1, 1}) {
          if ((dir < 0 && c == 0) || (dir > 0 && c + 1 == bins[i])) continue;
          const auto nb = find(dir < 0 ? k - stride[i] : k + stride[i]);
          if (nb == g) continue;
          if (best == cells || mass[nb] > mass[best]) best = nb;
        }
      }
      if (best == cells) continue;
      parent[g] = best;
      mass[best] += mass[g];
      --groups;
      changed = true;
    }
  }
  std::vector<std::size_t> root(cells);
  for (std::size_t k = 0; k < cells; ++k) root[k] = find(k);
  return root;
}

}  // namespace detail

/// Expected probability of each cell of a regular partition of the target's
/// support under f, by midpoint quadrature with `points_per_dim`^d points per
/// cell, normalised over the box.
inline std::vector<double> cell_probabilities(const TargetSpec& target,
                                              const std::vector<std::size_t>& bins,
                                              std::size_t points_per_dim = 32) {
  const auto& box = target.support();
  const auto d = box.dims();
  std::size_t cells = 1;
  for (auto b : bins) cells *= b;
  std::vector<double> width(d);
  for (std::size_t i = 0; i < d; ++i)
    width[i] = box[i].width() / static_cast<double>(bins[i]);
  const auto sub = detail::checked_grid_size(points_per_dim, d, ~std::uint64_t{0});

  std::vector<double> prob(cells, 0.0);
  std::vector<std::size_t> cell_idx(d), q(d);
  std::vector<double> p(d);
  for (std::size_t k = 0; k < cells; ++k) {
    auto rest = k;
    for (std::size_t i = d; i-- > 0;) {
      cell_idx[i] = rest % bins[i];
      rest /= bins[i];
    }
    std::fill(q.begin(), q.end(), 0);
    double sum = 0.0;
    for (std::uint64_t n = 0; n < sub; ++n) {
      for (std::size_t i = 0; i < d; ++i)
        p[i] = box[i].lower + width[i] * (static_cast<double>(cell_idx[i]) +
                                          (static_cast<double>(q[i]) + 0.5) /
                                              static_cast<double>(points_per_dim));
      sum += detail::density_value(target.field(), p);
      for (std::size_t i = d; i-- > 0;) {
        if (++q[i] < points_per_dim) break;
        q[i] = 0;
      }
    }
    prob[k] = sum;
  }
  const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
  if (!(total > 0.0)) throw ModelError("target has zero mass on the quadrature grid");
  for (auto& v : prob) v /= total;
  return prob;
}

/// Chi-square test of a batch against the target's cell probabilities on a
/// bins_per_dim^d partition of its support.
inline GofReport chi_square_box(const SampleBatch& batch, const TargetSpec& target,
                                std::size_t bins_per_dim) {
  if (batch.dims != target.dims())
    throw Error("batch and target dimensions differ");
  if (bins_per_dim < 1) throw Error("bins_per_dim must be at least 1");
  const auto& box = target.support();
  const std::vector<std::size_t> bins(box.dims(), bins_per_dim);
  const auto prob = cell_probabilities(target, bins);
  const double n = static_cast<double>(batch.size());

  std::vector<double> observed(prob.size(), 0.0);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto row = batch.row(r);
    std::size_t k = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double w = box[i].width() / static_cast<double>(bins[i]);
      auto c = static_cast<std::size_t>(
          std::clamp(std::floor((row[i] - box[i].lower) / w), 0.0,
                     static_cast<double>(bins[i] - 1)));
      k = k * bins[i] + c;
    }
    observed[k] += 1.0;
  }
  std::vector<double> expected(prob.size());
  for (std::size_t k = 0; k < prob.size(); ++k) expected[k] = prob[k] * n;

  const auto root = detail::merge_small_cells(expected, bins);
  std::vector<std::size_t> slot(prob.size(), prob.size());
  std::vector<double> obs_g, exp_g;
  for (std::size_t k = 0; k < prob.size(); ++k) {
    auto& s = slot[root[k]];
    if (s == prob.size()) {
      s = obs_g.size();
      obs_g.push_back(0.0);
      exp_g.push_back(0.0);
    }
    obs_g[s] += observed[k];
    exp_g[s] += expected[k];
  }
  if (obs_g.size() < 2)
    throw Error("fewer than two cells remain after merging small expected counts");
  return chi_square_test(obs_g, exp_g);
}

/// Probability a uniform-box proposal is accepted: integral of f over the box
/// divided by the envelope volume c * vol.
inline double predicted_acceptance(double f_box_integral, double c, double vol) {
  if (!(f_box_integral > 0.0 && c > 0.0 && vol > 0.0))
    throw Error("predicted_acceptance needs positive inputs");
  return f_box_integral / (c * vol);
}

}  // namespace rmc
