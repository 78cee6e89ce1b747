// SPDX-License-Identifier: Apache-2.0
//
// Region-restricted integrals of a nonnegative integrand g over D inside a
// box S, by indicator screening:
//
//   integral_D g  =  integral_S g  *  P_f(X in D),   f = g / integral_S g
//
// integral_S g is estimated as vol(S) * mean of g over uniform draws (S1),
// P_f(X in D) as the fraction of rejection samples from f (S2) that fall in
// D. integrate_direct is the plain uniform-draw estimator of the same
// quantity and serves as an independent cross-check.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rmc/box.hpp"
#include "rmc/errors.hpp"
#include "rmc/expression.hpp"
#include "rmc/model.hpp"
#include "rmc/random.hpp"
#include "rmc/samplers.hpp"

namespace rmc {

struct IntegralEstimate {
  double value = 0.0;  // mean of per_replication_values
  std::uint64_t replications = 0;
  std::vector<double> per_replication_values;
  double std_error = 0.0;  // sd(per_replication_values) / sqrt(R)
  // Totals over all replications.
  std::uint64_t n_uniform = 0;    // |S1|
  std::uint64_t n_screened = 0;   // |S2|
  std::uint64_t n_in_region = 0;  // members of S2 inside the region
  std::uint64_t proposals_drawn = 0;
  double bound_c = 0.0;
  // Per-replication factors of the screened estimator.
  std::vector<double> box_integrals;     // vol * mean(g over S1)
  std::vector<double> region_fractions;  // #(S2 in region) / |S2|
};

namespace detail {

inline void finish_estimate(IntegralEstimate& est) {
  const auto& v = est.per_replication_values;
  const double r = static_cast<double>(v.size());
  est.replications = v.size();
  est.value = std::accumulate(v.begin(), v.end(), 0.0) / r;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - est.value) * (x - est.value);
    est.std_error = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
  }
}

inline bool in_region(const Expression& region, std::span<const double> p) {
  const double v = region.eval(p);
  if (v == 1.0) return true;
  if (v == 0.0) return false;
  throw ModelError("region expression evaluated to " + format_double(v) +
                       " (expected 0 or 1) at " + point_string(p),
                   {p.begin(), p.end()}, v);
}

inline void check_integration_inputs(const ScalarField& g, const Expression& region,
                                     const Box& box, std::uint64_t n,
                                     std::uint64_t reps) {
  require_dims(g, box);
  if (region.dims() != box.dims())
    throw ModelError("region has " + std::to_string(region.dims()) +
                     " variables but the box has " + std::to_string(box.dims()) +
                     " dimensions");
  if (n < 1) throw ModelError("sample size must be at least 1");
  if (reps < 1) throw ModelError("replication count must be at least 1");
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultReplications = 10;

/// Indicator-screening estimate of the integral of g (g >= 0) over the
/// region inside `box`. Replication r uses substream(seed, r): n uniform
/// draws for S1, then one 64-bit draw seeds the n-sample rejection run S2.
inline IntegralEstimate integrate_screened(const ScalarField& g,
                                           const Expression& region,
                                           const Box& box, std::uint64_t n,
                                           std::uint64_t reps, std::uint64_t seed,
                                           const SamplerOptions& opts = {}) {
  detail::check_integration_inputs(g, region, box, n, reps);
  // probes g >= 0 and estimates the envelope of f, which is g up to scale
  const auto target = validate_target(g, box);
  const double vol = box.volume();

  IntegralEstimate est;
  est.bound_c = target.bound_c();
  std::vector<double> p(box.dims());
  for (std::uint64_t r = 0; r < reps; ++r) {
    auto stream = substream(seed, r);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      uniform_box(stream, box, p);
      sum += detail::density_value(g, p);
    }
    const double a = vol * sum / static_cast<double>(n);

    const auto screened = srmc_sample(target, n, stream.next_u64(), opts);
    std::uint64_t inside = 0;
    for (std::size_t i = 0; i < screened.size(); ++i)
      inside += detail::in_region(region, screened.row(i)) ? 1 : 0;
    const double b = static_cast<double>(inside) / static_cast<double>(n);

    est.box_integrals.push_back(a);
    est.region_fractions.push_back(b);
    est.per_replication_values.push_back(a * b);
    est.n_uniform += n;
    est.n_screened += screened.size();
    est.n_in_region += inside;
    est.proposals_drawn += screened.meta.proposals_drawn;
  }
  detail::finish_estimate(est);
  return est;
}

/// Plain Monte Carlo: vol * mean of g(u) * region(u) over n uniform draws
/// per replication. g may take either sign.
inline IntegralEstimate integrate_direct(const ScalarField& g,
                                         const Expression& region, const Box& box,
                                         std::uint64_t n, std::uint64_t reps,
                                         std::uint64_t seed) {
  detail::check_integration_inputs(g, region, box, n, reps);
  const double vol = box.volume();
  IntegralEstimate est;
  std::vector<double> p(box.dims());
  for (std::uint64_t r = 0; r < reps; ++r) {
    auto stream = substream(seed, r);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      uniform_box(stream, box, p);
      if (detail::in_region(region, p)) sum += g(p);
    }
    est.per_replication_values.push_back(vol * sum / static_cast<double>(n));
    est.n_uniform += n;
  }
  detail::finish_estimate(est);
  return est;
}

}  // namespace rmc
