// SPDX-License-Identifier: Apache-2.0
//
// Rejection samplers.
//
//   srmc_sample  uniform proposal on the support box, constant envelope c:
//                accept x when f(x) > c * u.
//   grmc_sample  piecewise-uniform proposal with cell heights h_k:
//                accept x when f(x) / h_k >= u.
//
// Both split the requested count into chunks of kChunkAcceptances
// acceptances. Chunk j draws from substream(seed, j) and chunks are
// concatenated in index order, so output depends only on (inputs, seed).
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include "rmc/errors.hpp"
#include "rmc/model.hpp"
#include "rmc/parallel.hpp"
#include "rmc/random.hpp"

namespace rmc {

inline constexpr std::uint64_t kChunkAcceptances = 4096;
inline constexpr std::uint64_t kProgressInterval = std::uint64_t{1} << 16;

/// Called with running totals (proposals_drawn, accepted) each time the
/// proposal count crosses a multiple of kProgressInterval, and once more
/// with the error payload when the budget runs out.
using ProgressObserver =
    std::function<void(std::uint64_t proposals, std::uint64_t accepted)>;

struct SamplerOptions {
  unsigned threads = 0;  // 0 = default_thread_count()
  ProgressObserver observer;
  // A chunk asked for m acceptances fails once
  //   proposals > max(min_budget, budget_factor * m / max(rate, rate_floor))
  // where rate is the chunk's running acceptance rate.
  double budget_factor = 1000.0;
  std::uint64_t min_budget = 10000;
  double rate_floor = 1e-6;
};

namespace detail {

class RunMonitor {
 public:
  explicit RunMonitor(const ProgressObserver& observer) : observer_(observer) {}

  bool stopped() const noexcept { return stopped_.load(std::memory_order_relaxed); }

  void flush(std::uint64_t proposals, std::uint64_t accepted) {
    std::lock_guard lock(mutex_);
    if (stopped_) return;
    const auto before = proposals_;
    proposals_ += proposals;
    accepted_ += accepted;
    if (observer_ && before / kProgressInterval != proposals_ / kProgressInterval)
      observer_(proposals_, accepted_);
  }

  /// Records the failure and throws, unless another chunk already failed.
  void fail(std::uint64_t proposals, std::uint64_t accepted) {
    std::unique_lock lock(mutex_);
    if (stopped_) return;
    proposals_ += proposals;
    accepted_ += accepted;
    stopped_ = true;
    const double rate =
        proposals_ ? static_cast<double>(accepted_) / static_cast<double>(proposals_)
                   : 0.0;
    if (observer_) observer_(proposals_, accepted_);
    throw BudgetError(proposals_, accepted_, rate);
  }

 private:
  const ProgressObserver& observer_;
  std::mutex mutex_;
  std::atomic<bool> stopped_{false};
  std::uint64_t proposals_ = 0;
  std::uint64_t accepted_ = 0;
};

struct ChunkResult {
  std::vector<double> points;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
};

inline bool over_budget(std::uint64_t proposals, std::uint64_t accepted,
                        std::uint64_t wanted, const SamplerOptions& opts) {
  if (proposals <= opts.min_budget) return false;
  // proposals > factor * wanted / max(accepted / proposals, floor)
  const double p = static_cast<double>(proposals);
  const double effective = std::max(static_cast<double>(accepted), opts.rate_floor * p);
  return effective > opts.budget_factor * static_cast<double>(wanted);
}

/// Draws proposals until `wanted` are accepted. `step(stream, x)` fills x
/// and returns whether it is accepted.
template <class Step>
void run_chunk(std::uint64_t wanted, RandomStream stream, std::size_t dims,
               Step& step, RunMonitor& monitor, const SamplerOptions& opts,
               ChunkResult& out) {
  constexpr std::uint64_t kFlushEvery = 4096;
  out.points.reserve(wanted * dims);
  std::vector<double> x(dims);
  std::uint64_t pending_p = 0, pending_a = 0;
  while (out.accepted < wanted) {
    if (monitor.stopped()) return;
    const bool ok = step(stream, std::span<double>(x));
    ++out.proposals;
    ++pending_p;
    if (ok) {
      out.points.insert(out.points.end(), x.begin(), x.end());
      ++out.accepted;
      ++pending_a;
    }
    if (pending_p == kFlushEvery) {
      monitor.flush(pending_p, pending_a);
      pending_p = pending_a = 0;
    }
    if (over_budget(out.proposals, out.accepted, wanted, opts)) {
      monitor.fail(pending_p, pending_a);
      return;
    }
  }
  monitor.flush(pending_p, pending_a);
}

template <class MakeStep>
SampleBatch run_chunked(std::uint64_t n, std::uint64_t seed, std::size_t dims,
                        double bound_c, const SamplerOptions& opts,
                        MakeStep&& make_step) {
  if (n < 1) throw ModelError("sample size must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  const auto chunks = (n + kChunkAcceptances - 1) / kChunkAcceptances;
  std::vector<ChunkResult> results(chunks);
  RunMonitor monitor(opts.observer);
  parallel_for(chunks, opts.threads, [&](std::size_t j) {
    const auto wanted = std::min(kChunkAcceptances, n - j * kChunkAcceptances);
    auto step = make_step();
    run_chunk(wanted, substream(seed, j), dims, step, monitor, opts, results[j]);
  });

  SampleBatch batch;
  batch.dims = dims;
  batch.points.reserve(n * dims);
  for (auto& r : results) {
    batch.points.insert(batch.points.end(), r.points.begin(), r.points.end());
    batch.meta.proposals_drawn += r.proposals;
    batch.meta.accepted += r.accepted;
  }
  batch.meta.seed = seed;
  batch.meta.requested_n = n;
  batch.meta.bound_c = bound_c;
  batch.meta.acceptance_rate =
      static_cast<double>(batch.meta.accepted) /
      static_cast<double>(batch.meta.proposals_drawn);
  batch.meta.wall_time_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
  return batch;
}

}  // namespace detail

/// One uniform-envelope proposal: x uniform on the support (d draws), then
/// y = c * u (one draw). Accepts when f(x) > y.
inline bool srmc_step(const TargetSpec& target, RandomStream& stream,
                      std::span<double> x, double& y) {
  uniform_box(stream, target.support(), x);
  y = target.bound_c() * stream.uniform01();
  return detail::density_value(target.field(), x) > y;
}

/// One piecewise proposal: a cell chosen with probability m_k / M (one draw,
/// skipped when a single cell carries all the mass), x uniform in that cell
/// (d draws), u uniform (one draw). Accepts when f(x) / h_k >= u.
inline bool grmc_step(const ScalarField& field,
                      const PiecewiseUniformProposal& proposal,
                      RandomStream& stream, std::span<double> x, double& u,
                      std::size_t& cell) {
  cell = proposal.sole_cell();
  if (cell == proposal.cells()) {
    const auto& cum = proposal.cumulative();
    const double t = stream.uniform01() * proposal.total_mass();
    const auto it = std::upper_bound(cum.begin(), cum.end(), t);
    cell = static_cast<std::size_t>(it - cum.begin());
    if (cell == cum.size()) {
      // t rounded up to M; take the last cell with mass
      cell = cum.size() - 1;
      while (proposal.masses()[cell] == 0.0) --cell;
    }
  }
  const auto& box = proposal.box();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = proposal.cell_lower(cell, i);
    x[i] = affine_unit(stream.uniform01(), lo, proposal.width(i), box[i].upper);
  }
  u = stream.uniform01();
  return detail::density_value(field, x) / proposal.heights()[cell] >= u;
}

/// Uniform-box rejection sampling from a validated target, for any d >= 1.
inline SampleBatch srmc_sample(const TargetSpec& target, std::uint64_t n,
                               std::uint64_t seed,
                               const SamplerOptions& opts = {}) {
  return detail::run_chunked(n, seed, target.dims(), target.bound_c(), opts, [&] {
    return [&target, y = 0.0](RandomStream& s, std::span<double> x) mutable {
      return srmc_step(target, s, x, y);
    };
  });
}

/// Rejection sampling with a piecewise-uniform proposal.
inline SampleBatch grmc_sample(const ScalarField& field,
                               const PiecewiseUniformProposal& proposal,
                               std::uint64_t n, std::uint64_t seed,
                               const SamplerOptions& opts = {}) {
  detail::require_dims(field, proposal.box());
  const auto& h = proposal.heights();
  const double top = *std::max_element(h.begin(), h.end());
  return detail::run_chunked(n, seed, field.dims(), top, opts, [&] {
    return [&field, &proposal, u = 0.0, k = std::size_t{0}](
               RandomStream& s, std::span<double> x) mutable {
      return grmc_step(field, proposal, s, x, u, k);
    };
  });
}

/// One recorded proposal of srmc_trace.
struct Proposal {
  std::vector<double> point;
  double y = 0.0;  // c * u, the height the density was compared against
  bool accepted = false;
};

/// Replays chunk `chunk` of srmc_sample(target, n, seed) proposal by
/// proposal, stopping after `max_proposals` proposals or `max_accepted`
/// acceptances. The accepted entries are exactly that chunk's leading rows
/// of the batch.
inline std::vector<Proposal> srmc_trace(
    const TargetSpec& target, std::uint64_t seed, std::uint64_t chunk,
    std::uint64_t max_proposals,
    std::uint64_t max_accepted = ~std::uint64_t{0}) {
  auto stream = substream(seed, chunk);
  std::vector<Proposal> out;
  std::uint64_t accepted = 0;
  while (out.size() < max_proposals && accepted < max_accepted) {
    Proposal p;
    p.point.resize(target.dims());
    p.accepted = srmc_step(target, stream, p.point, p.y);
    accepted += p.accepted ? 1 : 0;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace rmc
