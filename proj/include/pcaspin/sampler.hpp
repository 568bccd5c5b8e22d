#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

#include "pcaspin/common.hpp"
#include "pcaspin/model.hpp"
#include "pcaspin/parallel.hpp"
#include "pcaspin/rng.hpp"

/// Markov chain samplers.
///
/// The parallel chain updates every site simultaneously: given the current
/// configuration s, the new spins are independent with
///
///   P(t_i = -1 | s) = sigmoid(2 h_i(s) + s_i log delta),
///
/// equivalently a flip probability delta phi_i / (1 + delta phi_i).  All
/// randomness is drawn from the counter-based generator as a pure function of
/// (seed, step, site, lane), so trajectories are bit-identical for any thread
/// count.  The per-site rule "t_i = -1 iff u_i <= P(t_i = -1 | s)" is
/// monotone in s for ferromagnetic couplings, which the coupled chains use.
namespace pcaspin::sampler {

/// P(t_i = -1 | s) for the parallel update; exact at delta = 0.
inline double pca_minus_probability(const CouplingModel& m,
                                    const InertiaParameter& in,
                                    const SpinConfiguration& c,
                                    std::size_t i) {
  return sigmoid(2.0 * m.local_field(c, i) + c.s[i] * in.log_delta());
}

/// All-plus configuration (the top of the partial order).
inline SpinConfiguration all_plus(std::size_t n) {
  return SpinConfiguration(n, 1);
}

/// All-minus configuration (the bottom of the partial order).
inline SpinConfiguration all_minus(std::size_t n) {
  return SpinConfiguration(n, -1);
}

/// Uniformly random configuration drawn from the init lane of `seed`.
inline SpinConfiguration random_configuration(std::size_t n,
                                              std::uint64_t seed) {
  SpinConfiguration c(n);
  for (std::size_t i = 0; i < n; ++i)
    c.s[i] = rng::uniform01(seed, 0, i, rng::Lane::kInit) < 0.5
                 ? std::int8_t{-1}
                 : std::int8_t{1};
  return c;
}

/// Reusable buffers for the parallel update.
struct Workspace {
  std::vector<std::int8_t> next;
  std::vector<long> block_flips;
};

/// One synchronous update of every site.  Reads `c`, writes the new
/// configuration back into `c`, and returns the number of sites that changed
/// sign.  Deterministic in (seed, step) for any `threads`.
inline long pca_step(const CouplingModel& m, const InertiaParameter& in,
                     SpinConfiguration& c, Workspace& ws, std::uint64_t seed,
                     std::uint64_t step, unsigned threads = 1) {
  const std::size_t n = m.size();
  ws.next.resize(n);
  ws.block_flips.assign(parallel::block_count(n), 0);
  const double log_delta = in.log_delta();
  if (m.kind() == CouplingModel::Kind::kComplete) {
    // Mean-field fast path: h_i depends only on the spin sum.
    const long S = c.spin_sum();
    parallel::for_blocks(
        n, threads, [&](std::size_t begin, std::size_t end, std::size_t b) {
          long flips = 0;
          for (std::size_t i = begin; i < end; ++i) {
            double h = m.local_field_from_sum(S, c.s[i]);
            double p_minus = sigmoid(2.0 * h + c.s[i] * log_delta);
            double u = rng::uniform01(seed, step, i, rng::Lane::kFlip);
            std::int8_t t = u <= p_minus ? std::int8_t{-1} : std::int8_t{1};
            ws.next[i] = t;
            if (t != c.s[i]) ++flips;
          }
          ws.block_flips[b] = flips;
        });
  } else {
    parallel::for_blocks(
        n, threads, [&](std::size_t begin, std::size_t end, std::size_t b) {
          long flips = 0;
          for (std::size_t i = begin; i < end; ++i) {
            double acc = 0.0;
            for (std::size_t k = m.neighbor_begin(i); k < m.neighbor_end(i);
                 ++k)
              acc += m.neighbor_weight(k) *
                     c.s[static_cast<std::size_t>(m.neighbor_site(k))];
            double p_minus = sigmoid(-2.0 * acc + c.s[i] * log_delta);
            double u = rng::uniform01(seed, step, i, rng::Lane::kFlip);
            std::int8_t t = u <= p_minus ? std::int8_t{-1} : std::int8_t{1};
            ws.next[i] = t;
            if (t != c.s[i]) ++flips;
          }
          ws.block_flips[b] = flips;
        });
  }
  c.s.swap(ws.next);
  long total = 0;
  for (long f : ws.block_flips) total += f;
  return total;
}

/// One sequential heat-bath update targeting pi_G: pick a site uniformly,
/// resample it from the exact conditional P(s_i = +1 | rest) =
/// sigmoid(-4 h_i).  Returns 1 if the spin changed.
inline long gibbs_step(const CouplingModel& m, SpinConfiguration& c,
                       std::uint64_t seed, std::uint64_t step) {
  const std::size_t n = m.size();
  std::size_t i = static_cast<std::size_t>(
      rng::uniform_index(seed, step, 0, rng::Lane::kSelect, n));
  double p_minus = sigmoid(4.0 * m.local_field(c, i));
  double u = rng::uniform01(seed, step, 0, rng::Lane::kSpin);
  std::int8_t t = u <= p_minus ? std::int8_t{-1} : std::int8_t{1};
  long changed = t != c.s[i] ? 1 : 0;
  c.s[i] = t;
  return changed;
}

/// True when c is the canonical representative of its global-flip class
/// {c, -c}: positive magnetization, or zero magnetization with s_0 = +1.
inline bool in_positive_half(const SpinConfiguration& c) {
  long sum = c.spin_sum();
  if (sum != 0) return sum > 0;
  return c.s[0] > 0;
}

inline void global_flip(SpinConfiguration& c) {
  for (auto& v : c.s) v = static_cast<std::int8_t>(-v);
}

/// Result of one reflected update.
struct ReflectedStep {
  long flips = 0;     ///< sites changed by the parallel update itself
  bool reflected = false;  ///< whether the result was mapped to -result
};

/// One update of the reflected (global-flip quotient) chain: a parallel
/// update followed by the map t -> -t whenever t falls outside the canonical
/// half.  For zero-field models this chain is reversible with respect to the
/// stationary law restricted to the canonical half.
inline ReflectedStep reflected_pca_step(const CouplingModel& m,
                                        const InertiaParameter& in,
                                        SpinConfiguration& c, Workspace& ws,
                                        std::uint64_t seed, std::uint64_t step,
                                        unsigned threads = 1) {
  ReflectedStep r;
  r.flips = pca_step(m, in, c, ws, seed, step, threads);
  if (!in_positive_half(c)) {
    global_flip(c);
    r.reflected = true;
  }
  return r;
}

/// One synchronous update of two chains driven by the same per-site uniform
/// variates.  Returns the number of disagreeing sites afterwards.  For
/// ferromagnetic couplings the shared rule preserves the partial order, so a
/// chain started above stays above.
inline long coupled_pca_step(const CouplingModel& m, const InertiaParameter& in,
                             SpinConfiguration& hi, SpinConfiguration& lo,
                             Workspace& ws_hi, Workspace& ws_lo,
                             std::uint64_t seed, std::uint64_t step,
                             unsigned threads = 1) {
  const std::size_t n = m.size();
  ws_hi.next.resize(n);
  ws_lo.next.resize(n);
  ws_hi.block_flips.assign(parallel::block_count(n), 0);
  const double log_delta = in.log_delta();
  const bool complete = m.kind() == CouplingModel::Kind::kComplete;
  const long S_hi = complete ? hi.spin_sum() : 0;
  const long S_lo = complete ? lo.spin_sum() : 0;
  parallel::for_blocks(
      n, threads, [&](std::size_t begin, std::size_t end, std::size_t b) {
        long diff = 0;
        for (std::size_t i = begin; i < end; ++i) {
          double h_hi, h_lo;
          if (complete) {
            h_hi = m.local_field_from_sum(S_hi, hi.s[i]);
            h_lo = m.local_field_from_sum(S_lo, lo.s[i]);
          } else {
            double a = 0.0, c2 = 0.0;
            for (std::size_t k = m.neighbor_begin(i); k < m.neighbor_end(i);
                 ++k) {
              std::size_t j = static_cast<std::size_t>(m.neighbor_site(k));
              a += m.neighbor_weight(k) * hi.s[j];
              c2 += m.neighbor_weight(k) * lo.s[j];
            }
            h_hi = -a;
            h_lo = -c2;
          }
          double u = rng::uniform01(seed, step, i, rng::Lane::kFlip);
          std::int8_t t_hi =
              u <= sigmoid(2.0 * h_hi + hi.s[i] * log_delta)
                  ? std::int8_t{-1}
                  : std::int8_t{1};
          std::int8_t t_lo =
              u <= sigmoid(2.0 * h_lo + lo.s[i] * log_delta)
                  ? std::int8_t{-1}
                  : std::int8_t{1};
          ws_hi.next[i] = t_hi;
          ws_lo.next[i] = t_lo;
          if (t_hi != t_lo) ++diff;
        }
        ws_hi.block_flips[b] = diff;
      });
  hi.s.swap(ws_hi.next);
  lo.s.swap(ws_lo.next);
  long total = 0;
  for (long d : ws_hi.block_flips) total += d;
  return total;
}

/// Coalescence-time experiment for the coupled chains started from the
/// all-plus / all-minus extremes.
struct CoalescenceResult {
  std::vector<long> taus;  ///< per-trial coalescence step; -1 if censored
  long censored = 0;       ///< trials that did not coalesce within max_steps
  long max_tau = 0;        ///< largest observed coalescence time

  /// Empirical quantile over the uncensored trials (q in [0, 1]).
  double quantile(double q) const {
    std::vector<long> ok;
    ok.reserve(taus.size());
    for (long t : taus)
      if (t >= 0) ok.push_back(t);
    if (ok.empty()) return -1.0;
    std::sort(ok.begin(), ok.end());
    double pos = q * static_cast<double>(ok.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = lo + 1 < ok.size() ? lo + 1 : lo;
    double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * static_cast<double>(ok[lo]) +
           frac * static_cast<double>(ok[hi]);
  }

  /// Empirical survival fraction P(tau > t).
  double survival(long t) const {
    long over = 0;
    for (long tau : taus)
      if (tau < 0 || tau > t) ++over;
    return static_cast<double>(over) / static_cast<double>(taus.size());
  }
};

/// Runs `trials` independent coupled chains (each on its own derived RNG
/// stream) and records the first step at which the chains agree everywhere.
/// Trials are distributed over threads; results are deterministic in `seed`
/// for any thread count.  The coupling is monotone only for ferromagnetic
/// models; `is_ferromagnetic()` should be checked by callers that rely on
/// sandwiching.
inline CoalescenceResult estimate_coalescence(const CouplingModel& m,
                                              const InertiaParameter& in,
                                              std::size_t trials,
                                              long max_steps,
                                              std::uint64_t seed,
                                              unsigned threads = 1) {
  CoalescenceResult result;
  result.taus.assign(trials, -1);
  auto run_range = [&](std::size_t t0, std::size_t stride) {
    Workspace ws_hi, ws_lo;
    for (std::size_t trial = t0; trial < trials; trial += stride) {
      std::uint64_t stream = rng::derive_stream(seed, trial);
      SpinConfiguration hi = all_plus(m.size());
      SpinConfiguration lo = all_minus(m.size());
      for (long t = 1; t <= max_steps; ++t) {
        long diff = coupled_pca_step(m, in, hi, lo, ws_hi, ws_lo, stream,
                                     static_cast<std::uint64_t>(t));
        if (diff == 0) {
          result.taus[trial] = t;
          break;
        }
      }
    }
  };
  if (threads <= 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(run_range, t, threads);
    for (auto& th : pool) th.join();
  }
  for (long t : result.taus) {
    if (t < 0)
      ++result.censored;
    else
      result.max_tau = std::max(result.max_tau, t);
  }
  return result;
}

/// Per-record summary row of a simulation run.
struct ChainRecord {
  std::uint64_t step = 0;
  double magnetization = 0.0;
  double energy = 0.0;
  long flips = 0;  ///< flips in the step that produced this state
};

/// Trajectory summary produced by run_chain.
struct ChainStats {
  std::vector<ChainRecord> records;
  long total_flips = 0;
  std::uint64_t steps = 0;
  double seconds = 0.0;  ///< wall clock; never part of deterministic output
};

/// Runs the parallel chain for `steps` updates from `init`, recording
/// magnetization, energy, and flip counts every `record_every` steps
/// (step 0 records the initial state).  Deterministic in (seed, threads).
template <class PerStep>
ChainStats run_chain_observed(const CouplingModel& m, const InertiaParameter& in,
                              SpinConfiguration init, std::uint64_t steps,
                              std::uint64_t record_every, std::uint64_t seed,
                              unsigned threads, PerStep&& per_step) {
  ChainStats stats;
  stats.steps = steps;
  Workspace ws;
  SpinConfiguration c = std::move(init);
  auto t0 = std::chrono::steady_clock::now();
  auto record = [&](std::uint64_t step, long flips) {
    stats.records.push_back(ChainRecord{step, magnetization(c),
                                        hamiltonian(m, c), flips});
  };
  if (record_every > 0) record(0, 0);
  for (std::uint64_t t = 1; t <= steps; ++t) {
    long flips = pca_step(m, in, c, ws, seed, t, threads);
    stats.total_flips += flips;
    if (record_every > 0 && t % record_every == 0) record(t, flips);
    per_step(t, c, flips);
  }
  auto t1 = std::chrono::steady_clock::now();
  stats.seconds = std::chrono::duration<double>(t1 - t0).count();
  return stats;
}

inline ChainStats run_chain(const CouplingModel& m, const InertiaParameter& in,
                            SpinConfiguration init, std::uint64_t steps,
                            std::uint64_t record_every, std::uint64_t seed,
                            unsigned threads = 1) {
  return run_chain_observed(m, in, std::move(init), steps, record_every, seed,
                            threads,
                            [](std::uint64_t, const SpinConfiguration&, long) {});
}

}  // namespace pcaspin::sampler
