// End-to-end acceptance gate.  Each numbered check verifies one
// release-blocking behavior of the library against exact oracles, closed
// forms, or frozen reference values, and prints a single PASS/FAIL line with
// the measured quantity and its tolerance.  The process exits nonzero when
// any check fails, so the gate can run under ctest.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pcaspin/bounds.hpp"
#include "pcaspin/curie_weiss.hpp"
#include "pcaspin/exact.hpp"
#include "pcaspin/io.hpp"
#include "pcaspin/model.hpp"
#include "pcaspin/rng.hpp"
#include "pcaspin/sampler.hpp"

using namespace pcaspin;

namespace {

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;  // extra indented lines under the main one
};

// Deterministic random test model: each pair carries an edge with probability
// 0.6, signed weight uniform in [-amp, amp]; at least one edge always.
CouplingModel random_model(std::mt19937_64& g, std::size_t n, double amp) {
  std::uniform_real_distribution<double> w(-amp, amp);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(g) < 0.6)
        edges.push_back(Edge{static_cast<int>(i), static_cast<int>(j), w(g)});
  if (edges.empty()) edges.push_back(Edge{0, 1, w(g)});
  return CouplingModel::from_edges(n, edges);
}

CouplingModel scale_couplings(const CouplingModel& m, double f) {
  std::vector<Edge> es = m.edge_list();
  for (Edge& e : es) e.weight *= f;
  return CouplingModel::from_edges(m.size(), es);
}

// Largest relative detailed-balance residual of a kernel (dense row-major
// over all bitmask states) for the given stationary probabilities.
double balance_residual(const std::vector<double>& pi,
                        const std::vector<double>& P) {
  const std::size_t dim = pi.size();
  double worst = 0.0;
  for (std::size_t s = 0; s < dim; ++s)
    for (std::size_t t = s + 1; t < dim; ++t) {
      double a = pi[s] * P[s * dim + t];
      double b = pi[t] * P[t * dim + s];
      double scale = std::max(std::max(a, b), 1e-300);
      worst = std::max(worst, std::abs(a - b) / scale);
    }
  return worst;
}

// --- 1: at zero flip density the stationary law is the pair-coupling Gibbs
// law exactly (the tilt factor is identically 1). ---------------------------
Outcome check_frozen_identity() {
  std::mt19937_64 g(101);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    std::size_t n = 2 + static_cast<std::size_t>(g() % 9);  // 2..10 sites
    CouplingModel m = random_model(g, n, 0.4);
    double tv = exact::tv_distance(
        exact::enumerate_pca(m, InertiaParameter::from_delta(0.0)),
        exact::enumerate_gibbs(m));
    worst = std::max(worst, tv);
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = fmt("zero flip density: max TV(stationary, gibbs) = %.2e over "
                 "10 random models [tol 1e-12]",
                 worst);
  return o;
}

// --- 2: the parallel kernel is reversible for its stationary law, signed
// couplings included. -------------------------------------------------------
Outcome check_reversibility() {
  std::mt19937_64 g(202);
  const std::size_t sizes[] = {2, 4, 6, 8, 8};
  InertiaParameter in = InertiaParameter::from_delta(0.3);
  double worst = 0.0;
  for (std::size_t n : sizes) {
    CouplingModel m = random_model(g, n, 0.35);
    double r = balance_residual(exact::enumerate_pca(m, in).probabilities(),
                                exact::pca_transition_matrix(m, in));
    worst = std::max(worst, r);
  }
  Outcome o;
  o.pass = worst <= 1e-10;
  o.detail = fmt("detailed balance of the parallel kernel: max relative "
                 "residual = %.2e over 5 random signed models [tol 1e-10]",
                 worst);
  return o;
}

// --- 3: TV(stationary, gibbs) <= sqrt(moment ratio) across a flip-density
// grid, and the ratio scales quadratically near zero. -----------------------
Outcome check_tv_bound_grid() {
  CouplingModel m = lattice_rect(2, 4, 0.1, false);
  const double grid[] = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  double worst_excess = -1e300;
  double ratio[3] = {0, 0, 0};
  int idx = 0;
  for (double d : grid) {
    InertiaParameter in = InertiaParameter::from_delta(d);
    double tv = exact::tv_distance(exact::enumerate_pca(m, in),
                                   exact::enumerate_gibbs(m));
    double dr = exact::delta_ratio(m, in);
    worst_excess = std::max(worst_excess, tv - std::sqrt(dr));
    if (idx < 3) ratio[idx] = dr / (d * d);
    ++idx;
  }
  bool bound_ok = worst_excess <= 1e-12;
  // Boundedness of ratio/d^2 as d -> 0: across the three smallest grid
  // points the normalized ratio must follow one monotone trend toward a
  // finite limit instead of blowing up like 1/d (which would spread the
  // values by the 5x ratio of the densities).
  bool monotone = (ratio[0] <= ratio[1] + 1e-9 && ratio[1] <= ratio[2] + 1e-9) ||
                  (ratio[0] + 1e-9 >= ratio[1] && ratio[1] + 1e-9 >= ratio[2]);
  double mean = (ratio[0] + ratio[1] + ratio[2]) / 3.0;
  double spread = (*std::max_element(ratio, ratio + 3) -
                   *std::min_element(ratio, ratio + 3)) /
                  mean;
  Outcome o;
  o.pass = bound_ok && monotone && spread <= 0.2;
  o.detail = fmt("TV <= sqrt(moment ratio) on 8 grid points (max excess "
                 "%.1e); ratio/delta^2 = %.3f, %.3f, %.3f at the three "
                 "smallest densities (monotone, spread %.1f%% of mean "
                 "[<= 20%%])",
                 worst_excess, ratio[0], ratio[1], ratio[2], 100.0 * spread);
  return o;
}

// --- 4: on growing tori with flip density shrinking like 0.3/|V|^0.6 the
// measured TV to the Gibbs law decreases with size. -------------------------
Outcome check_finite_size_trend() {
  double tv[3];
  int k = 0;
  for (std::size_t L : {2, 3, 4}) {
    double V = static_cast<double>(L * L);
    InertiaParameter in =
        InertiaParameter::from_delta(0.3 / std::pow(V, 0.6));
    CouplingModel m = lattice2d(L, 0.1, true);
    tv[k++] = exact::tv_distance(exact::enumerate_pca(m, in),
                                 exact::enumerate_gibbs(m));
  }
  Outcome o;
  o.pass = tv[0] > tv[1] && tv[1] > tv[2];
  o.detail = fmt("TV decreases across tori of 4, 9, 16 sites at density "
                 "0.3/|V|^0.6: %.4f > %.4f > %.4f",
                 tv[0], tv[1], tv[2]);
  return o;
}

// --- 5: on random uniqueness-region models every shipped bound dominates
// the exact quantity it caps. -----------------------------------------------
Outcome check_bound_soundness() {
  std::mt19937_64 g(505);
  std::uniform_real_distribution<double> ud(0.01, 0.05);
  int viol_influence = 0, viol_cov = 0, viol_var = 0;
  double min_margin_inf = 1e300, min_margin_cov = 1e300, min_margin_var = 1e300;
  for (int k = 0; k < 20; ++k) {
    std::size_t n = 2 + static_cast<std::size_t>(k % 7);  // 2..8 sites
    CouplingModel m = random_model(g, n, 0.3);
    // Keep the strongest row within budget so the uniqueness condition holds,
    // then shrink until even the doubled-tilt comparison measure satisfies it.
    double row = 0.0;
    for (std::size_t i = 0; i < n; ++i) row = std::max(row, m.row_abs_sum(i));
    if (row > 0.4) m = scale_couplings(m, 0.4 / row);
    double d = ud(g);
    InertiaParameter in = InertiaParameter::from_delta(d);
    while (bounds::gamma_sup_analytic(m, in, bounds::Measure::kTilde) >= 1.0)
      m = scale_couplings(m, 0.8);

    exact::ExactDistribution pca = exact::enumerate_pca(m, in);
    exact::ExactDistribution tilde = exact::enumerate_tilde(m, in);

    // (a) influence matrices dominate the exact ones entrywise.
    for (auto meas : {bounds::Measure::kPCA, bounds::Measure::kTilde}) {
      const exact::ExactDistribution& dist =
          meas == bounds::Measure::kPCA ? pca : tilde;
      std::vector<double> ex = exact::dobrushin_matrix_exact(dist);
      bounds::InfluenceBound bd = bounds::pca_gamma_bound(
          m, in, meas, bounds::OscillationMode::kExhaustive);
      for (std::size_t e = 0; e < n * n; ++e) {
        double margin = bd.gamma[e] - ex[e];
        min_margin_inf = std::min(min_margin_inf, margin);
        if (margin < -1e-12) ++viol_influence;
      }
    }

    // (b) the inverse-influence covariance bound dominates every exact
    // covariance of per-site damped flip rates under the stationary law.
    bounds::InfluenceBound gpca = bounds::pca_gamma_bound(
        m, in, bounds::Measure::kPCA, bounds::OscillationMode::kExhaustive);
    std::vector<double> D = bounds::d_matrix(gpca);
    std::vector<exact::Observable> rate(n);
    std::vector<std::vector<double>> rho(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      rate[i] = [&m, &in, i](std::uint64_t s) {
        SpinConfiguration c = SpinConfiguration::from_bitmask(s, m.size());
        double lp = log_phi(m, c, i);
        return std::exp(lp - softplus(in.log_delta() + lp));
      };
      for (std::size_t j = 0; j < n; ++j)
        rho[i][j] = bounds::oscillation_exhaustive(n, rate[i], j);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double cov = exact::covariance(pca, rate[i], rate[j]);
        double cap = bounds::follmer_covariance_bound(D, rho[i], rho[j]);
        double margin = cap - std::abs(cov);
        min_margin_cov = std::min(min_margin_cov, margin);
        if (margin < -1e-12) ++viol_cov;
      }

    // (c) the closed-form normalized variance bound dominates the exact
    // normalized variance of the damped flip-rate sum, both measures and
    // both oscillation modes.
    exact::Observable S = bounds::flip_rate_sum_observable(m, in);
    for (auto meas : {bounds::Measure::kPCA, bounds::Measure::kTilde}) {
      const exact::ExactDistribution& dist =
          meas == bounds::Measure::kPCA ? pca : tilde;
      double nv = exact::variance(dist, S) / static_cast<double>(n);
      for (auto mode : {bounds::OscillationMode::kExhaustive,
                        bounds::OscillationMode::kAnalytic}) {
        bounds::VarianceBound vb = bounds::variance_bound(m, in, meas, mode);
        double margin = vb.value - nv;
        min_margin_var = std::min(min_margin_var, margin);
        if (margin < -1e-12) ++viol_var;
      }
    }
  }
  Outcome o;
  o.pass = viol_influence == 0 && viol_cov == 0 && viol_var == 0;
  o.detail = fmt("20 random uniqueness-region models (2..8 sites): influence "
                 "%d viol (min margin %.1e), covariance %d viol (min margin "
                 "%.1e), variance %d viol (min margin %.1e)",
                 viol_influence, min_margin_inf, viol_cov, min_margin_cov,
                 viol_var, min_margin_var);
  return o;
}

// --- 6: mean-field moment ratio at small flip density: magnitude against a
// linear-order target, and stability in the system size. --------------------
Outcome check_mean_field_ratio() {
  const double J = 0.5, d = 0.01;
  const double target = J * d / 2.0;
  double r200 = cw::delta_ratio_cw(200, J, d, MeanFieldConvention::kHalf);
  double dev = std::abs(r200 - target) / target;
  bool clause1 = dev <= 0.2;

  double r400 = cw::delta_ratio_cw(400, J, d, MeanFieldConvention::kHalf);
  double r1600 = cw::delta_ratio_cw(1600, J, d, MeanFieldConvention::kHalf);
  double change = std::abs(r1600 - r400) / r400;
  bool clause2 = change < 0.10;

  double r2x = cw::delta_ratio_cw(200, J, 2.0 * d, MeanFieldConvention::kHalf);
  double quad_ref =
      d * d * J * J * (2.0 - J) * (2.0 - J) / (2.0 * (1.0 - J) * (1.0 - J));

  Outcome o;
  o.pass = clause1 && clause2;
  o.detail = fmt("mean-field moment ratio (J=0.5, n=200, density 0.01): "
                 "measured %.3e vs linear-order target %.3e, deviation %.1f%% "
                 "[<= 20%%]",
                 r200, target, 100.0 * dev);
  o.notes.push_back(
      fmt("measured ratio is quadratic in the flip density: x%.2f when the "
          "density doubles (%.3e -> %.3e); quadratic-order reference %.3e "
          "agrees",
          r2x / r200, r200, r2x, quad_ref));
  o.notes.push_back(
      "the ratio's first derivative in the flip density vanishes for every "
      "model (numerator and denominator share the same first-order tilt), so "
      "no linear-order target can match; kept as stated and left red");
  o.notes.push_back(
      fmt("size stability at fixed density: |ratio(n=1600) - ratio(n=400)| / "
          "ratio(n=400) = %.2f%% [< 10%%] -- %s",
          100.0 * change, clause2 ? "PASS" : "FAIL"));
  return o;
}

// --- 7: mean-field coupled chains started at maximal disagreement contract
// the disagreement count in one step. ---------------------------------------
Outcome check_one_step_contraction() {
  const std::size_t n = 1000;
  const double J = 0.5, d = 0.05;
  const int trials = 10000;
  InertiaParameter in = InertiaParameter::from_delta(d);
  auto one_step = [&](MeanFieldConvention conv) {
    CouplingModel m = curie_weiss_model(n, J, conv);
    sampler::Workspace wh, wl;
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::uint64_t stream = rng::derive_stream(7001, static_cast<std::uint64_t>(t));
      SpinConfiguration hi = sampler::all_plus(n);
      SpinConfiguration lo = sampler::all_minus(n);
      acc += static_cast<double>(
          sampler::coupled_pca_step(m, in, hi, lo, wh, wl, stream, 1));
    }
    return acc / (static_cast<double>(trials) * static_cast<double>(n));
  };
  double factor_half = one_step(MeanFieldConvention::kHalf);
  double factor_full = one_step(MeanFieldConvention::kFull);
  double limit = cw::contraction_factor(J, d) + 0.01;
  Outcome o;
  o.pass = factor_half <= limit;
  o.detail = fmt("one-step disagreement factor %.4f <= %.4f over 10^4 trials "
                 "(J/(2n) normalization; the J/n normalization sits at its "
                 "critical coupling and measures %.4f)",
                 factor_half, limit, factor_full);
  return o;
}

// --- 8: coalescence of the coupled chains happens on the predicted time
// scale and its tail sits under the per-step contraction bound. -------------
Outcome check_coalescence_order() {
  const std::size_t n = 1000;
  const double J = 0.5, d = 0.05;
  const std::size_t trials = 4000;
  CouplingModel m = curie_weiss_model(n, J, MeanFieldConvention::kHalf);
  InertiaParameter in = InertiaParameter::from_delta(d);
  sampler::CoalescenceResult res =
      sampler::estimate_coalescence(m, in, trials, 2000, 8001, 1);
  double median = res.quantile(0.5);
  double pred = cw::mixing_time_prediction(n, J, d);
  bool order_ok =
      res.censored == 0 && median >= pred / 3.0 && median <= pred * 3.0;
  int tail_viol = 0;
  double max_raw = 0.0;
  for (long t = 1; t <= res.max_tau; ++t) {
    double S = res.survival(t);
    double B = cw::disagreement_tail_bound(n, J, d, t);
    double env =
        B + 3.0 * std::sqrt(B * (1.0 - B) / static_cast<double>(trials));
    if (S > env + 1e-12) ++tail_viol;
    if (B > 0.0 && B < 1.0) max_raw = std::max(max_raw, S / B);
  }
  Outcome o;
  o.pass = order_ok && tail_viol == 0;
  o.detail = fmt("median coalescence %.0f vs predicted %.1f (ratio %.2f, "
                 "within x3, %ld censored); survival under the "
                 "2n*factor^t bound plus a 3-standard-error envelope at all "
                 "steps (0 violations; raw max S/B = %.2f)",
                 median, pred, median / pred, res.censored, max_raw);
  return o;
}

// --- 9: with no couplings every site flips independently with probability
// delta/(1+delta) per step. -------------------------------------------------
Outcome check_free_flip_rate() {
  const std::size_t n = 10000;
  const std::uint64_t steps = 100000;
  const double d = 0.1;
  CouplingModel m = CouplingModel::from_edges(n, {});
  InertiaParameter in = InertiaParameter::from_delta(d);
  SpinConfiguration c = sampler::random_configuration(n, 9001);
  sampler::Workspace ws;
  long flips = 0;
  for (std::uint64_t t = 1; t <= steps; ++t)
    flips += sampler::pca_step(m, in, c, ws, 9001, t);
  double N = static_cast<double>(n) * static_cast<double>(steps);
  double rate = static_cast<double>(flips) / N;
  double p = d / (1.0 + d);
  double se = std::sqrt(p * (1.0 - p) / N);
  Outcome o;
  o.pass = std::abs(rate - p) <= 3.0 * se;
  o.detail = fmt("free-spin flip rate %.7f vs delta/(1+delta) = %.7f over "
                 "10^9 site updates (|z| = %.2f <= 3)",
                 rate, p, std::abs(rate - p) / se);
  return o;
}

// --- 10: long-run samplers land on the enumerated laws. --------------------
Outcome check_sampler_against_enumeration() {
  CouplingModel m = lattice_rect(2, 2, 0.1, false);
  InertiaParameter in = InertiaParameter::from_delta(0.2);
  const std::uint64_t burn = 1000, samples = 10000000;

  exact::ExactDistribution pca = exact::enumerate_pca(m, in);
  std::array<long, 16> cnt{};
  SpinConfiguration c = sampler::random_configuration(4, 1001);
  sampler::Workspace ws;
  for (std::uint64_t t = 1; t <= burn + samples; ++t) {
    sampler::pca_step(m, in, c, ws, 1001, t);
    if (t > burn) ++cnt[c.to_bitmask()];
  }
  double tv_pca = 0.0;
  for (std::uint64_t s = 0; s < 16; ++s)
    tv_pca += std::abs(static_cast<double>(cnt[s]) /
                           static_cast<double>(samples) -
                       pca.prob(s));
  tv_pca *= 0.5;

  exact::ExactDistribution gibbs = exact::enumerate_gibbs(m);
  std::array<long, 16> cnt2{};
  c = sampler::random_configuration(4, 1002);
  for (std::uint64_t u = 1; u <= burn + samples; ++u) {
    sampler::gibbs_step(m, c, 1002, u);
    if (u > burn) ++cnt2[c.to_bitmask()];
  }
  double tv_gibbs = 0.0;
  for (std::uint64_t s = 0; s < 16; ++s)
    tv_gibbs += std::abs(static_cast<double>(cnt2[s]) /
                             static_cast<double>(samples) -
                         gibbs.prob(s));
  tv_gibbs *= 0.5;

  Outcome o;
  o.pass = tv_pca <= 0.005 && tv_gibbs <= 0.005;
  o.detail = fmt("empirical law over 10^7 updates: parallel TV %.5f, "
                 "single-site TV %.5f [both <= 0.005]",
                 tv_pca, tv_gibbs);
  return o;
}

// --- 11: the global-flip quotient chain is a stochastic kernel on the
// canonical half and reversible for the restricted stationary law. ----------
Outcome check_reflected_balance() {
  struct Case {
    CouplingModel m;
    double delta;
  };
  std::vector<Case> cases;
  cases.push_back({CouplingModel::from_edges(5, {{0, 1, 0.25},
                                                 {1, 2, -0.15},
                                                 {2, 3, 0.2},
                                                 {3, 4, -0.3},
                                                 {0, 4, 0.1},
                                                 {1, 3, 0.05}}),
                   0.3});
  cases.push_back(
      {curie_weiss_model(6, 1.4, MeanFieldConvention::kHalf), 0.25});
  double worst_row = 0.0, worst_balance = 0.0;
  for (const Case& cs : cases) {
    InertiaParameter in = InertiaParameter::from_delta(cs.delta);
    exact::ReflectedKernel r = exact::reflected_transition_matrix(cs.m, in);
    std::vector<double> pi =
        exact::restrict_to_states(exact::enumerate_pca(cs.m, in), r.states);
    const std::size_t k = r.states.size();
    for (std::size_t a = 0; a < k; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < k; ++b) row += r.matrix[a * k + b];
      worst_row = std::max(worst_row, std::abs(row - 1.0));
    }
    worst_balance = std::max(worst_balance, balance_residual(pi, r.matrix));
  }
  Outcome o;
  o.pass = worst_row <= 1e-12 && worst_balance <= 1e-10;
  o.detail = fmt("quotient kernel on 5- and 6-site models: max |row sum - 1| "
                 "= %.1e, max relative balance residual = %.1e [tol 1e-10]",
                 worst_row, worst_balance);
  return o;
}

// --- 12: one seed gives one artifact: trajectories and rendered CSVs are
// byte-identical at every thread count. -------------------------------------
Outcome check_thread_determinism() {
  const std::size_t L = 1000;
  const std::uint64_t seed = 4242, steps = 100, record_every = 10;
  CouplingModel m = lattice2d(L, 0.1, true);
  InertiaParameter in = InertiaParameter::from_delta(0.1);

  unsigned hc = std::thread::hardware_concurrency();
  std::vector<unsigned> tset = {1, 2, std::max(2u, hc)};
  tset.erase(std::unique(tset.begin(), tset.end()), tset.end());

  std::vector<std::string> csvs;
  std::vector<SpinConfiguration> finals;
  for (unsigned th : tset) {
    SpinConfiguration last;
    sampler::ChainStats st = sampler::run_chain_observed(
        m, in, sampler::random_configuration(m.size(), seed), steps,
        record_every, seed, th,
        [&](std::uint64_t t, const SpinConfiguration& cc, long) {
          if (t == steps) last = cc;
        });
    io::CsvDocument doc("sample");
    doc.set_meta("model", std::string("lattice2d"));
    doc.set_meta("L", std::uint64_t{L});
    doc.set_meta("J0", 0.1);
    doc.set_meta("periodic", std::string("1"));
    doc.set_meta("delta", 0.1);
    doc.set_meta("seed", seed);
    doc.set_meta("steps", steps);
    doc.set_meta("record_every", record_every);
    doc.set_meta("init", std::string("random"));
    doc.set_columns({"step", "magnetization", "energy", "flips"});
    for (const sampler::ChainRecord& rec : st.records)
      doc.add_row({std::to_string(rec.step),
                   io::format_double(rec.magnetization),
                   io::format_double(rec.energy), std::to_string(rec.flips)});
    std::ostringstream ss;
    doc.write(ss);
    csvs.push_back(ss.str());
    finals.push_back(std::move(last));
  }
  bool same = true;
  for (std::size_t i = 1; i < csvs.size(); ++i)
    same = same && csvs[i] == csvs[0] && finals[i] == finals[0];
  std::string tdesc;
  for (unsigned th : tset) tdesc += (tdesc.empty() ? "" : ",") + std::to_string(th);
  Outcome o;
  o.pass = same && csvs.size() >= 2;
  o.detail = fmt("10^6-site torus, 100 steps: CSV (%zu bytes, %zu rows) and "
                 "final configuration byte-identical across threads {%s}",
                 csvs[0].size(), std::size_t{steps / record_every + 1},
                 tdesc.c_str());
  return o;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, check_frozen_identity},       {2, check_reversibility},
      {3, check_tv_bound_grid},         {4, check_finite_size_trend},
      {5, check_bound_soundness},       {6, check_mean_field_ratio},
      {7, check_one_step_contraction},  {8, check_coalescence_order},
      {9, check_free_flip_rate},        {10, check_sampler_against_enumeration},
      {11, check_reflected_balance},    {12, check_thread_determinism},
  };
  std::printf("pcaspin acceptance gate\n");
  int failures = 0;
  for (const Entry& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = fmt("unexpected exception: %s", ex.what());
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::printf("[%2d] %s (%6.2f s) %s\n", e.id, o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    for (const std::string& note : o.notes)
      std::printf("       - %s\n", note.c_str());
    if (!o.pass) ++failures;
  }
  std::printf("%d/12 checks passed%s\n", 12 - failures,
              failures ? fmt(", %d failed", failures).c_str() : "");
  return failures == 0 ? 0 : 1;
}
