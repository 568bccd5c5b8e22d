#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pcaspin/common.hpp"
#include "pcaspin/exact.hpp"
#include "pcaspin/model.hpp"

/// Dobrushin-type uniqueness machinery and the correlation bounds built on
/// top of it.
///
/// An influence matrix gamma_ij bounds how much the single-site conditional
/// law at i can move when only the spin at j changes.  When the largest row
/// sum is below 1, the measure has a unique Gibbs structure, correlations
/// decay, and D = (I - Gamma)^{-1} turns site-level oscillations of two
/// observables into a covariance bound.
///
/// For the stationary measures of the parallel dynamics the conditionals
/// carry, on top of the Gibbs part, a tilt psi_i coming from the factor
/// f = prod(1 + delta phi); its oscillations enter the influence bound with
/// weight 1/2 for the stationary measure (tilt f) and weight 1 for the
/// comparison measure (tilt f^2).
namespace pcaspin::bounds {

/// Which tilted measure an influence bound refers to.
enum class Measure { kPCA, kTilde };

/// How oscillations sup_s |g(s) - g(s^j)| are computed: exhaustively over all
/// 2^n states, or by closed-form upper caps valid at any system size.
enum class OscillationMode { kExhaustive, kAnalytic };

inline const char* to_string(Measure m) {
  return m == Measure::kPCA ? "pca" : "tilde";
}
inline const char* to_string(OscillationMode m) {
  return m == OscillationMode::kExhaustive ? "exhaustive" : "analytic";
}

/// An influence matrix with its Dobrushin summary.
struct InfluenceBound {
  std::size_t n = 0;
  std::vector<double> gamma;  ///< n x n, row-major; gamma[i*n+j] bounds influence of j on i
  double gamma_sup = 0.0;     ///< max_i sum_j gamma_ij
  bool satisfied = false;     ///< gamma_sup < 1
  OscillationMode mode = OscillationMode::kExhaustive;

  double row_sum(std::size_t i) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += gamma[i * n + j];
    return acc;
  }

  void finalize() {
    gamma_sup = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      gamma_sup = std::max(gamma_sup, row_sum(i));
    satisfied = gamma_sup < 1.0;
  }
};

/// Largest system size for which influence matrices are materialized
/// densely; shared with d_matrix.  Row-sum summaries (gamma_sup_analytic)
/// have no such limit.
inline constexpr std::size_t kMaxInfluenceSites = 4096;

inline void check_influence_cap(std::size_t n) {
  if (n > kMaxInfluenceSites)
    throw resource_cap_error("influence matrices support at most " +
                             std::to_string(kMaxInfluenceSites) +
                             " sites (got " + std::to_string(n) + ")");
}

/// The classical high-temperature influence matrix of pi_G for pair
/// couplings: gamma_ij = tanh(2 |J_ij|).
inline InfluenceBound dobrushin_condition(const CouplingModel& m) {
  check_influence_cap(m.size());
  InfluenceBound b;
  b.n = m.size();
  b.gamma.assign(b.n * b.n, 0.0);
  if (m.kind() == CouplingModel::Kind::kComplete) {
    double g = std::tanh(2.0 * std::abs(m.constant()));
    for (std::size_t i = 0; i < b.n; ++i)
      for (std::size_t j = 0; j < b.n; ++j)
        if (i != j) b.gamma[i * b.n + j] = g;
  } else {
    for (const Edge& e : m.edge_list()) {
      double g = std::tanh(2.0 * std::abs(e.weight));
      b.gamma[static_cast<std::size_t>(e.i) * b.n +
              static_cast<std::size_t>(e.j)] = g;
      b.gamma[static_cast<std::size_t>(e.j) * b.n +
              static_cast<std::size_t>(e.i)] = g;
    }
  }
  b.finalize();
  return b;
}

/// The conditional tilt of the stationary measure of the parallel dynamics:
/// with K_i = -2 h_i(s) + psi_i(s),
///
///   pi_PCA(s_i = +1 | s_{-i}) = e^{K_i} / (2 cosh K_i),
///
/// and psi_i collects the dependence of log f on s_i:
///
///   psi_i(s) = (1/2) log[(1 + delta e^{ 2 h_i}) / (1 + delta e^{-2 h_i})]
///            + (1/2) sum_{l != i} log[(1 + delta e^{-2 J_il s_l + 2 s_l h_{l,i}})
///                                   / (1 + delta e^{ 2 J_il s_l + 2 s_l h_{l,i}})],
///
/// where h_{l,i}(s) = -sum_{j != i} J_lj s_j is the field at l with site i
/// removed.  Only l coupled to i contribute.  psi_i does not depend on s_i,
/// is O(delta) uniformly, and vanishes at delta = 0 (where pi_PCA = pi_G).
/// For the comparison measure (tilt f^2) the conditional carries 2 psi_i.
inline double psi(const CouplingModel& m, const InertiaParameter& in,
                  const SpinConfiguration& c, std::size_t i) {
  const double ld = in.log_delta();
  double h_i = m.local_field(c, i);
  double acc = 0.5 * (softplus(ld + 2.0 * h_i) - softplus(ld - 2.0 * h_i));
  auto term = [&](std::size_t l, double J_il) {
    double h_li = m.local_field(c, l) + m.coupling(l, i) * c.s[i];
    double base = 2.0 * c.s[l] * h_li;
    double a = -2.0 * J_il * c.s[l] + base;
    double b = 2.0 * J_il * c.s[l] + base;
    return 0.5 * (softplus(ld + a) - softplus(ld + b));
  };
  if (m.kind() == CouplingModel::Kind::kComplete) {
    for (std::size_t l = 0; l < m.size(); ++l)
      if (l != i) acc += term(l, m.constant());
  } else {
    for (std::size_t k = m.neighbor_begin(i); k < m.neighbor_end(i); ++k)
      acc += term(static_cast<std::size_t>(m.neighbor_site(k)),
                  m.neighbor_weight(k));
  }
  return acc;
}

/// sup_s |f(s) - f(s^j)| by enumeration over all 2^n states.
inline double oscillation_exhaustive(std::size_t n, const exact::Observable& f,
                                     std::size_t j) {
  exact::check_enumeration_cap(n);
  const std::uint64_t dim = std::uint64_t{1} << n;
  const std::uint64_t bit = std::uint64_t{1} << j;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < dim; ++s) {
    if (s & bit) continue;
    double d = std::abs(f(s) - f(s | bit));
    worst = std::max(worst, d);
  }
  return worst;
}

/// Closed-form cap on sup_s |phi_i(s) - phi_i(s^h)|, exact when J_ih is the
/// only coupling of site i:  e^{2 J_i} (1 - e^{-4 |J_ih|}) with
/// J_i = sum_j |J_ij|.  Flipping site i itself negates phi_i's exponent, so
/// the h = i oscillation is 2 sinh(2 J_i) = e^{2 J_i} (1 - e^{-4 J_i}).
inline double phi_oscillation_analytic(const CouplingModel& m, std::size_t i,
                                       std::size_t h) {
  double Jih = i == h ? m.row_abs_sum(i) : std::abs(m.coupling(i, h));
  if (Jih == 0.0) return 0.0;
  return std::exp(2.0 * m.row_abs_sum(i)) * (-std::expm1(-4.0 * Jih));
}

/// Closed-form cap on the oscillation of the damped flip rate
/// g_i = phi_i / (1 + delta phi_i); x -> x/(1+delta x) is increasing with
/// derivative <= 1/(1 + delta e^{-2 J_i})^2 on the range of phi_i.
inline double flip_rate_oscillation_analytic(const CouplingModel& m,
                                             const InertiaParameter& in,
                                             std::size_t i, std::size_t h) {
  double lip = 1.0 + in.delta() * std::exp(-2.0 * m.row_abs_sum(i));
  return phi_oscillation_analytic(m, i, h) / (lip * lip);
}

namespace detail {
/// Closed-form cap on rho_j(psi_i), assembled term by term from the Lipschitz
/// constant of x -> log(1 + delta e^x) on each term's argument range.
inline double psi_oscillation_cap(const CouplingModel& m,
                                  const InertiaParameter& in, std::size_t i,
                                  std::size_t j) {
  if (i == j) return 0.0;
  const double delta = in.delta();
  auto ds = [delta](double range) { return delta * std::exp(range); };
  double acc = 0.0;
  double Jij = std::abs(m.coupling(i, j));
  // First term: h_i moves by at most 2 |J_ij| in each argument.
  if (Jij != 0.0) acc += 4.0 * Jij * ds(2.0 * m.row_abs_sum(i));
  // l = j term of the sum: bounded by twice its maximal magnitude
  // 2 delta |J_ij| e^{2 J_j}.
  if (Jij != 0.0) acc += 4.0 * Jij * ds(2.0 * m.row_abs_sum(j));
  // l != j terms: h_{l,i} moves by at most 2 |J_lj|.
  if (m.kind() == CouplingModel::Kind::kComplete) {
    double c = std::abs(m.constant());
    if (c != 0.0 && m.size() > 2)
      acc += static_cast<double>(m.size() - 2) * 4.0 * c *
             ds(2.0 * m.row_abs_sum(0));
  } else {
    for (std::size_t k = m.neighbor_begin(i); k < m.neighbor_end(i); ++k) {
      std::size_t l = static_cast<std::size_t>(m.neighbor_site(k));
      if (l == j) continue;
      double Jlj = std::abs(m.coupling(l, j));
      if (Jlj != 0.0) acc += 4.0 * Jlj * ds(2.0 * m.row_abs_sum(l));
    }
  }
  return acc;
}
}  // namespace detail

/// Largest row sum of the analytic influence bound, computed in O(edges)
/// without materializing the matrix (the closed-form caps only involve a
/// site, its neighbours, and their row norms, so each row sum collapses to
///
///   sum_j tanh(2 |J_ij|)
///   + c [ 4 ds(2 J_i) J_i + 4 sum_{l ~ i} |J_il| ds(2 J_l)
///         + 4 sum_{l ~ i} ds(2 J_l) (J_l - |J_li|) ],
///
/// with J_x the row norm at x and ds(r) = delta e^r).  Agrees with
/// pca_gamma_bound(..., kAnalytic).gamma_sup and scales to any system size.
inline double gamma_sup_analytic(const CouplingModel& m,
                                 const InertiaParameter& in, Measure measure) {
  const double cfac = measure == Measure::kPCA ? 0.5 : 1.0;
  const double delta = in.delta();
  auto ds = [delta](double range) { return delta * std::exp(range); };
  const std::size_t n = m.size();
  if (m.kind() == CouplingModel::Kind::kComplete) {
    if (n < 2) return 0.0;
    double c = std::abs(m.constant());
    double row = m.row_abs_sum(0);
    double per_entry = 4.0 * c * ds(2.0 * row) * static_cast<double>(n);
    return static_cast<double>(n - 1) *
           (std::tanh(2.0 * c) + cfac * per_entry);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double base = 0.0;
    double cap = 4.0 * ds(2.0 * m.row_abs_sum(i)) * m.row_abs_sum(i);
    for (std::size_t k = m.neighbor_begin(i); k < m.neighbor_end(i); ++k) {
      std::size_t l = static_cast<std::size_t>(m.neighbor_site(k));
      double Jil = std::abs(m.neighbor_weight(k));
      base += std::tanh(2.0 * Jil);
      double dl = ds(2.0 * m.row_abs_sum(l));
      cap += 4.0 * Jil * dl + 4.0 * dl * (m.row_abs_sum(l) - Jil);
    }
    worst = std::max(worst, base + cfac * cap);
  }
  return worst;
}

/// Influence bound for the tilted measures of the parallel dynamics:
///
///   gamma_ij <= tanh(2 |J_ij|) + c * rho_j(psi_i),
///
/// with c = 1/2 for the stationary measure and c = 1 for the doubled-tilt
/// comparison measure.  rho_j(psi_i) is computed exhaustively (small n) or by
/// closed-form caps; both modes materialize the n x n matrix, so they are
/// capped at matrix scale -- use gamma_sup_analytic for large systems.
inline InfluenceBound pca_gamma_bound(const CouplingModel& m,
                                      const InertiaParameter& in,
                                      Measure measure,
                                      OscillationMode mode) {
  InfluenceBound b = dobrushin_condition(m);
  b.mode = mode;
  const double c = measure == Measure::kPCA ? 0.5 : 1.0;
  const std::size_t n = m.size();
  if (mode == OscillationMode::kExhaustive) {
    exact::check_enumeration_cap(n);
    for (std::size_t i = 0; i < n; ++i) {
      exact::Observable psi_i = [&, i](std::uint64_t s) {
        return psi(m, in, SpinConfiguration::from_bitmask(s, n), i);
      };
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        b.gamma[i * n + j] += c * oscillation_exhaustive(n, psi_i, j);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        b.gamma[i * n + j] += c * detail::psi_oscillation_cap(m, in, i, j);
      }
  }
  b.finalize();
  return b;
}

/// D = (I - Gamma)^{-1} by Gauss-Jordan elimination.  Requires the Dobrushin
/// condition (gamma_sup < 1), which makes the Neumann series converge and D
/// entrywise nonnegative.
inline std::vector<double> d_matrix(const InfluenceBound& b) {
  if (!b.satisfied)
    throw invalid_argument_error(
        "d_matrix requires the Dobrushin condition (largest row sum < 1)");
  const std::size_t n = b.n;
  check_influence_cap(n);
  std::vector<double> a(n * 2 * n, 0.0);  // [I - Gamma | I]
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a[i * 2 * n + j] = (i == j ? 1.0 : 0.0) - b.gamma[i * n + j];
    a[i * 2 * n + n + i] = 1.0;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * 2 * n + col]) > std::abs(a[piv * 2 * n + col]))
        piv = r;
    if (a[piv * 2 * n + col] == 0.0)
      throw invalid_argument_error("d_matrix: singular system");
    if (piv != col)
      for (std::size_t k = 0; k < 2 * n; ++k)
        std::swap(a[piv * 2 * n + k], a[col * 2 * n + k]);
    double inv = 1.0 / a[col * 2 * n + col];
    for (std::size_t k = 0; k < 2 * n; ++k) a[col * 2 * n + k] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double factor = a[r * 2 * n + col];
      if (factor == 0.0) continue;
      for (std::size_t k = 0; k < 2 * n; ++k)
        a[r * 2 * n + k] -= factor * a[col * 2 * n + k];
    }
  }
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = a[i * 2 * n + n + j];
  return d;
}

/// Covariance bound under a measure whose influence matrix is dominated by
/// Gamma: |Cov(f, g)| <= (1/4) sum_{ij} rho_i(f) D_ij rho_j(g).
inline double follmer_covariance_bound(const std::vector<double>& d,
                                       const std::vector<double>& rho_f,
                                       const std::vector<double>& rho_g) {
  const std::size_t n = rho_f.size();
  if (rho_g.size() != n || d.size() != n * n)
    throw invalid_argument_error("follmer_covariance_bound: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rho_f[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += d[i * n + j] * rho_g[j];
    acc += rho_f[i] * row;
  }
  return 0.25 * acc;
}

/// The observable S(s) = sum_i phi_i / (1 + delta phi_i) (sum of damped flip
/// rates), whose normalized variance the closed-form bound controls.
inline exact::Observable flip_rate_sum_observable(const CouplingModel& m,
                                                  const InertiaParameter& in) {
  return [&m, &in](std::uint64_t state) {
    SpinConfiguration c = SpinConfiguration::from_bitmask(state, m.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      double lp = log_phi(m, c, i);
      acc += std::exp(lp - softplus(in.log_delta() + lp));
    }
    return acc;
  };
}

/// Closed-form bound on the normalized variance of the damped flip-rate sum.
struct VarianceBound {
  double value = 0.0;      ///< bounds Var(S)/n under the tilted measure
  double gamma_sup = 0.0;  ///< Dobrushin coefficient used
  Measure measure = Measure::kPCA;
  OscillationMode mode = OscillationMode::kExhaustive;
  bool satisfied = false;  ///< false => the bound is vacuous (+infinity)
};

/// Var(S)/n <= 16 J^2 e^{4J} / (1 - gamma) with J the coupling sup-norm and
/// gamma the influence bound of the requested tilted measure.  Derivation:
/// every per-site oscillation of S is at most 8 J e^{2J} (flipping site j
/// moves each phi_i by at most e^{2 J_i}(1 - e^{-4 |J_ij|}) <= 4 |J_ij|
/// e^{2J}, summing to 4 J e^{2J} over i != j, plus the same cap for phi_j's
/// own sign flip; the damping x -> x/(1 + delta x) only shrinks it), and the
/// inverse-influence covariance bound then gives
/// Var(S) <= (1/4) (8 J e^{2J})^2 n / (1 - gamma).  Analytic mode only needs
/// the row-sum summary, so it never materializes the matrix and works at any
/// system size.
inline VarianceBound variance_bound(const CouplingModel& m,
                                    const InertiaParameter& in,
                                    Measure measure, OscillationMode mode) {
  VarianceBound v;
  v.measure = measure;
  v.mode = mode;
  if (mode == OscillationMode::kAnalytic) {
    v.gamma_sup = gamma_sup_analytic(m, in, measure);
    v.satisfied = v.gamma_sup < 1.0;
  } else {
    InfluenceBound g = pca_gamma_bound(m, in, measure, mode);
    v.gamma_sup = g.gamma_sup;
    v.satisfied = g.satisfied;
  }
  double J = m.sup_norm();
  v.value = v.satisfied
                ? 16.0 * J * J * std::exp(4.0 * J) / (1.0 - v.gamma_sup)
                : kInf;
  return v;
}

/// Upper bound on TV(pi_PCA, pi_G).
struct TvBound {
  double value = 0.0;
  double delta_ratio = 0.0;  ///< Delta actually used (exact or its cap)
  OscillationMode mode = OscillationMode::kExhaustive;
};

/// mode = kExhaustive: sqrt(Delta) with Delta computed by enumeration
/// (n <= 20).  mode = kAnalytic: a closed-form cap valid at any size,
///
///   Delta <= exp(delta^2 n (e^{4J} + 2 vb)) - 1,
///
/// where vb is the closed-form variance bound for the doubled-tilt measure
/// (analytic oscillations, so the cap is monotone in delta); it follows by
/// integrating the second derivative of log[pi_G(f^2)/pi_G(f)^2] twice, both
/// first-order terms cancelling at delta = 0.  Infinite when the Dobrushin
/// condition fails.
inline TvBound tv_upper_bound(const CouplingModel& m, const InertiaParameter& in,
                              OscillationMode mode) {
  TvBound t;
  t.mode = mode;
  if (mode == OscillationMode::kExhaustive) {
    t.delta_ratio = exact::delta_ratio(m, in);
  } else {
    VarianceBound vb =
        variance_bound(m, in, Measure::kTilde, OscillationMode::kAnalytic);
    if (!vb.satisfied) {
      t.delta_ratio = kInf;
      t.value = kInf;
      return t;
    }
    double J = m.sup_norm();
    double d = in.delta();
    t.delta_ratio = std::expm1(
        d * d * static_cast<double>(m.size()) *
        (std::exp(4.0 * J) + 2.0 * vb.value));
  }
  t.value = std::sqrt(std::max(t.delta_ratio, 0.0));
  return t;
}

}  // namespace pcaspin::bounds
