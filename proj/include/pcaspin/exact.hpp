#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcaspin/common.hpp"
#include "pcaspin/model.hpp"

/// Exact small-system computations by enumeration over all 2^n states.
///
/// States are indexed by bitmask (bit i set <=> s_i = +1).  All weights are
/// kept in the log domain and normalized with log-sum-exp.  Three stationary
/// measures appear throughout:
///
///   pi_G     ~ e^{-H(s)}                  (Gibbs),
///   pi_PCA   ~ e^{-H(s)} f(s)             (parallel dynamics, stationary),
///   pi_tilde ~ e^{-H(s)} f(s)^2           (doubled-tilt comparison measure),
///
/// with f(s) = prod_i (1 + delta phi_i(s)).  The closeness of pi_PCA to pi_G
/// is controlled by Delta = pi_G(f^2)/pi_G(f)^2 - 1 through
/// TV(pi_PCA, pi_G) <= sqrt(Delta).
namespace pcaspin::exact {

/// Enumeration over 2^n states is limited to n <= 20.
inline constexpr std::size_t kMaxEnumerationSites = 20;
/// Dense 2^n x 2^n matrices are limited to n <= 12.
inline constexpr std::size_t kMaxMatrixSites = 12;

inline void check_enumeration_cap(std::size_t n) {
  if (n > kMaxEnumerationSites)
    throw resource_cap_error("state enumeration supports at most " +
                             std::to_string(kMaxEnumerationSites) +
                             " sites (got " + std::to_string(n) + ")");
}

inline void check_matrix_cap(std::size_t n) {
  if (n > kMaxMatrixSites)
    throw resource_cap_error("dense transition matrices support at most " +
                             std::to_string(kMaxMatrixSites) +
                             " sites (got " + std::to_string(n) + ")");
}

/// A probability distribution over all 2^n configurations, stored as
/// unnormalized log weights plus their log normalizer.
struct ExactDistribution {
  std::size_t n = 0;
  std::vector<double> log_weight;  ///< index = bitmask
  double log_z = 0.0;

  std::size_t states() const { return log_weight.size(); }
  double log_prob(std::uint64_t state) const {
    return log_weight[state] - log_z;
  }
  double prob(std::uint64_t state) const { return std::exp(log_prob(state)); }

  /// Normalized probabilities as a dense vector.
  std::vector<double> probabilities() const {
    std::vector<double> p(log_weight.size());
    for (std::size_t s = 0; s < log_weight.size(); ++s)
      p[s] = std::exp(log_weight[s] - log_z);
    return p;
  }
};

namespace detail {
template <class LogWeight>
ExactDistribution enumerate(std::size_t n, LogWeight&& lw) {
  check_enumeration_cap(n);
  ExactDistribution d;
  d.n = n;
  d.log_weight.resize(std::size_t{1} << n);
  SpinConfiguration c(n);
  for (std::uint64_t s = 0; s < d.log_weight.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i)
      c.s[i] = (s >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
    d.log_weight[s] = lw(c);
  }
  d.log_z = log_sum_exp(d.log_weight);
  return d;
}
}  // namespace detail

/// pi_G ~ e^{-H}.
inline ExactDistribution enumerate_gibbs(const CouplingModel& m) {
  return detail::enumerate(
      m.size(), [&](const SpinConfiguration& c) { return -hamiltonian(m, c); });
}

/// pi_PCA ~ e^{-H} f.
inline ExactDistribution enumerate_pca(const CouplingModel& m,
                                       const InertiaParameter& in) {
  return detail::enumerate(m.size(), [&](const SpinConfiguration& c) {
    return -hamiltonian(m, c) + log_f_factor(m, in, c);
  });
}

/// pi_tilde ~ e^{-H} f^2.
inline ExactDistribution enumerate_tilde(const CouplingModel& m,
                                         const InertiaParameter& in) {
  return detail::enumerate(m.size(), [&](const SpinConfiguration& c) {
    return -hamiltonian(m, c) + 2.0 * log_f_factor(m, in, c);
  });
}

/// log P(s -> t) of one parallel update, as the sum of per-site log
/// probabilities.  Exact at delta = 0 (frozen chain).
inline double log_pca_transition(const CouplingModel& m,
                                 const InertiaParameter& in,
                                 const SpinConfiguration& s,
                                 const SpinConfiguration& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    // y_i is the logit of P(t_i = -1 | s).
    double y = 2.0 * m.local_field(s, i) + s.s[i] * in.log_delta();
    acc += t.s[i] < 0 ? -softplus(-y) : -softplus(y);
  }
  return acc;
}

/// Dense one-step transition matrix of the parallel dynamics (row-major,
/// dimension 2^n), built by tensoring the per-site update laws.
inline std::vector<double> pca_transition_matrix(const CouplingModel& m,
                                                 const InertiaParameter& in) {
  check_matrix_cap(m.size());
  const std::size_t n = m.size();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> P(dim * dim);
  SpinConfiguration c(n);
  std::vector<double> p_minus(n), row(dim), next(dim);
  for (std::uint64_t s = 0; s < dim; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      c.s[i] = (s >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
    for (std::size_t i = 0; i < n; ++i)
      p_minus[i] =
          sigmoid(2.0 * m.local_field(c, i) + c.s[i] * in.log_delta());
    // Tensor the per-site laws: after processing site i, row[mask] holds the
    // probability of the first i+1 new spins encoded by mask.
    row[0] = 1.0;
    std::size_t filled = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t mask = 0; mask < filled; ++mask) {
        next[mask] = row[mask] * p_minus[i];
        next[mask | filled] = row[mask] * (1.0 - p_minus[i]);
      }
      filled <<= 1;
      std::swap(row, next);
    }
    std::copy(row.begin(), row.end(), P.begin() + s * dim);
  }
  return P;
}

/// Same matrix built from the pair energy: P(s, .) ~ e^{-H(s, .)} normalized
/// by log-sum-exp over the target state.  Serves as an independent
/// cross-check of pca_transition_matrix.
inline std::vector<double> pca_transition_matrix_from_pair_energy(
    const CouplingModel& m, const InertiaParameter& in) {
  check_matrix_cap(m.size());
  const std::size_t n = m.size();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> P(dim * dim);
  SpinConfiguration s(n), t(n);
  std::vector<double> lw(dim);
  for (std::uint64_t a = 0; a < dim; ++a) {
    for (std::size_t i = 0; i < n; ++i)
      s.s[i] = (a >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
    for (std::uint64_t b = 0; b < dim; ++b) {
      for (std::size_t i = 0; i < n; ++i)
        t.s[i] = (b >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
      lw[b] = -pair_hamiltonian(m, in, s, t);
    }
    double lz = log_sum_exp(lw);
    for (std::uint64_t b = 0; b < dim; ++b)
      P[a * dim + b] = std::exp(lw[b] - lz);
  }
  return P;
}

/// Dense transition matrix of the sequential single-site (heat-bath) chain
/// for pi_G: pick a site uniformly, resample it from the exact conditional.
inline std::vector<double> gibbs_transition_matrix(const CouplingModel& m) {
  check_matrix_cap(m.size());
  const std::size_t n = m.size();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> P(dim * dim, 0.0);
  SpinConfiguration c(n);
  for (std::uint64_t s = 0; s < dim; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      c.s[i] = (s >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
    for (std::size_t i = 0; i < n; ++i) {
      // Conditional of pi_G at site i: P(+1) = sigmoid(-4 h_i).
      double p_plus = sigmoid(-4.0 * m.local_field(c, i));
      std::uint64_t flipped = s ^ (std::uint64_t{1} << i);
      bool is_plus = (s >> i & 1u) != 0;
      double stay = is_plus ? p_plus : 1.0 - p_plus;
      P[s * dim + s] += stay / static_cast<double>(n);
      P[s * dim + flipped] += (1.0 - stay) / static_cast<double>(n);
    }
  }
  return P;
}

/// Two-step joint law mu2(s, t) = pi_PCA(s) P(s, t) as a dense matrix
/// (row-major, dimension 2^n); its two marginals equal pi_PCA and it is
/// symmetric because the chain is reversible.
inline std::vector<double> pca_joint_measure(const CouplingModel& m,
                                             const InertiaParameter& in) {
  check_matrix_cap(m.size());
  ExactDistribution pi = enumerate_pca(m, in);
  std::vector<double> P = pca_transition_matrix(m, in);
  const std::size_t dim = pi.states();
  for (std::uint64_t s = 0; s < dim; ++s) {
    double ps = pi.prob(s);
    for (std::uint64_t t = 0; t < dim; ++t) P[s * dim + t] *= ps;
  }
  return P;
}

// ---------------------------------------------------------------------------
// Reflected (quotient) dynamics
// ---------------------------------------------------------------------------

/// True when the bitmask state lies in the canonical half of the state space:
/// positive magnetization, or zero magnetization with spin 0 up.  Every state
/// is in the half or has its global flip there, never both.
inline bool bitmask_in_positive_half(std::uint64_t s, std::size_t n) {
  int k = __builtin_popcountll(s);
  if (2 * k != static_cast<int>(n)) return 2 * k > static_cast<int>(n);
  return (s & 1u) != 0;
}

/// The bitmask states of the canonical half, in increasing order.
inline std::vector<std::uint64_t> positive_half_states(std::size_t n) {
  check_matrix_cap(n);
  std::vector<std::uint64_t> out;
  const std::uint64_t dim = std::uint64_t{1} << n;
  for (std::uint64_t s = 0; s < dim; ++s)
    if (bitmask_in_positive_half(s, n)) out.push_back(s);
  return out;
}

/// A kernel on the canonical half together with its state list.
struct ReflectedKernel {
  std::vector<std::uint64_t> states;  ///< bitmasks of the half, row/col order
  std::vector<double> matrix;         ///< row-major, states.size() squared
};

/// The quotient of the parallel dynamics by the global spin flip, realized on
/// the canonical half: P+(x, y) = P(x, y) + P(x, -y).  Stochastic, and
/// reversible with respect to the stationary law restricted to the half,
/// because both the kernel and the stationary law are flip-symmetric.
inline ReflectedKernel reflected_transition_matrix(const CouplingModel& m,
                                                   const InertiaParameter& in) {
  const std::size_t n = m.size();
  std::vector<double> P = pca_transition_matrix(m, in);
  const std::uint64_t dim = std::uint64_t{1} << n;
  const std::uint64_t all = dim - 1;
  ReflectedKernel r;
  r.states = positive_half_states(n);
  const std::size_t k = r.states.size();
  r.matrix.assign(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      r.matrix[a * k + b] = P[r.states[a] * dim + r.states[b]] +
                            P[r.states[a] * dim + (r.states[b] ^ all)];
  return r;
}

/// A distribution restricted to the given states and renormalized.
inline std::vector<double> restrict_to_states(
    const ExactDistribution& d, const std::vector<std::uint64_t>& states) {
  std::vector<double> out(states.size());
  double z = 0.0;
  for (std::size_t a = 0; a < states.size(); ++a) {
    out[a] = d.prob(states[a]);
    z += out[a];
  }
  if (z <= 0.0)
    throw invalid_argument_error("restrict_to_states: no mass on the states");
  for (double& p : out) p /= z;
  return out;
}

/// Total variation distance (1/2) sum |p - q| between two distributions on
/// the same state space.
inline double tv_distance(const std::vector<double>& p,
                          const std::vector<double>& q) {
  if (p.size() != q.size())
    throw invalid_argument_error("tv_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) acc += std::abs(p[s] - q[s]);
  return 0.5 * acc;
}

inline double tv_distance(const ExactDistribution& p,
                          const ExactDistribution& q) {
  return tv_distance(p.probabilities(), q.probabilities());
}

/// Delta = pi_G(f^2) / pi_G(f)^2 - 1, computed in the log domain by full
/// enumeration.  Nonnegative (Cauchy-Schwarz); vanishes at delta = 0.
inline double delta_ratio(const CouplingModel& m, const InertiaParameter& in) {
  check_enumeration_cap(m.size());
  const std::size_t dim = std::size_t{1} << m.size();
  std::vector<double> lg(dim), l1(dim), l2(dim);
  SpinConfiguration c(m.size());
  for (std::uint64_t s = 0; s < dim; ++s) {
    for (std::size_t i = 0; i < m.size(); ++i)
      c.s[i] = (s >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
    double lw = -hamiltonian(m, c);
    double lf = log_f_factor(m, in, c);
    lg[s] = lw;
    l1[s] = lw + lf;
    l2[s] = lw + 2.0 * lf;
  }
  double a = log_sum_exp(l2) + log_sum_exp(lg) - 2.0 * log_sum_exp(l1);
  return std::expm1(a);
}

/// TV(pi_PCA, pi_G) <= sqrt(Delta).
inline double tv_bound_from_delta_ratio(double delta_ratio_value) {
  return std::sqrt(delta_ratio_value > 0.0 ? delta_ratio_value : 0.0);
}

// ---------------------------------------------------------------------------
// Moments and conditionals
// ---------------------------------------------------------------------------

/// An observable evaluated on a configuration's bitmask encoding.
using Observable = std::function<double(std::uint64_t)>;

inline double expectation(const ExactDistribution& d, const Observable& f) {
  double acc = 0.0;
  for (std::uint64_t s = 0; s < d.states(); ++s) acc += d.prob(s) * f(s);
  return acc;
}

inline double covariance(const ExactDistribution& d, const Observable& f,
                         const Observable& g) {
  double mf = expectation(d, f), mg = expectation(d, g);
  double acc = 0.0;
  for (std::uint64_t s = 0; s < d.states(); ++s)
    acc += d.prob(s) * (f(s) - mf) * (g(s) - mg);
  return acc;
}

inline double variance(const ExactDistribution& d, const Observable& f) {
  return covariance(d, f, f);
}

/// m(s) as an observable on bitmasks.
inline Observable magnetization_observable(std::size_t n) {
  return [n](std::uint64_t s) {
    long sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += (s >> i & 1u) ? 1 : -1;
    return static_cast<double>(sum) / static_cast<double>(n);
  };
}

/// H(s) as an observable on bitmasks.
inline Observable energy_observable(const CouplingModel& m) {
  return [&m](std::uint64_t s) {
    return hamiltonian(m, SpinConfiguration::from_bitmask(s, m.size()));
  };
}

/// P(s_i = +1 | s_j = state_j for all j != i) under d.
inline double conditional_plus(const ExactDistribution& d, std::size_t i,
                               std::uint64_t state) {
  std::uint64_t up = state | (std::uint64_t{1} << i);
  std::uint64_t dn = state & ~(std::uint64_t{1} << i);
  // 1 / (1 + w_dn / w_up), stable via the logit.
  return sigmoid(d.log_weight[up] - d.log_weight[dn]);
}

/// Exact single-site influence matrix of a distribution: gamma_ij is the
/// largest change of the conditional law at site i when only site j changes,
///   gamma_ij = max_s | P(s_i = + | rest) - P(s_i = + | rest, s_j flipped) |.
/// Row sums give the exact Dobrushin interdependence coefficients.
inline std::vector<double> dobrushin_matrix_exact(const ExactDistribution& d) {
  const std::size_t n = d.n;
  std::vector<double> gamma(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double worst = 0.0;
      for (std::uint64_t s = 0; s < d.states(); ++s) {
        if (s >> j & 1u) continue;  // visit each {s, s^j} pair once
        double a = conditional_plus(d, i, s);
        double b = conditional_plus(d, i, s | (std::uint64_t{1} << j));
        worst = std::max(worst, std::abs(a - b));
      }
      gamma[i * n + j] = worst;
    }
  return gamma;
}

// ---------------------------------------------------------------------------
// Derivative identities in delta
// ---------------------------------------------------------------------------

/// Residuals of the exact derivative identities of the log weighted masses
/// A1(delta) = log pi_G(f_delta) and A2(delta) = log pi_G(f_delta^2):
///
///   A1'  = pi_PCA  [S],    A1'' = -pi_PCA  [T] +   Var_pi_PCA  (S),
///   A2'  = 2 pi_tilde[S],  A2'' = -2 pi_tilde[T] + 4 Var_pi_tilde(S),
///
/// where S = sum_i phi_i / (1 + delta phi_i) and T = sum_i of those squared.
/// Derivatives on the left are approximated by central differences with the
/// given step h; residuals shrink as O(h^2).
struct DerivativeCheck {
  double first_tilt = 0.0;    ///< |A1' - pi_PCA[S]|
  double second_tilt = 0.0;   ///< |A1'' - (-pi_PCA[T] + Var(S))|
  double first_doubled = 0.0; ///< |A2' - 2 pi_tilde[S]|
  double second_doubled = 0.0;///< |A2'' - (-2 pi_tilde[T] + 4 Var(S))|
};

namespace detail {
/// phi_i / (1 + delta phi_i), evaluated stably in the log domain.
inline double damped_phi(const CouplingModel& m, const InertiaParameter& in,
                         const SpinConfiguration& c, std::size_t i) {
  double lp = log_phi(m, c, i);
  return std::exp(lp - softplus(in.log_delta() + lp));
}

inline double log_mass(const CouplingModel& m, double delta, double power) {
  InertiaParameter in = InertiaParameter::from_delta(delta);
  const std::size_t dim = std::size_t{1} << m.size();
  std::vector<double> lw(dim);
  SpinConfiguration c(m.size());
  for (std::uint64_t s = 0; s < dim; ++s) {
    for (std::size_t i = 0; i < m.size(); ++i)
      c.s[i] = (s >> i & 1u) ? std::int8_t{1} : std::int8_t{-1};
    lw[s] = -hamiltonian(m, c) + power * log_f_factor(m, in, c);
  }
  return log_sum_exp(lw);
}
}  // namespace detail

inline DerivativeCheck derivative_check(const CouplingModel& m,
                                        const InertiaParameter& in,
                                        double h) {
  check_enumeration_cap(m.size());
  const double d0 = in.delta();
  if (d0 - h <= 0.0 || d0 + h >= 1.0)
    throw invalid_argument_error(
        "derivative_check requires [delta - h, delta + h] inside (0, 1)");
  auto S = [&](std::uint64_t s) {
    SpinConfiguration c = SpinConfiguration::from_bitmask(s, m.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
      acc += detail::damped_phi(m, in, c, i);
    return acc;
  };
  auto T = [&](std::uint64_t s) {
    SpinConfiguration c = SpinConfiguration::from_bitmask(s, m.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      double g = detail::damped_phi(m, in, c, i);
      acc += g * g;
    }
    return acc;
  };
  ExactDistribution pca = enumerate_pca(m, in);
  ExactDistribution tilde = enumerate_tilde(m, in);
  DerivativeCheck r;
  for (double power : {1.0, 2.0}) {
    double lm = detail::log_mass(m, d0 - h, power);
    double l0 = detail::log_mass(m, d0, power);
    double lp = detail::log_mass(m, d0 + h, power);
    double d1 = (lp - lm) / (2.0 * h);
    double d2 = (lp - 2.0 * l0 + lm) / (h * h);
    if (power == 1.0) {
      r.first_tilt = std::abs(d1 - expectation(pca, S));
      r.second_tilt =
          std::abs(d2 - (-expectation(pca, T) + variance(pca, S)));
    } else {
      r.first_doubled = std::abs(d1 - 2.0 * expectation(tilde, S));
      r.second_doubled =
          std::abs(d2 - (-2.0 * expectation(tilde, T) +
                         4.0 * variance(tilde, S)));
    }
  }
  return r;
}

}  // namespace pcaspin::exact
