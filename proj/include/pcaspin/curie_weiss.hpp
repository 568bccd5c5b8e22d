#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pcaspin/common.hpp"
#include "pcaspin/model.hpp"

/// Mean-field (complete-graph) analysis.
///
/// On the complete graph the magnetization m = (1/n) sum_i s_i is a
/// sufficient statistic: every exact law over configurations collapses to a
/// law over the n+1 magnetization levels m_k = 2k/n - 1, computed here with
/// binomial sums -- O(n) instead of 2^n, exact to rounding.
///
/// Two normalization conventions are supported (MeanFieldConvention):
/// J_ij = J/(2n) ("half", critical at J = 1, per-site field ~ (J/2) m) and
/// J_ij = J/n ("full", critical at J = 1/2, per-site field ~ J m).  The
/// closed-form contraction and mixing predictions below are stated in the
/// half convention, where 1 - J is the spectral gap factor of the
/// linearized dynamics.
namespace pcaspin::cw {

/// Binary entropy I(x) = -x log x - (1-x) log(1-x) on [0, 1].
inline double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

/// Effective linear-response slope a(J): artanh(m*) = a J m* at stationarity.
/// a = 1 for the half convention, 2 for the full convention.
inline double effective_slope(double J, MeanFieldConvention conv) {
  return conv == MeanFieldConvention::kHalf ? J : 2.0 * J;
}

/// Large-n free-energy density of the mean-field Gibbs law:
/// F(m) = (aJ/2) m^2 + I((1+m)/2), with a the convention slope.
/// F''(0) = aJ - 1: a unique maximum at m = 0 up to the critical coupling,
/// two symmetric maxima +/- m* beyond it.
inline double free_energy_density(double m, double J,
                                  MeanFieldConvention conv) {
  double a = effective_slope(J, conv);
  return 0.5 * a * m * m + binary_entropy(0.5 * (1.0 + m));
}

/// The positive spontaneous magnetization: the largest root of
/// artanh(m) = aJ m; zero at or below the critical coupling aJ = 1.
inline double spontaneous_magnetization(double J, MeanFieldConvention conv) {
  double a = effective_slope(J, conv);
  if (a <= 1.0) return 0.0;
  double lo = 0.0, hi = 1.0 - 1e-15;
  // artanh(m) - aJ m is negative on (0, m*) and positive after it.
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (std::atanh(mid) - a * mid < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Large-n density of the log tilt (1/n) log f along magnetization m:
/// g(m) = ((1+m)/2) log(1 + delta e^{-km}) + ((1-m)/2) log(1 + delta e^{km}),
/// where k is the per-site field scale (k = J half convention, 2J full).
/// Even in m; g(0) = log(1 + delta); g = O(delta) uniformly.
inline double tilt_density(double m, double J, double delta,
                           MeanFieldConvention conv) {
  if (delta <= 0.0) return 0.0;
  double k = (conv == MeanFieldConvention::kHalf ? J : 2.0 * J);
  double ld = std::log(delta);
  double up = softplus(ld - k * m);  // log(1 + delta e^{-km})
  double dn = softplus(ld + k * m);  // log(1 + delta e^{+km})
  return 0.5 * (1.0 + m) * up + 0.5 * (1.0 - m) * dn;
}

/// The stationary-measure magnetization peak: argmax of F + g over [0, 1).
/// Reduces to m* at delta = 0 and moves by O(delta).
inline double tilted_peak(double J, double delta, MeanFieldConvention conv) {
  auto objective = [&](double m) {
    return free_energy_density(m, J, conv) + tilt_density(m, J, delta, conv);
  };
  // Coarse scan, then golden-section refinement around the best cell.
  const int cells = 4000;
  double best_m = 0.0, best_v = objective(0.0);
  for (int i = 1; i <= cells; ++i) {
    double m = static_cast<double>(i) / (cells + 1);
    double v = objective(m);
    if (v > best_v) {
      best_v = v;
      best_m = m;
    }
  }
  double lo = std::max(0.0, best_m - 2.0 / cells);
  double hi = std::min(1.0 - 1e-12, best_m + 2.0 / cells);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1);
    }
  }
  return 0.5 * (lo + hi);
}

/// Which stationary law a magnetization law refers to.
enum class CwMeasure { kGibbs, kPCA, kTilde };

/// Exact law of the magnetization under the requested measure, as a vector
/// over k = 0..n spins up (m_k = 2k/n - 1).  Uses the exact finite-n per-site
/// tilts (the field at an up spin among k up spins is -c(S - 1), S = 2k - n,
/// c the actual matrix entry), so the law agrees with full enumeration to
/// rounding at small n.
inline std::vector<double> magnetization_law(std::size_t n, double J,
                                             double delta,
                                             MeanFieldConvention conv,
                                             CwMeasure measure) {
  if (n == 0) throw invalid_argument_error("n must be >= 1");
  InertiaParameter in = InertiaParameter::from_delta(delta);  // validates
  const double c = conv == MeanFieldConvention::kHalf
                       ? J / (2.0 * static_cast<double>(n))
                       : J / static_cast<double>(n);
  const double power = measure == CwMeasure::kGibbs
                           ? 0.0
                           : (measure == CwMeasure::kPCA ? 1.0 : 2.0);
  const double ld = in.log_delta();
  std::vector<double> lw(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    double S = 2.0 * static_cast<double>(k) - static_cast<double>(n);
    double lbinom = std::lgamma(static_cast<double>(n) + 1.0) -
                    std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0);
    // -H = c (S^2 - n)
    double lg = lbinom + c * (S * S - static_cast<double>(n));
    double log_tilt = 0.0;
    if (power != 0.0) {
      double up = softplus(ld + (-2.0 * c * S + 2.0 * c));  // sites with s=+1
      double dn = softplus(ld + (2.0 * c * S + 2.0 * c));   // sites with s=-1
      log_tilt = static_cast<double>(k) * up +
                 static_cast<double>(n - k) * dn;
    }
    lw[k] = lg + power * log_tilt;
  }
  double lz = log_sum_exp(lw);
  std::vector<double> p(n + 1);
  for (std::size_t k = 0; k <= n; ++k) p[k] = std::exp(lw[k] - lz);
  return p;
}

/// Mean of m under a magnetization law.
inline double law_mean(const std::vector<double>& law) {
  const std::size_t n = law.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    acc += law[k] * (2.0 * static_cast<double>(k) / static_cast<double>(n) -
                     1.0);
  return acc;
}

/// Variance of m under a magnetization law.
inline double law_variance(const std::vector<double>& law) {
  const std::size_t n = law.size() - 1;
  double mean = law_mean(law);
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    double m = 2.0 * static_cast<double>(k) / static_cast<double>(n) - 1.0;
    acc += law[k] * (m - mean) * (m - mean);
  }
  return acc;
}

/// The law conditioned on m >= 0 (the stationary law of the reflected
/// chain's magnetization, up to the negligible weight the quotient moves
/// within the m = 0 level).
inline std::vector<double> condition_nonnegative(const std::vector<double>& law) {
  const std::size_t n = law.size() - 1;
  std::vector<double> out(law.size(), 0.0);
  double z = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    if (2 * k >= n) z += law[k];
  if (z <= 0.0) throw invalid_argument_error("law has no mass on m >= 0");
  for (std::size_t k = 0; k <= n; ++k)
    if (2 * k >= n) out[k] = law[k] / z;
  return out;
}

/// Delta = pi_G(f^2)/pi_G(f)^2 - 1 by binomial sums, O(n).
inline double delta_ratio_cw(std::size_t n, double J, double delta,
                             MeanFieldConvention conv) {
  InertiaParameter in = InertiaParameter::from_delta(delta);
  const double c = conv == MeanFieldConvention::kHalf
                       ? J / (2.0 * static_cast<double>(n))
                       : J / static_cast<double>(n);
  const double ld = in.log_delta();
  std::vector<double> l0(n + 1), l1(n + 1), l2(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    double S = 2.0 * static_cast<double>(k) - static_cast<double>(n);
    double lbinom = std::lgamma(static_cast<double>(n) + 1.0) -
                    std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0);
    double lg = lbinom + c * (S * S - static_cast<double>(n));
    double lt = static_cast<double>(k) *
                    softplus(ld + (-2.0 * c * S + 2.0 * c)) +
                static_cast<double>(n - k) *
                    softplus(ld + (2.0 * c * S + 2.0 * c));
    l0[k] = lg;
    l1[k] = lg + lt;
    l2[k] = lg + 2.0 * lt;
  }
  double a = log_sum_exp(l2) + log_sum_exp(l0) - 2.0 * log_sum_exp(l1);
  return std::expm1(a);
}

/// Result of comparing the exact magnetization variances with their
/// Gaussian (linear-response) approximations.
struct GaussianApproxCheck {
  double var_gibbs = 0.0;       ///< exact Var(m) under pi_G
  double var_pca = 0.0;         ///< exact Var(m) under pi_PCA
  double target_gibbs = 0.0;    ///< 1 / (n (1 - aJ))
  double target_pca = 0.0;      ///< 1 / (n (1 - aJ - delta aJ (1 - aJ)))
  double rel_err_gibbs = 0.0;
  double rel_err_pca = 0.0;
};

/// Compares exact subcritical magnetization fluctuations with the
/// linear-response predictions (stated with the convention-adjusted slope
/// aJ, so in the half convention the targets read 1/(n(1-J)) and
/// 1/(n(1 - J - delta J (1 - J)))).
inline GaussianApproxCheck gaussian_approx_check(std::size_t n, double J,
                                                 double delta,
                                                 MeanFieldConvention conv) {
  double a = effective_slope(J, conv);
  if (a >= 1.0)
    throw invalid_argument_error(
        "gaussian_approx_check requires a subcritical coupling");
  GaussianApproxCheck r;
  r.var_gibbs = law_variance(
      magnetization_law(n, J, delta, conv, CwMeasure::kGibbs));
  r.var_pca =
      law_variance(magnetization_law(n, J, delta, conv, CwMeasure::kPCA));
  double nn = static_cast<double>(n);
  r.target_gibbs = 1.0 / (nn * (1.0 - a));
  r.target_pca = 1.0 / (nn * (1.0 - a - delta * a * (1.0 - a)));
  r.rel_err_gibbs = std::abs(r.var_gibbs - r.target_gibbs) / r.target_gibbs;
  r.rel_err_pca = std::abs(r.var_pca - r.target_pca) / r.target_pca;
  return r;
}

/// One-step contraction factor of the expected disagreement count of the
/// coupled subcritical dynamics (half convention): 1 - 2 delta (1 - J).
inline double contraction_factor(double J, double delta) {
  return 1.0 - 2.0 * delta * (1.0 - J);
}

/// Coalescence-time scale implied by the contraction: log(2n) steps of decay
/// at rate 2 delta (1 - J).
inline double mixing_time_prediction(std::size_t n, double J, double delta) {
  return std::log(2.0 * static_cast<double>(n)) / (2.0 * delta * (1.0 - J));
}

/// Union-bound tail on the disagreement survival probability:
/// P(tau > t) <= min(1, 2n [1 - 2 delta (1 - J)]^t).
inline double disagreement_tail_bound(std::size_t n, double J, double delta,
                                      long t) {
  double b = 2.0 * static_cast<double>(n) *
             std::pow(contraction_factor(J, delta), static_cast<double>(t));
  return b < 1.0 ? b : 1.0;
}

}  // namespace pcaspin::cw
