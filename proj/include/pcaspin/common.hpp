#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

/// Shared numeric helpers and error types used across the library.
///
/// All probability-weight arithmetic is carried out in the log domain; the
/// helpers here are the stable building blocks (softplus, log-sum-exp,
/// sigmoid) that the rest of the library is written against.
namespace pcaspin {

/// Error raised when an input file or inline text cannot be parsed.
/// Carries a 1-based line number for user-facing diagnostics (0 when no
/// specific line applies, e.g. structural errors in a config document).
class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, const std::string& what_arg)
      : std::runtime_error(line == 0 ? what_arg
                                     : "line " + std::to_string(line) + ": " +
                                           what_arg),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Error raised when a requested exact computation exceeds the supported
/// problem size (enumeration over 2^n states, dense 2^n x 2^n matrices, ...).
class resource_cap_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error raised when arguments are structurally invalid (out-of-range
/// parameters, mismatched sizes, unknown enum values, ...).
class invalid_argument_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(1 + e^y), accurate over the whole real line (no overflow for large y).
inline double softplus(double y) {
  if (y == -kInf) return 0.0;
  if (y > 36.0) return y + std::exp(-y);  // e^{-y} below double epsilon of y
  if (y < -36.0) return std::exp(y);
  return std::log1p(std::exp(y));
}

/// Logistic function 1 / (1 + e^{-y}), exact at y = +/-infinity.
inline double sigmoid(double y) {
  if (y >= 0.0) {
    return 1.0 / (1.0 + std::exp(-y));
  }
  double e = std::exp(y);
  return e / (1.0 + e);
}

/// log(sum_k e^{v_k}) without overflow; returns -inf for an empty input.
inline double log_sum_exp(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Two-argument log-sum-exp.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace pcaspin
