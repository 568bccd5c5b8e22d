#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pcaspin/common.hpp"

/// Spin systems with symmetric pair couplings.
///
/// A model on n sites is a symmetric coupling matrix J with zero diagonal.
/// Configurations live in {-1,+1}^n.  The central quantities are
///
///   local field   h_i(s) = -sum_j J_ij s_j,
///   energy        H(s)   = -sum_{i != j} J_ij s_i s_j  = sum_i h_i(s) s_i,
///
/// and, for the parallel dynamics with inertia q (delta = e^{-2q}),
///
///   pair energy   H(s,t) = sum_i [ h_i(s) t_i + q (1 - s_i t_i) ],
///   phi_i(s)      = e^{2 s_i h_i(s)},
///   f(s)          = prod_i (1 + delta phi_i(s)).
///
/// Both (i,j) orderings of a stored pair contribute to H, so a single stored
/// edge {i,j,w} adds -2 w s_i s_j to the energy.
namespace pcaspin {

/// A spin configuration; spins take values -1 and +1.
struct SpinConfiguration {
  std::vector<std::int8_t> s;

  SpinConfiguration() = default;
  explicit SpinConfiguration(std::size_t n, std::int8_t fill = 1)
      : s(n, fill) {}

  std::size_t size() const { return s.size(); }

  /// Builds the configuration encoded by `mask`: bit i set means s_i = +1.
  static SpinConfiguration from_bitmask(std::uint64_t mask, std::size_t n) {
    SpinConfiguration c(n, -1);
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) c.s[i] = 1;
    return c;
  }

  /// Inverse of from_bitmask (n <= 64).
  std::uint64_t to_bitmask() const {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] > 0) mask |= std::uint64_t{1} << i;
    return mask;
  }

  void flip(std::size_t i) { s[i] = static_cast<std::int8_t>(-s[i]); }

  /// Sum of spins (an integer in [-n, n]).
  long spin_sum() const {
    long t = 0;
    for (auto v : s) t += v;
    return t;
  }

  bool operator==(const SpinConfiguration& o) const { return s == o.s; }
};

/// Mean spin m(s) = (1/n) sum_i s_i.
inline double magnetization(const SpinConfiguration& c) {
  return c.size() == 0 ? 0.0
                       : static_cast<double>(c.spin_sum()) /
                             static_cast<double>(c.size());
}

/// The inertia parameter of the parallel dynamics, held as
/// delta = e^{-2q} in [0, 1] (so q >= 0, with delta = 0 <=> q = +infinity).
/// delta is the primary user-facing parameterization; q is derived.
class InertiaParameter {
 public:
  static InertiaParameter from_delta(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0))
      throw invalid_argument_error("delta must lie in [0, 1]");
    return InertiaParameter(delta);
  }

  static InertiaParameter from_q(double q) {
    if (!(q >= 0.0))  // also rejects NaN
      throw invalid_argument_error("q must be >= 0 (possibly infinite)");
    return InertiaParameter(std::exp(-2.0 * q));
  }

  double delta() const { return delta_; }
  double log_delta() const { return log_delta_; }
  double q() const { return delta_ == 0.0 ? kInf : -0.5 * log_delta_; }

 private:
  explicit InertiaParameter(double delta)
      : delta_(delta), log_delta_(delta == 0.0 ? -kInf : std::log(delta)) {}

  double delta_;
  double log_delta_;
};

/// A weighted undirected edge; endpoints are 0-based site indices.
struct Edge {
  int i;
  int j;
  double weight;
};

namespace detail {
/// The endpoints as a value pair with the smaller index first.
inline std::pair<int, int> ordered_pair(int a, int b) {
  return a < b ? std::pair<int, int>{a, b} : std::pair<int, int>{b, a};
}
}  // namespace detail

/// Symmetric pair-coupling matrix with zero diagonal.
///
/// Storage is either a sparse adjacency structure (CSR over both directions
/// of each edge) or, for mean-field models where every off-diagonal entry is
/// the same constant, a `Complete` fast path whose local fields are computed
/// from the running spin sum in O(1) per site.
class CouplingModel {
 public:
  enum class Kind { kSparse, kComplete };

  /// Builds a sparse model from an edge list.  Each unordered pair may appear
  /// at most once; self-couplings (diagonal entries) are rejected.
  static CouplingModel from_edges(std::size_t n, const std::vector<Edge>& edges) {
    if (n == 0) throw invalid_argument_error("model must have at least 1 site");
    CouplingModel m;
    m.kind_ = Kind::kSparse;
    m.n_ = n;
    std::map<std::pair<int, int>, double> seen;
    for (const Edge& e : edges) {
      if (e.i < 0 || e.j < 0 || static_cast<std::size_t>(e.i) >= n ||
          static_cast<std::size_t>(e.j) >= n)
        throw invalid_argument_error("edge endpoint out of range");
      if (e.i == e.j)
        throw invalid_argument_error("diagonal couplings are not allowed");
      if (!std::isfinite(e.weight))
        throw invalid_argument_error("coupling must be finite");
      auto key = detail::ordered_pair(e.i, e.j);
      if (!seen.emplace(key, e.weight).second)
        throw invalid_argument_error("duplicate edge {" +
                                     std::to_string(key.first) + "," +
                                     std::to_string(key.second) + "}");
    }
    m.edges_.reserve(seen.size());
    std::vector<std::size_t> degree(n, 0);
    for (const auto& [key, w] : seen) {
      m.edges_.push_back(Edge{key.first, key.second, w});
      ++degree[static_cast<std::size_t>(key.first)];
      ++degree[static_cast<std::size_t>(key.second)];
    }
    m.row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) m.row_ptr_[i + 1] = m.row_ptr_[i] + degree[i];
    m.col_.resize(m.row_ptr_[n]);
    m.weight_.resize(m.row_ptr_[n]);
    std::vector<std::size_t> cursor(m.row_ptr_.begin(), m.row_ptr_.end() - 1);
    for (const Edge& e : m.edges_) {
      m.col_[cursor[e.i]] = e.j;
      m.weight_[cursor[e.i]++] = e.weight;
      m.col_[cursor[e.j]] = e.i;
      m.weight_[cursor[e.j]++] = e.weight;
    }
    m.finalize_norms();
    return m;
  }

  /// Builds a mean-field model: J_ij = c for every i != j.
  static CouplingModel complete(std::size_t n, double c) {
    if (n == 0) throw invalid_argument_error("model must have at least 1 site");
    if (!std::isfinite(c))
      throw invalid_argument_error("coupling must be finite");
    CouplingModel m;
    m.kind_ = Kind::kComplete;
    m.n_ = n;
    m.constant_ = c;
    m.sup_norm_ = std::abs(c) * static_cast<double>(n - 1);
    m.ferromagnetic_ = c >= 0.0;
    return m;
  }

  Kind kind() const { return kind_; }
  std::size_t size() const { return n_; }

  /// The constant entry of a complete model.
  double constant() const { return constant_; }

  /// J_ij by lookup (O(degree) for sparse models).
  double coupling(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (kind_ == Kind::kComplete) return constant_;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (static_cast<std::size_t>(col_[k]) == j) return weight_[k];
    return 0.0;
  }

  /// h_i(s) = -sum_j J_ij s_j.
  double local_field(const SpinConfiguration& c, std::size_t i) const {
    if (kind_ == Kind::kComplete)
      return local_field_from_sum(c.spin_sum(), c.s[i]);
    double acc = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      acc += weight_[k] * c.s[static_cast<std::size_t>(col_[k])];
    return -acc;
  }

  /// Mean-field local field given the configuration's spin sum:
  /// h_i = -c (S - s_i).  Only valid for complete models.
  double local_field_from_sum(long spin_sum, int s_i) const {
    return -constant_ * static_cast<double>(spin_sum - s_i);
  }

  /// max_i sum_j |J_ij| (the interaction strength J).
  double sup_norm() const { return sup_norm_; }

  /// sum_j |J_ij| for one row.
  double row_abs_sum(std::size_t i) const {
    if (kind_ == Kind::kComplete)
      return std::abs(constant_) * static_cast<double>(n_ - 1);
    return row_abs_[i];
  }

  /// True when every coupling is >= 0 (required by the monotone coupling).
  bool is_ferromagnetic() const { return ferromagnetic_; }

  /// Canonical edge list (i < j).  Complete models are expanded on demand.
  std::vector<Edge> edge_list() const {
    if (kind_ == Kind::kSparse) return edges_;
    std::vector<Edge> out;
    out.reserve(n_ * (n_ - 1) / 2);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        out.push_back(Edge{static_cast<int>(i), static_cast<int>(j), constant_});
    return out;
  }

  /// Neighbors of site i as (site, weight) pairs; empty for complete models
  /// (use the spin-sum fast path instead).
  std::size_t neighbor_begin(std::size_t i) const { return row_ptr_[i]; }
  std::size_t neighbor_end(std::size_t i) const { return row_ptr_[i + 1]; }
  int neighbor_site(std::size_t k) const { return col_[k]; }
  double neighbor_weight(std::size_t k) const { return weight_[k]; }

 private:
  void finalize_norms() {
    row_abs_.assign(n_, 0.0);
    ferromagnetic_ = true;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        row_abs_[i] += std::abs(weight_[k]);
        if (weight_[k] < 0.0) ferromagnetic_ = false;
      }
    sup_norm_ = 0.0;
    for (double r : row_abs_) sup_norm_ = std::max(sup_norm_, r);
  }

  Kind kind_ = Kind::kSparse;
  std::size_t n_ = 0;
  // Sparse storage: canonical edges plus CSR over both edge directions.
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_ptr_{0, 0};
  std::vector<int> col_;
  std::vector<double> weight_;
  std::vector<double> row_abs_;
  // Complete storage.
  double constant_ = 0.0;

  double sup_norm_ = 0.0;
  bool ferromagnetic_ = true;
};

/// H(s) = -sum_{i != j} J_ij s_i s_j (each stored pair counted twice).
inline double hamiltonian(const CouplingModel& m, const SpinConfiguration& c) {
  if (m.kind() == CouplingModel::Kind::kComplete) {
    double S = static_cast<double>(c.spin_sum());
    return -m.constant() * (S * S - static_cast<double>(m.size()));
  }
  double acc = 0.0;
  for (const Edge& e : m.edge_list())
    acc += e.weight * c.s[static_cast<std::size_t>(e.i)] *
           c.s[static_cast<std::size_t>(e.j)];
  return -2.0 * acc;
}

/// log phi_i(s) = 2 s_i h_i(s).
inline double log_phi(const CouplingModel& m, const SpinConfiguration& c,
                      std::size_t i) {
  return 2.0 * c.s[i] * m.local_field(c, i);
}

/// log f(s) = sum_i log(1 + delta phi_i(s)), evaluated stably (exact at
/// delta = 0).
inline double log_f_factor(const CouplingModel& m, const InertiaParameter& in,
                           const SpinConfiguration& c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    acc += softplus(in.log_delta() + log_phi(m, c, i));
  return acc;
}

/// Pair energy H(s, t) = sum_i [ h_i(s) t_i + q (1 - s_i t_i) ].  Returns
/// +infinity when q is infinite and s != t.
inline double pair_hamiltonian(const CouplingModel& m,
                               const InertiaParameter& in,
                               const SpinConfiguration& s,
                               const SpinConfiguration& t) {
  if (s.size() != m.size() || t.size() != m.size())
    throw invalid_argument_error("configuration size mismatch");
  double q = in.q();
  double acc = 0.0;
  long mismatches = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    acc += m.local_field(s, i) * t.s[i];
    if (s.s[i] != t.s[i]) ++mismatches;
  }
  if (mismatches == 0) return acc;
  return acc + 2.0 * q * static_cast<double>(mismatches);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// rows x cols rectangular lattice with nearest-neighbor coupling j0.
/// With periodic boundaries the wrap bonds are added on top of the interior
/// bonds; on a side of length 2 the two parallel bonds between the same pair
/// of sites therefore accumulate to weight 2*j0, and a side of length 1
/// contributes no bonds in that direction.
inline CouplingModel lattice_rect(std::size_t rows, std::size_t cols, double j0,
                                  bool periodic) {
  if (rows == 0 || cols == 0)
    throw invalid_argument_error("lattice sides must be >= 1");
  auto site = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  std::map<std::pair<int, int>, double> acc;
  auto add = [&acc](std::size_t a, std::size_t b, double w) {
    if (a == b) return;
    acc[detail::ordered_pair(static_cast<int>(a), static_cast<int>(b))] += w;
  };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) add(site(r, c), site(r, c + 1), j0);
      if (r + 1 < rows) add(site(r, c), site(r + 1, c), j0);
      if (periodic && c + 1 == cols && cols > 1) add(site(r, c), site(r, 0), j0);
      if (periodic && r + 1 == rows && rows > 1) add(site(r, c), site(0, c), j0);
    }
  std::vector<Edge> edges;
  edges.reserve(acc.size());
  for (const auto& [key, w] : acc)
    edges.push_back(Edge{key.first, key.second, w});
  return CouplingModel::from_edges(rows * cols, edges);
}

/// L x L square lattice with nearest-neighbor coupling j0.
inline CouplingModel lattice2d(std::size_t L, double j0, bool periodic) {
  return lattice_rect(L, L, j0, periodic);
}

/// One-dimensional chain with polynomially decaying couplings
/// J_ij = j1 / |i-j|^2 for all pairs.
inline CouplingModel power_law_1d(std::size_t n, double j1) {
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = static_cast<double>(j - i);
      edges.push_back(
          Edge{static_cast<int>(i), static_cast<int>(j), j1 / (d * d)});
    }
  return CouplingModel::from_edges(n, edges);
}

/// Normalization convention of the mean-field coupling.
///
///  - kHalf: J_ij = J / (2n); local field (J/2) m + O(1/n); the critical
///    coupling is J = 1.
///  - kFull: J_ij = J / n;    local field J m + O(1/n); the critical
///    coupling is J = 1/2.
enum class MeanFieldConvention { kHalf, kFull };

/// Mean-field (complete-graph) model on n sites with strength J under the
/// given normalization convention.
inline CouplingModel curie_weiss_model(std::size_t n, double J,
                                       MeanFieldConvention conv) {
  double c = conv == MeanFieldConvention::kHalf
                 ? J / (2.0 * static_cast<double>(n))
                 : J / static_cast<double>(n);
  return CouplingModel::complete(n, c);
}

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

/// Parses the plain-text edge list format:
///
///   # comment
///   i j weight
///
/// with 0-based site indices, one undirected pair per line, each pair at most
/// once.  The number of sites is max(index) + 1.  Errors carry the offending
/// 1-based line number.
inline CouplingModel parse_edge_list(std::istream& is) {
  std::vector<Edge> edges;
  int max_index = -1;
  std::map<std::pair<int, int>, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long i, j;
    double w;
    if (!(ls >> i)) {
      std::string probe;
      std::istringstream(line) >> probe;
      if (probe.empty()) continue;  // blank or comment-only line
      throw parse_error(lineno, "expected integer site index");
    }
    if (!(ls >> j)) throw parse_error(lineno, "expected second site index");
    if (!(ls >> w)) throw parse_error(lineno, "expected coupling value");
    std::string trailing;
    if (ls >> trailing)
      throw parse_error(lineno, "unexpected trailing token '" + trailing + "'");
    if (i < 0 || j < 0) throw parse_error(lineno, "site indices must be >= 0");
    if (i == j)
      throw parse_error(lineno, "diagonal coupling {" + std::to_string(i) +
                                    "," + std::to_string(i) + "} not allowed");
    if (!std::isfinite(w)) throw parse_error(lineno, "coupling must be finite");
    auto key = detail::ordered_pair(static_cast<int>(i), static_cast<int>(j));
    auto ins = first_line.emplace(key, lineno);
    if (!ins.second)
      throw parse_error(lineno, "duplicate pair {" + std::to_string(key.first) +
                                    "," + std::to_string(key.second) +
                                    "} (first at line " +
                                    std::to_string(ins.first->second) + ")");
    edges.push_back(Edge{static_cast<int>(i), static_cast<int>(j), w});
    max_index = std::max(max_index, key.second);
  }
  if (edges.empty()) throw parse_error(lineno, "no edges found");
  return CouplingModel::from_edges(static_cast<std::size_t>(max_index) + 1,
                                   edges);
}

/// Writes a model in the edge-list text format accepted by parse_edge_list.
/// Weights are written with enough digits to round-trip exactly.
inline void write_edge_list(std::ostream& os, const CouplingModel& m) {
  std::ostringstream body;
  body.precision(17);
  for (const Edge& e : m.edge_list())
    body << e.i << ' ' << e.j << ' ' << e.weight << '\n';
  os << "# " << m.size() << " sites\n" << body.str();
}

}  // namespace pcaspin
