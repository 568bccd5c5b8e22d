#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "pcaspin/exact.hpp"
#include "pcaspin/model.hpp"
#include "pcaspin/rng.hpp"
#include "pcaspin/sampler.hpp"

using namespace pcaspin;

namespace {

CouplingModel mixed4() {
  return CouplingModel::from_edges(4, {{0, 1, 0.3},
                                       {1, 2, -0.2},
                                       {2, 3, 0.25},
                                       {0, 3, 0.15},
                                       {0, 2, -0.1}});
}

}  // namespace

TEST_CASE("per-site update law matches the transition-matrix marginal") {
  CouplingModel m = mixed4();
  InertiaParameter in = InertiaParameter::from_delta(0.3);
  std::vector<double> P = exact::pca_transition_matrix(m, in);
  const std::size_t dim = 16;
  for (std::uint64_t s = 0; s < dim; ++s) {
    SpinConfiguration c = SpinConfiguration::from_bitmask(s, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      double marginal = 0.0;
      for (std::uint64_t t = 0; t < dim; ++t)
        if (!(t >> i & 1u)) marginal += P[s * dim + t];
      CHECK(sampler::pca_minus_probability(m, in, c, i) ==
            doctest::Approx(marginal).epsilon(1e-12));
    }
  }
}

TEST_CASE("parallel update is bit-identical across thread counts") {
  CouplingModel m = curie_weiss_model(50000, 0.8, MeanFieldConvention::kHalf);
  InertiaParameter in = InertiaParameter::from_delta(0.1);
  auto run = [&](unsigned threads) {
    SpinConfiguration c = sampler::random_configuration(m.size(), 77);
    sampler::Workspace ws;
    std::vector<long> flips;
    for (std::uint64_t t = 1; t <= 3; ++t)
      flips.push_back(sampler::pca_step(m, in, c, ws, 123, t, threads));
    return std::pair<SpinConfiguration, std::vector<long>>(c, flips);
  };
  auto [c1, f1] = run(1);
  auto [c2, f2] = run(2);
  auto [c4, f4] = run(4);
  CHECK(c1.s == c2.s);
  CHECK(c1.s == c4.s);
  CHECK(f1 == f2);
  CHECK(f1 == f4);
}

TEST_CASE("sparse and dense mean-field paths agree exactly") {
  // The complete-kind fast path must reproduce the generic sparse update.
  const std::size_t n = 9;
  CouplingModel dense = curie_weiss_model(n, 0.7, MeanFieldConvention::kHalf);
  std::vector<Edge> pairs;
  for (int i = 0; i < static_cast<int>(n); ++i)
    for (int j = i + 1; j < static_cast<int>(n); ++j)
      pairs.push_back({i, j, dense.constant()});
  CouplingModel sparse = CouplingModel::from_edges(n, pairs);
  InertiaParameter in = InertiaParameter::from_delta(0.2);
  SpinConfiguration a = sampler::random_configuration(n, 5);
  SpinConfiguration b = a;
  sampler::Workspace wa, wb;
  for (std::uint64_t t = 1; t <= 50; ++t) {
    long fa = sampler::pca_step(dense, in, a, wa, 99, t);
    long fb = sampler::pca_step(sparse, in, b, wb, 99, t);
    CHECK(fa == fb);
    REQUIRE(a.s == b.s);
  }
}

TEST_CASE("one-step law matches the exact transition row (chi-square)") {
  CouplingModel m = mixed4();
  InertiaParameter in = InertiaParameter::from_delta(0.3);
  const std::uint64_t start = 0b0110;
  std::vector<double> P = exact::pca_transition_matrix(m, in);
  const std::size_t dim = 16;
  const std::size_t reps = 20000;
  std::vector<long> counts(dim, 0);
  sampler::Workspace ws;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    SpinConfiguration c = SpinConfiguration::from_bitmask(start, 4);
    std::uint64_t stream = rng::derive_stream(2024, rep);
    sampler::pca_step(m, in, c, ws, stream, 1);
    ++counts[c.to_bitmask()];
  }
  double chi2 = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    double expect = static_cast<double>(reps) * P[start * dim + t];
    REQUIRE(expect > 5.0);  // all cells well populated for this model
    double d = static_cast<double>(counts[t]) - expect;
    chi2 += d * d / expect;
  }
  // 15 degrees of freedom; 44.26 is the 99.99th percentile.
  CHECK(chi2 < 44.26);
}

TEST_CASE("sequential heat-bath law matches its matrix row (chi-square)") {
  CouplingModel m = mixed4();
  const std::uint64_t start = 0b1001;
  std::vector<double> P = exact::gibbs_transition_matrix(m);
  const std::size_t dim = 16;
  const std::size_t reps = 20000;
  std::vector<long> counts(dim, 0);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    SpinConfiguration c = SpinConfiguration::from_bitmask(start, 4);
    std::uint64_t stream = rng::derive_stream(515, rep);
    sampler::gibbs_step(m, c, stream, 1);
    ++counts[c.to_bitmask()];
  }
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t t = 0; t < dim; ++t) {
    double expect = static_cast<double>(reps) * P[start * dim + t];
    if (expect == 0.0) {
      CHECK(counts[t] == 0);  // unreachable in one sequential step
      continue;
    }
    ++dof;
    double d = static_cast<double>(counts[t]) - expect;
    chi2 += d * d / expect;
  }
  CHECK(dof == 5);  // stay + 4 single-site moves
  // 4 degrees of freedom; 23.5 is the 99.99th percentile.
  CHECK(chi2 < 23.5);
}

TEST_CASE("flip counts report exactly the changed sites") {
  CouplingModel m = mixed4();
  InertiaParameter in = InertiaParameter::from_delta(0.5);
  SpinConfiguration c = sampler::random_configuration(4, 3);
  sampler::Workspace ws;
  for (std::uint64_t t = 1; t <= 100; ++t) {
    SpinConfiguration before = c;
    long flips = sampler::pca_step(m, in, c, ws, 7, t);
    long manual = 0;
    for (std::size_t i = 0; i < 4; ++i)
      if (before.s[i] != c.s[i]) ++manual;
    CHECK(flips == manual);
  }
}

TEST_CASE("delta = 0 freezes the parallel chain") {
  CouplingModel m = mixed4();
  InertiaParameter frozen = InertiaParameter::from_delta(0.0);
  SpinConfiguration c = sampler::random_configuration(4, 11);
  SpinConfiguration before = c;
  sampler::Workspace ws;
  for (std::uint64_t t = 1; t <= 20; ++t)
    CHECK(sampler::pca_step(m, frozen, c, ws, 1, t) == 0);
  CHECK(c.s == before.s);
}

TEST_CASE("shared-noise coupling preserves the partial order") {
  CouplingModel m = lattice2d(6, 0.15, true);
  REQUIRE(m.is_ferromagnetic());
  InertiaParameter in = InertiaParameter::from_delta(0.2);
  SpinConfiguration hi = sampler::all_plus(m.size());
  SpinConfiguration lo = sampler::all_minus(m.size());
  sampler::Workspace wh, wl;
  long diff = -1;
  for (std::uint64_t t = 1; t <= 300; ++t) {
    diff = sampler::coupled_pca_step(m, in, hi, lo, wh, wl, 31, t);
    for (std::size_t i = 0; i < m.size(); ++i) REQUIRE(hi.s[i] >= lo.s[i]);
    long manual = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (hi.s[i] != lo.s[i]) ++manual;
    REQUIRE(diff == manual);
    if (diff == 0) break;
  }
  CHECK(diff == 0);  // coalesced within the budget
  // Once equal, the chains are glued forever.
  for (std::uint64_t t = 301; t <= 310; ++t) {
    sampler::coupled_pca_step(m, in, hi, lo, wh, wl, 31, t);
    CHECK(hi.s == lo.s);
  }
}

TEST_CASE("coupled chains move like the single chain") {
  // Each marginal of the coupled step uses the same rule and the same lane,
  // so a coupled chain started at (x, x) follows pca_step from x exactly.
  CouplingModel m = lattice2d(4, 0.2, false);
  InertiaParameter in = InertiaParameter::from_delta(0.3);
  SpinConfiguration x = sampler::random_configuration(m.size(), 8);
  SpinConfiguration a = x, b = x, single = x;
  sampler::Workspace wa, wb, ws;
  for (std::uint64_t t = 1; t <= 50; ++t) {
    sampler::coupled_pca_step(m, in, a, b, wa, wb, 555, t);
    sampler::pca_step(m, in, single, ws, 555, t);
    REQUIRE(a.s == single.s);
    REQUIRE(b.s == single.s);
  }
}

TEST_CASE("single free spin coalesces geometrically") {
  // With no couplings and delta = 0.5 the two copies glue with probability
  // 2 delta / (1 + delta) = 2/3 at every step, independently.
  CouplingModel m = CouplingModel::from_edges(1, {});
  InertiaParameter in = InertiaParameter::from_delta(0.5);
  sampler::CoalescenceResult r =
      sampler::estimate_coalescence(m, in, 20000, 1000, 4242);
  CHECK(r.censored == 0);
  double mean = 0.0;
  for (long t : r.taus) mean += static_cast<double>(t);
  mean /= static_cast<double>(r.taus.size());
  // E[tau] = 3/2, sd(mean) ~ 0.866/sqrt(20000): a 5-sigma envelope.
  CHECK(mean == doctest::Approx(1.5).epsilon(0.022));
  // P(tau > 3) = (1/3)^3.
  CHECK(r.survival(3) == doctest::Approx(std::pow(1.0 / 3.0, 3)).scale(1.0)
            .epsilon(0.006));
}

TEST_CASE("coalescence experiment is deterministic for any thread count") {
  CouplingModel m = curie_weiss_model(100, 0.5, MeanFieldConvention::kHalf);
  InertiaParameter in = InertiaParameter::from_delta(0.05);
  sampler::CoalescenceResult a =
      sampler::estimate_coalescence(m, in, 60, 4000, 777, 1);
  sampler::CoalescenceResult b =
      sampler::estimate_coalescence(m, in, 60, 4000, 777, 3);
  CHECK(a.taus == b.taus);
  CHECK(a.censored == 0);
  CHECK(a.max_tau == b.max_tau);
  CHECK(a.quantile(0.5) == b.quantile(0.5));
}

TEST_CASE("reflected steps always land in the canonical half") {
  for (std::size_t n : {5, 6}) {  // odd and even
    CouplingModel m = curie_weiss_model(n, 1.2, MeanFieldConvention::kHalf);
    InertiaParameter in = InertiaParameter::from_delta(0.3);
    SpinConfiguration c = sampler::all_plus(n);
    sampler::Workspace ws;
    bool saw_reflection = false;
    for (std::uint64_t t = 1; t <= 2000; ++t) {
      sampler::ReflectedStep r =
          sampler::reflected_pca_step(m, in, c, ws, 97, t);
      saw_reflection = saw_reflection || r.reflected;
      REQUIRE(sampler::in_positive_half(c));
    }
    CHECK(saw_reflection);
  }
}

TEST_CASE("run_chain reproduces a manual trajectory, records on schedule") {
  CouplingModel m = lattice2d(3, 0.12, true);
  InertiaParameter in = InertiaParameter::from_delta(0.25);
  SpinConfiguration init = sampler::random_configuration(m.size(), 21);
  sampler::ChainStats stats =
      sampler::run_chain(m, in, init, 10, 2, 2718, 1);
  REQUIRE(stats.records.size() == 6);  // steps 0,2,4,6,8,10
  CHECK(stats.records.front().step == 0);
  CHECK(stats.records.back().step == 10);
  CHECK(stats.steps == 10);

  SpinConfiguration c = init;
  sampler::Workspace ws;
  long total = 0;
  std::size_t row = 1;
  for (std::uint64_t t = 1; t <= 10; ++t) {
    long flips = sampler::pca_step(m, in, c, ws, 2718, t);
    total += flips;
    if (t % 2 == 0) {
      CHECK(stats.records[row].magnetization ==
            doctest::Approx(magnetization(c)).epsilon(1e-15));
      CHECK(stats.records[row].energy ==
            doctest::Approx(hamiltonian(m, c)).epsilon(1e-12));
      CHECK(stats.records[row].flips == flips);
      ++row;
    }
  }
  CHECK(stats.total_flips == total);
}

TEST_CASE("random configurations are reproducible and balanced") {
  SpinConfiguration a = sampler::random_configuration(10000, 9);
  SpinConfiguration b = sampler::random_configuration(10000, 9);
  CHECK(a.s == b.s);
  CHECK(sampler::random_configuration(10000, 10).s != a.s);
  CHECK(std::abs(magnetization(a)) < 0.05);  // 5-sigma ~ 0.05
}
