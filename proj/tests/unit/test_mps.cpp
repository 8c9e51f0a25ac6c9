#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "shallow2d/errors.hpp"
#include "shallow2d/mps.hpp"
#include "shallow2d/statevector.hpp"

using namespace shallow2d;
using testing_support::overlap;
using testing_support::phase_aligned_distance;

namespace {

const RowMatrix& hadamard() {
  static const RowMatrix h = fixed_gate(GateKind::hadamard_like_fixed, 2);
  return h;
}

// Random circuit applied in parallel to an MPS and the dense oracle.
struct Twin {
  MatrixProductState mps;
  Statevector dense;
};

Twin random_twin(std::size_t n, int layers, std::uint64_t seed) {
  Twin t{MatrixProductState::product_state(std::vector<int>(n, 2), std::vector<int>(n, 0)),
         Statevector::zero_state(n, 2)};
  RandomStream rng(seed);
  for (int l = 0; l < layers; ++l)
    for (std::size_t p = l % 2; p + 1 < n; p += 2) {
      const RowMatrix u = haar_matrix(4, rng);
      t.mps.apply_gate({{p, 0}, {p + 1, 0}}, u);
      apply_gate(t.dense, {p, p + 1}, u);
    }
  return t;
}

}  // namespace

TEST_CASE("product state basics") {
  MatrixProductState m = MatrixProductState::product_state({2, 2, 2}, {0, 0, 0});
  CHECK(m.max_bond_dim() == 1);
  CHECK(m.norm() == doctest::Approx(1.0));
  for (std::size_t b = 0; b < 2; ++b) CHECK(m.schmidt_values(b) == std::vector<double>{1.0});
  const std::vector<cplx> dense = m.to_dense();
  CHECK(dense == Statevector::zero_state(3, 2).amplitudes);
  CHECK_THROWS_AS(MatrixProductState::product_state({2}, {2}), InvalidArgument);
  const MatrixProductState mixed = MatrixProductState::product_state({2, 3}, {1, 2});
  CHECK(std::abs(mixed.to_dense()[5] - cplx(1.0)) < 1e-15);
}

TEST_CASE("CZ on |+>|+> gives one ebit") {
  MatrixProductState m = MatrixProductState::product_state({2, 2}, {0, 0});
  m.apply_gate({{0, 0}}, hadamard());
  m.apply_gate({{1, 0}}, hadamard());
  m.apply_gate({{0, 0}, {1, 0}}, fixed_gate(GateKind::cz, 2));
  const std::vector<double> s = m.schmidt_values(0);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(s[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("identity gate leaves the state unchanged") {
  Twin t = random_twin(4, 3, 5);
  const std::vector<cplx> before = t.mps.to_dense();
  t.mps.apply_gate({{1, 0}, {2, 0}}, RowMatrix::Identity(4, 4));
  CHECK(phase_aligned_distance(before, t.mps.to_dense()) < 1e-12);
}

TEST_CASE("random circuits agree with the dense oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Twin t = random_twin(3, 4, seed);
    CHECK(phase_aligned_distance(t.mps.to_dense(), t.dense.amplitudes) < 1e-10);
    CHECK(t.mps.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(t.mps.canonical_error() < 1e-9);
  }
  Twin big = random_twin(6, 5, 9);
  CHECK(phase_aligned_distance(big.mps.to_dense(), big.dense.amplitudes) < 1e-10);
  CHECK(big.mps.bond_dim(2) <= 8);
}

TEST_CASE("gates given in reverse site order") {
  RandomStream rng(3);
  const RowMatrix u = haar_matrix(4, rng);
  MatrixProductState m = MatrixProductState::product_state({2, 2}, {0, 1});
  Statevector s = Statevector::zero_state(2, 2);
  apply_gate(s, {1}, RowMatrix{{0.0, 1.0}, {1.0, 0.0}});
  m.apply_gate({{1, 0}, {0, 0}}, u);
  apply_gate(s, {1, 0}, u);
  CHECK(phase_aligned_distance(m.to_dense(), s.amplitudes) < 1e-12);
}

TEST_CASE("slots on one site act as separate qudits") {
  RandomStream rng(4);
  MatrixProductState m(2);
  m.absorb(0, 2);
  m.absorb(0, 2);
  m.absorb(1, 2);
  CHECK(m.physical_dim(0) == 4);
  Statevector s = Statevector::zero_state(3, 2);
  const RowMatrix a = haar_matrix(4, rng), b = haar_matrix(4, rng), c = haar_matrix(2, rng);
  m.apply_gate({{0, 1}, {0, 0}}, a);
  apply_gate(s, {1, 0}, a);
  m.apply_gate({{0, 0}, {1, 0}}, b);
  apply_gate(s, {0, 2}, b);
  m.apply_gate({{0, 1}}, c);
  apply_gate(s, {1}, c);
  CHECK(phase_aligned_distance(m.to_dense(), s.amplitudes) < 1e-12);
  // Projecting the middle qudit matches the oracle's post-measurement state.
  const double p = m.project({0, 1}, 1);
  const double q = project_sites(s, {1}, {1});
  CHECK(p == doctest::Approx(q).epsilon(1e-12));
  std::vector<cplx> reduced;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i)
    if (outcome_from_index(i, 3, 2)[1] == 1) reduced.push_back(s.amplitudes[i]);
  CHECK(phase_aligned_distance(m.to_dense(), reduced) < 1e-12);
  CHECK(m.slot_count(0) == 1);
}

TEST_CASE("absorbing then projecting onto 0 is a no-op") {
  Twin t = random_twin(4, 3, 6);
  const std::vector<cplx> before = t.mps.to_dense();
  const std::size_t slot = t.mps.absorb(2, 3);
  CHECK(t.mps.physical_dim(2) == 6);
  CHECK(t.mps.norm() == doctest::Approx(1.0));
  CHECK(t.mps.project({2, slot}, 0) == doctest::Approx(1.0));
  CHECK(phase_aligned_distance(before, t.mps.to_dense()) < 1e-12);
}

TEST_CASE("measurement of basis states and Bell pairs") {
  RandomStream rng(12);
  MatrixProductState zero = MatrixProductState::product_state({2}, {0});
  const MeasureOutcome m0 = zero.measure({0, 0}, rng);
  CHECK(m0.outcome == 0);
  CHECK(m0.probability == 1.0);
  MatrixProductState one = MatrixProductState::product_state({2, 2}, {0, 0});
  CHECK(one.project({0, 0}, 1) == 0.0);

  int agree = 0, ones = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    MatrixProductState bell = MatrixProductState::product_state({2, 2}, {0, 0});
    bell.apply_gate({{0, 0}}, hadamard());
    bell.apply_gate({{1, 0}}, hadamard());
    bell.apply_gate({{0, 0}, {1, 0}}, fixed_gate(GateKind::cz, 2));
    bell.apply_gate({{1, 0}}, hadamard());
    const MeasureOutcome a = bell.measure({0, 0}, rng);
    CHECK(a.probability == doctest::Approx(0.5));
    const MeasureOutcome b = bell.measure({1, 0}, rng);
    CHECK(b.probability == doctest::Approx(1.0));
    agree += a.outcome == b.outcome;
    ones += a.outcome;
  }
  CHECK(agree == n);
  CHECK(std::abs(ones - n / 2) < 4.0 * std::sqrt(n / 4.0));
}

TEST_CASE("product of projections equals the oracle probability") {
  Twin t = random_twin(5, 4, 21);
  const OutputDistribution d = output_distribution(t.dense);
  RandomStream rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t idx = rng.categorical(d.probabilities);
    const Outcome x = outcome_from_index(idx, 5, 2);
    MatrixProductState m = t.mps;
    double prob = 1.0;
    for (std::size_t s = 0; s < 5; ++s) prob *= m.project({s, 0}, x[s]);
    CHECK(prob == doctest::Approx(d.probabilities[idx]).epsilon(1e-10));
  }
}

TEST_CASE("gauge moves leave statistics and spectra unchanged") {
  Twin t = random_twin(6, 4, 31);
  MatrixProductState a = t.mps;
  a.move_center(0);
  const std::vector<double> s0 = a.schmidt_values(2);
  const std::vector<double> p0 = a.slot_probabilities({4, 0});
  a.move_center(5);
  CHECK(a.canonical_error() < 1e-9);
  const std::vector<double> p1 = a.slot_probabilities({4, 0});
  const std::vector<double> s1 = a.schmidt_values(2);
  for (std::size_t i = 0; i < p0.size(); ++i) CHECK(std::abs(p0[i] - p1[i]) < 1e-10);
  REQUIRE(s0.size() == s1.size());
  for (std::size_t i = 0; i < s0.size(); ++i) CHECK(std::abs(s0[i] - s1[i]) < 1e-10);
}

TEST_CASE("Schmidt values match the oracle reduced density matrix") {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    Twin t = random_twin(3, 3, seed);
    const ComplexTensor rho = reduced_density(t.dense, {0});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Eigen::MatrixXcd(rho.as_matrix(1)));
    std::vector<double> expect;
    for (Eigen::Index i = eig.eigenvalues().size(); i-- > 0;) expect.push_back(std::sqrt(std::max(0.0, eig.eigenvalues()(i))));
    const std::vector<double> s = t.mps.schmidt_values(0);
    double sq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(std::abs(s[i] - expect[i]) < 1e-9);
      sq += s[i] * s[i];
    }
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<double> p;
    for (double x : s) p.push_back(x * x);
    for (double k : {0.5, 1.0, 2.0}) CHECK(std::abs(renyi_entropy(p, k) - entanglement_entropy(t.dense, {0}, k)) < 1e-8);
  }
}

TEST_CASE("compression with zero budget is exact") {
  Twin t = random_twin(6, 4, 51);
  const std::vector<cplx> before = t.mps.to_dense();
  TruncationLog log;
  TruncationPolicy exact;
  exact.zero_tolerance = 0.0;
  const CompressionResult r = t.mps.compress(exact, 1, log);
  CHECK(r.discarded_weight == 0.0);
  CHECK(!r.exceeds_max_bond);
  CHECK(phase_aligned_distance(before, t.mps.to_dense()) < 1e-12);
  CHECK(log.eps_total() == 0.0);
  CHECK(log.records().size() == 5);
}

TEST_CASE("compression obeys the per-bond budget and the trace-distance law") {
  for (double eps : {1e-4, 1e-3, 1e-2}) {
    Twin t = random_twin(8, 6, 61);
    const std::vector<cplx> before = t.mps.to_dense();
    TruncationLog log;
    TruncationPolicy policy;
    policy.eps = eps;
    policy.max_bond = 2;
    const CompressionResult r = t.mps.compress(policy, 3, log);
    for (const TruncationRecord& rec : log.records()) CHECK(rec.discarded_weight <= eps);
    CHECK(t.mps.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.exceeds_max_bond == (r.max_bond > 2));
    // || |a><a| - |b><b| ||_1 = 2 sqrt(1 - |<a|b>|^2) for unit vectors.
    const double f = overlap(before, t.mps.to_dense());
    const double dist = 2.0 * std::sqrt(std::max(0.0, 1.0 - f * f));
    CHECK(dist <= std::sqrt(8.0 * log.iteration_weights()[3]) + 1e-12);
  }
}

TEST_CASE("truncation log accumulates") {
  TruncationLog log;
  log.append({1, 0, 5e-5, 0.007, 1, false});
  CHECK(log.sqrt_term() == doctest::Approx(0.01));
  log.append({1, 1, 3e-5, 0.005, 1, false});
  log.append({2, 0, 1e-4, 0.01, 2, false});
  log.append({2, 0, 2e-26, 1.4e-13, 2, true});
  CHECK(log.iteration_weights()[1] == doctest::Approx(8e-5));
  CHECK(log.iteration_weights()[2] == doctest::Approx(1e-4));
  CHECK(log.lambda() == doctest::Approx(0.022 + 1.4e-13));
  CHECK(log.split_term() == doctest::Approx(2e-13));
  CHECK(log.eps_total() == doctest::Approx(1.8e-4));
}
