#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "shallow2d/errors.hpp"
#include "shallow2d/statevector.hpp"

using namespace shallow2d;

namespace {

OutputDistribution from_probs(std::size_t n, std::vector<double> p) { return {n, 2, std::move(p)}; }

}  // namespace

TEST_CASE("outcome indexing puts site 0 first") {
  CHECK(outcome_index({1, 0, 1}, 2) == 5);
  CHECK(outcome_from_index(5, 3, 2) == Outcome{1, 0, 1});
  CHECK(outcome_index({2, 1}, 3) == 7);
}

TEST_CASE("Bell pair from Hadamard and CZ") {
  const RowMatrix h = fixed_gate(GateKind::hadamard_like_fixed, 2);
  const RowMatrix cz = fixed_gate(GateKind::cz, 2);
  Statevector s = Statevector::zero_state(2, 2);
  apply_gate(s, {0}, h);
  apply_gate(s, {1}, h);
  apply_gate(s, {0, 1}, cz);
  apply_gate(s, {1}, h);
  const OutputDistribution d = output_distribution(s);
  CHECK(d.probabilities[0] == doctest::Approx(0.5));
  CHECK(d.probabilities[3] == doctest::Approx(0.5));
  CHECK(d.probabilities[1] == doctest::Approx(0.0));
  CHECK(entanglement_entropy(s, {0}) == doctest::Approx(1.0));
  CHECK(entanglement_entropy(s, {0}, 2.0) == doctest::Approx(1.0));
  const ComplexTensor rho = reduced_density(s, {1});
  CHECK(purity(rho) == doctest::Approx(0.5));
}

TEST_CASE("gate site order selects the most significant index") {
  // X on the first listed site of a 2-site gate X (x) I.
  RowMatrix x_i = RowMatrix::Zero(4, 4);
  x_i(2, 0) = x_i(3, 1) = x_i(0, 2) = x_i(1, 3) = 1.0;
  Statevector s = Statevector::zero_state(3, 2);
  apply_gate(s, {2, 0}, x_i);
  CHECK(std::norm(s.amplitudes[outcome_index({0, 0, 1}, 2)]) == doctest::Approx(1.0));
  CHECK_THROWS_AS(apply_gate(s, {0, 0}, x_i), InvalidArgument);
}

TEST_CASE("cluster state with identity measurement gates is uniform") {
  CircuitLayout c = chr_layout(2);
  for (GateEvent& e : c.events)
    if (e.kind == GateKind::haar_one_site) e.kind = GateKind::hadamard_like_fixed;
  CircuitInstance inst = make_instance(c, 1);
  for (std::size_t g = 0; g < c.events.size(); ++g)
    if (c.events[g].layer == 6) inst.gates[g] = RowMatrix::Identity(2, 2);
  const OutputDistribution d = exact_distribution(inst);
  for (double p : d.probabilities) CHECK(p == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("marginals and entropies of hand-built distributions") {
  // Copy distribution: A = B = C.
  const OutputDistribution copy = from_probs(3, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  const EntropyReport r1 = exact_entropies(copy, {0}, {1}, {2});
  CHECK(r1.cmi == doctest::Approx(0.0));
  CHECK(r1.s_ab == doctest::Approx(1.0));
  // C = A xor B with A, B uniform: I(A:C|B) = 1.
  std::vector<double> p(8, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) p[outcome_index({a, b, a ^ b}, 2)] = 0.25;
  const EntropyReport r2 = exact_entropies(from_probs(3, p), {0}, {1}, {2});
  CHECK(r2.cmi == doctest::Approx(1.0));
  const OutputDistribution m = from_probs(3, p).marginal({2, 0});
  CHECK(m.probabilities == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(exact_entropies(copy, {0}, {0}, {2}), InvalidArgument);
}

TEST_CASE("marginal keeps the listed order") {
  // Point mass on x = (1, 0, 0).
  std::vector<double> p(8, 0.0);
  p[outcome_index({1, 0, 0}, 2)] = 1.0;
  const OutputDistribution m = from_probs(3, p).marginal({1, 0});
  CHECK(m.probabilities[outcome_index({0, 1}, 2)] == 1.0);
}

TEST_CASE("projection returns Born probabilities and renormalizes") {
  const CircuitInstance inst = make_instance(brickwork_layout(2, 3), 8);
  Statevector s = simulate_exact(inst);
  const OutputDistribution d = output_distribution(s);
  const double p0 = d.marginal({0}).probabilities[1];
  const double got = project_sites(s, {0}, {1});
  CHECK(got == doctest::Approx(p0).epsilon(1e-12));
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const OutputDistribution post = output_distribution(s);
  CHECK(post.marginal({0}).probabilities[1] == doctest::Approx(1.0));
}

TEST_CASE("Renyi entropies of known vectors") {
  CHECK(renyi_entropy({0.25, 0.25, 0.25, 0.25}, 0.5) == doctest::Approx(2.0));
  CHECK(renyi_entropy({0.25, 0.25, 0.25, 0.25}, 1.0) == doctest::Approx(2.0));
  CHECK(renyi_entropy({0.5, 0.5, 0.0}, 0.0) == doctest::Approx(1.0));
  CHECK(renyi_entropy({0.9, 0.1}, 2.0) == doctest::Approx(-std::log2(0.82)));
  CHECK(shannon_entropy({1.0}) == 0.0);
}

TEST_CASE("the oracle enforces its memory cap") {
  CHECK_THROWS_AS(Statevector::zero_state(25, 2), ResourceCapExceeded);
  CHECK_THROWS_AS(Statevector::zero_state(13, 4), ResourceCapExceeded);
  CHECK_NOTHROW(Statevector::zero_state(4, 2, 4.0));
}

TEST_CASE("total variation") {
  CHECK(total_variation({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(total_variation({0.3, 0.7}, {0.3, 0.7}) == 0.0);
}
