// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shallow2d/architecture.hpp"
#include "shallow2d/sebd.hpp"

namespace shallow2d {

using Rational = boost::multiprecision::cpp_rational;

// Elements of S_2.
enum class Perm2 { e = 0, swap = 1 };

// Wg(perm, q^2) for k = 2.
Rational weingarten_k2(Perm2 perm, int q);
// sum_sigma Wg(sigma, q^2) = 1 / (q^2 (q^2 + 1)).
Rational weingarten_k2_sum(int q);

// Couplings in natural-log units, in insertion order.
struct CouplingSet {
  std::vector<std::pair<std::string, double>> values;

  double at(const std::string& name) const;
  void write_csv(std::ostream& out) const;
};

// w = 2 / (q + 1), the swap weight of the Haar-mixed diagonal measurement.
double weak_measurement_w(double q);
// J1 = J2 (ferromagnetic diagonals) and J3 (antiferromagnetic verticals).
CouplingSet weak_measurement_couplings(double q);
// sinh(2J1) sinh(2J2) + sinh(2J2) sinh(2J3) + sinh(2J1) sinh(2J3); 1 at criticality.
double triangular_criterion(double q);
// Root of triangular_criterion(q) = 1 by bisection on [lo, hi].
double triangular_critical_q(double lo = 2.0, double hi = 5.0, double tol = 1e-10);

// J_vert, J_horiz of the decimated depth-3 brickwork model.
CouplingSet brickwork_couplings(double q);
// ln(1 + sqrt 2) / 2.
double square_ising_critical_coupling();

struct LinkWeights {
  Rational agree;
  Rational disagree;
};
// Decimated brickwork link weights: vertical = q^2 (q^2 + 1), 2 q^3; horizontal
// = (q^6 + q^4 - 4q^3 + q^2 + 1, 2q^5 - 2q^4 - 2q^2 + 2q) / (q^2 (q^4 - 1)^2).
LinkWeights brickwork_vertical_weights(int q);
LinkWeights brickwork_horizontal_weights(int q);

enum class NodeKind { incoming, outgoing, auxiliary };

struct SpinNode {
  NodeKind kind = NodeKind::incoming;
  int gate = -1;   // event index for incoming/outgoing nodes
  int qudit = -1;  // site index for auxiliary nodes
  std::optional<Perm2> fixed;
};

enum class EdgeKind { weingarten, link, boundary };

struct SpinEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  EdgeKind kind = EdgeKind::link;
  std::array<Rational, 4> weight;  // indexed 2 * s_a + s_b
};

// Output boundary of the k = 2 model. Twisted sites carry the swap
// auxiliary spin, measured sites are projectively measured in the
// computational basis; dephased switches terminal weights to those of the
// dephased (classical) output.
struct SpinBoundary {
  std::vector<Site> twisted;
  std::vector<Site> measured;
  bool dephased = false;
};

struct SpinModel {
  int q = 2;
  std::vector<SpinNode> nodes;
  std::vector<SpinEdge> edges;
  Rational constant = 1;  // overall scalar multiplying the configuration sum

  std::size_t free_spins() const;
  std::size_t degree(std::size_t node) const;
};

// Requires every event to be a two-site Haar gate.
SpinModel build_spin_model(const CircuitLayout& layout, const SpinBoundary& boundary);
// {"q", "constant", "nodes": [{kind, gate, qudit, fixed}], "edges": [{a, b,
// kind, weight: ["p/q" x4]}]}.
std::string spin_model_json(const SpinModel& model);

// Haar-gate layouts on a 2x2 grid: every gate sequence of length 1..max_gates
// with no gate repeated back to back, one gate per layer, one representative
// per orbit of the square's symmetry group.
std::vector<CircuitLayout> small_layouts(int q, std::size_t max_gates);

inline constexpr std::size_t kPartitionSpinCap = 24;

// Exact signed sum over every configuration of the free spins, by variable
// elimination. Throws ResourceCapExceeded above spin_cap free spins or when an
// intermediate factor would exceed 2^22 entries.
Rational partition_function_exact(const SpinModel& model, std::size_t spin_cap = kPartitionSpinCap);

// -log2(E Z_{2,A} / E Z_{2,empty}) with A = boundary.twisted, exactly.
double quasi_entropy_exact(const CircuitLayout& layout, const SpinBoundary& boundary,
                           std::size_t spin_cap = kPartitionSpinCap);

// Factor over up to three outgoing spins left after summing out the
// incoming spins; table indexed by the bits of the listed spins, first most
// significant.
struct SpinFactor {
  std::vector<std::size_t> spins;
  std::vector<double> table;
};

struct DecimatedModel {
  std::size_t n_spins = 0;
  std::vector<int> gate_of_spin;
  std::vector<SpinFactor> factors;
  // Index into factors of the terminal factor of each qudit, -1 if none.
  std::vector<std::ptrdiff_t> terminal_factor;
  double log_constant = 0.0;
};

// Throws NumericalFailure if a decimated weight is negative.
DecimatedModel decimate(const SpinModel& model, const CircuitLayout& layout);

struct CircuitAverage {
  double z_empty = 0.0;
  double z_empty_stderr = 0.0;
  double z_twisted = 0.0;
  double z_twisted_stderr = 0.0;
  std::size_t instances = 0;
};

// Circuit-sampling estimate of E Z_{2,empty} and E Z_{2,A} over Haar instances
// and measurement outcomes: E sum_m p(m)^2 and E sum_m p(m)^2 tr(rho_A|m ^2).
CircuitAverage circuit_average_z2(const CircuitLayout& layout, const SpinBoundary& boundary, std::size_t instances,
                                  std::uint64_t seed, int workers = 1);

struct McOptions {
  std::size_t chains = 4;
  std::size_t sweeps = 4000;
  std::size_t burn_in = 1000;
  std::size_t batches = 20;   // batch means per chain
  double r_hat_limit = 1.05;  // split-chain diagnostic threshold
  std::uint64_t seed = 1;
  int workers = 1;
};

struct QuasiEntropyEstimate {
  double s2 = 0.0;  // bits
  double stderr_s2 = 0.0;
  double max_r_hat = 1.0;
  bool converged = true;
  bool exact = false;
};

// Metropolis estimate on the decimated model, twisting one site of A at a
// time and multiplying the stage ratios.
QuasiEntropyEstimate quasi_entropy_mc(const CircuitLayout& layout, const SpinBoundary& boundary,
                                      const McOptions& options = {});

// Strips of `size` rows by size + width_offset columns. All columns but the
// last are measured; A is the top half of the last column. Each size is
// computed exactly when elimination fits under exact_spin_cap, otherwise by
// Metropolis.
struct QuasiEntropyScanConfig {
  FamilySpec spec;
  std::vector<int> sizes{4, 8, 12, 16};
  int width_offset = 2;
  bool dephased = false;
  McOptions mc;
  std::size_t exact_spin_cap = 1024;
};

struct QuasiEntropyRow {
  int size = 0;
  QuasiEntropyEstimate estimate;
};

std::vector<QuasiEntropyRow> quasi_entropy_scan(const QuasiEntropyScanConfig& config);
void write_quasi_entropy_csv(std::ostream& out, const std::vector<QuasiEntropyRow>& rows);

// Dephased output at q -> infinity: every strict subregion has maximal
// entropy and the full lattice loses (1 - gamma) / ln 2 bits.
struct DephasedInfiniteQ {
  double closed_form = 0.0;   // (1 - gamma) / ln 2
  double extrapolated = 0.0;  // lim_{k->1} log2(k!) / (k - 1), numerically
  double cmi = 0.0;           // from the region entropies, bits
};

// Region sizes are in qudits, entropies per qudit in units of log2 q.
DephasedInfiniteQ dephased_cmi_infinite_q(std::size_t a, std::size_t b, std::size_t c, double q = 2.0);
// Entropy of a region of `size` qudits out of `total` at q -> infinity, bits.
double dephased_entropy_infinite_q(std::size_t size, std::size_t total, double q);

}  // namespace shallow2d
