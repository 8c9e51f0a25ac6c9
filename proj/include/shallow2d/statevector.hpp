// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <cstddef>
#include <vector>

#include "shallow2d/architecture.hpp"
#include "shallow2d/tensor.hpp"

namespace shallow2d {

// Outcome strings are indexed by row-major site index.
using Outcome = std::vector<int>;

inline constexpr double kDefaultOracleQubitCap = 24.0;

// Dense state of n sites of dimension q. Amplitude index sum_s x_s q^{n-1-s}:
// site 0 is the most significant digit. Sites start in basis index 0.
struct Statevector {
  std::size_t n_sites = 0;
  int local_dim = 2;
  std::vector<cplx> amplitudes;

  static Statevector zero_state(std::size_t n_sites, int local_dim, double qubit_cap = kDefaultOracleQubitCap);
  double norm() const;
};

struct OutputDistribution {
  std::size_t n_sites = 0;
  int local_dim = 2;
  std::vector<double> probabilities;

  double probability(const Outcome& x) const;
  // Distribution of the listed sites, in the listed order.
  OutputDistribution marginal(const std::vector<std::size_t>& sites) const;
};

std::size_t outcome_index(const Outcome& x, int q);
Outcome outcome_from_index(std::size_t index, std::size_t n_sites, int q);

// Applies a gate on the listed sites; the first listed site is the most
// significant index of the gate matrix.
void apply_gate(Statevector& state, const std::vector<std::size_t>& sites, const RowMatrix& gate);

Statevector simulate_exact(const CircuitInstance& instance, double qubit_cap = kDefaultOracleQubitCap);
OutputDistribution output_distribution(const Statevector& state);
OutputDistribution exact_distribution(const CircuitInstance& instance, double qubit_cap = kDefaultOracleQubitCap);

// Projects the listed sites onto `outcomes`, renormalizes when the
// probability is positive, and returns that probability.
double project_sites(Statevector& state, const std::vector<std::size_t>& sites, const std::vector<int>& outcomes);

// Reduced density matrix of `region` (listed order), q^|region| square.
ComplexTensor reduced_density(const Statevector& state, const std::vector<std::size_t>& region,
                              double qubit_cap = 12.0);

// Squared Schmidt coefficients of the bipartition region | complement.
std::vector<double> schmidt_probabilities(const Statevector& state, const std::vector<std::size_t>& region);

// Renyi entropy in bits of a probability vector; k = 1 is Shannon.
double renyi_entropy(const std::vector<double>& p, double k);
double shannon_entropy(const std::vector<double>& p);
double entanglement_entropy(const Statevector& state, const std::vector<std::size_t>& region, double k = 1.0);
double purity(const ComplexTensor& rho);

struct EntropyReport {
  double s_ab = 0.0;
  double s_bc = 0.0;
  double s_b = 0.0;
  double s_abc = 0.0;
  double cmi = 0.0;  // I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC), bits
};

EntropyReport exact_entropies(const OutputDistribution& dist, const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b, const std::vector<std::size_t>& c);

double total_variation(const std::vector<double>& p, const std::vector<double>& r);

}  // namespace shallow2d
