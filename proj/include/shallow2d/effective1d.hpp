// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "shallow2d/architecture.hpp"
#include "shallow2d/random.hpp"
#include "shallow2d/statevector.hpp"

namespace shallow2d {

// Two-outcome Kraus family {k0, k1} on one qubit.
struct KrausPair {
  RowMatrix k0;
  RowMatrix k1;
};

// Polar and azimuthal angle of cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct BlochAngles {
  double theta = 0.0;
  double phi = 0.0;
};

// M0 = diag(cos(theta/2), e^{-i phi} sin(theta/2)) and the outcome-1
// operator induced by the orthogonal projector,
// M1 = diag(sin(theta/2), -e^{-i phi} cos(theta/2)).
KrausPair chr_kraus(double theta, double phi);
// N(x) = diag(sqrt((1+x)/2), sqrt((1-x)/2)), paired as {N(x), N(-x)}.
RowMatrix weak_n(double x);
KrausPair weak_n_kraus(double x);
RowMatrix phase_gate(double phi);
// diag(cos(theta/2), sin(theta/2)) and diag(sin(theta/2), cos(theta/2)).
KrausPair toy_kraus(double theta);
// max |sum_k K_k^dagger K_k - I|.
double completeness_error(const KrausPair& kraus);

RowMatrix hadamard();
RowMatrix bloch_vector(BlochAngles a);  // 2 x 1 column
// Projector onto the Bloch state `a` (outcome 0) or its complement (outcome 1).
RowMatrix bloch_projector(BlochAngles a, int outcome);
// Angles of U^dagger|0>, the state a gate U followed by a computational
// measurement reports as outcome 0.
BlochAngles measurement_basis(const RowMatrix& u);

// Qubit chain state used by the effective dynamics. Starts in |+>^n.
class EffectiveChain {
 public:
  explicit EffectiveChain(std::size_t n);

  std::size_t size() const { return state_.n_sites; }
  const Statevector& state() const { return state_; }

  void cz_layer();
  void hadamard_layer();
  void apply(std::size_t site, const RowMatrix& gate);
  // Born-rule sample of {k0, k1} on `site`; renormalizes.
  int measure(std::size_t site, const KrausPair& kraus, RandomStream& rng);
  // Applies kraus.k{outcome}; returns the outcome probability and
  // renormalizes when it is positive.
  double project(std::size_t site, const KrausPair& kraus, int outcome);

  // Schmidt values across the bond after site n/2 - 1.
  std::vector<double> half_chain_schmidt() const;
  double half_chain_entropy(double k = 1.0) const;

 private:
  Statevector state_;
};

// One fixed-basis step: CZ layer, {M0, M1} per site, Hadamard layer.
std::vector<int> chr_effective_step_fixed(EffectiveChain& chain, const std::vector<BlochAngles>& bases,
                                          RandomStream& rng);
// One randomized step: CZ layer, {N(x), N(-x)} with x ~ U[-1, 1] then P(phi)
// with phi ~ U[0, 2 pi) per site, Hadamard layer.
std::vector<int> chr_effective_step_random(EffectiveChain& chain, RandomStream& rng);

// Per-column measurement bases of a CHR instance, indexed [column][row].
std::vector<std::vector<BlochAngles>> chr_bases(const CircuitInstance& instance);

// Joint probability of `outcomes` ([column][row]) under the fixed-basis
// chain dynamics: weak projections for the first columns, then a CZ layer
// and projective measurement of the last.
double chr_effective_probability(const std::vector<std::vector<BlochAngles>>& bases,
                                 const std::vector<std::vector<int>>& outcomes);
// Chain states after each column's measurement, conditioned on `outcomes`.
// Entry t is the state before step t + 2.
std::vector<Statevector> chr_effective_states(const std::vector<std::vector<BlochAngles>>& bases,
                                              const std::vector<std::vector<int>>& outcomes);
// Distribution over row-major lattice strings, by full enumeration.
OutputDistribution chr_effective_distribution(const CircuitInstance& instance, std::size_t cap_sites = 16);

struct TraceStep {
  int step = 0;
  std::vector<int> outcomes;   // per site, kept on request
  std::vector<double> schmidt;  // half-chain, non-increasing
  double tail_weight = 0.0;     // squared weight beyond the stored values
  double entropy = 0.0;         // half-chain von Neumann entropy, bits
};

struct DynamicsTrace {
  std::size_t n = 0;
  std::vector<TraceStep> steps;

  // Columns step, cut, index, lambda (1-based index).
  void write_csv(std::ostream& out) const;
};

// Randomized (or, with haar_bases, fixed Haar-random basis) chain dynamics
// on n qubits, recording every step.
DynamicsTrace chr_chain_dynamics(std::size_t n, int steps, RandomStream& rng, bool haar_bases = false,
                                 bool keep_spectra = false);

struct ToyModelOptions {
  std::size_t max_spectrum = std::size_t{1} << 14;
  int record_stride = 0;  // 0 records only the final step
  bool keep_outcomes = false;
};

// EPR-pair toy dynamics on an even chain. Every qubit pair straddling the
// central cut stays in the form |00> + c|11>, so the state is held as one
// log ratio ln c per pair; the half-chain spectrum is the product of the
// pair spectra.
DynamicsTrace toy_model_run(std::size_t n, double theta, int steps, RandomStream& rng,
                            const ToyModelOptions& options = {});

std::vector<DynamicsTrace> toy_model_ensemble(std::size_t n, double theta, int steps, std::size_t trajectories,
                                              std::uint64_t seed, int workers = 1,
                                              const ToyModelOptions& options = {});

// Largest `count` Schmidt values of a product of two-term pairs. Entry k
// of `deficits` is ln(minor / major) <= 0 of pair k's squared values;
// pairs at -inf are product states and contribute nothing.
std::vector<double> pair_product_spectrum(const std::vector<double>& deficits, std::size_t count);

enum class SpectrumModel {
  log_squared,  // ln lambda_i against ln^2 i
  power_law,    // ln lambda_i against ln i
  loglog,       // ln(-ln lambda_i) against ln ln i
};

struct SpectrumFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least squares over 1-based indices i >= i_min whose value exceeds `floor`.
SpectrumFit spectrum_fit(const std::vector<double>& spectrum, std::size_t i_min,
                         SpectrumModel model = SpectrumModel::log_squared, double floor = 1e-300);
// ceil(exp(sqrt(ln n))).
std::size_t default_i_star(std::size_t n);

// Smallest rank whose discarded squared weight is <= eps.
std::size_t minimal_rank(const std::vector<double>& schmidt, double tail_weight, double eps);

struct RankRow {
  double eps = 0.0;
  double delta = 0.0;
  std::size_t rank = 0;
};

// (1 - delta)-quantile over the final step of each trace.
std::vector<RankRow> rank_epsilon_tradeoff(const std::vector<DynamicsTrace>& traces, const std::vector<double>& eps,
                                           double delta);

// Expected S(A) in bits after measuring the contiguous block of `block`
// sites centred on the chain, averaged exactly over outcomes. A is the
// part of the chain to the left of the block.
double measured_block_entropy(const CircuitInstance& chain, std::size_t block);

struct BlockEntropyRow {
  std::size_t block = 0;
  double mean_entropy = 0.0;
  double stderr_entropy = 0.0;
  std::size_t instances = 0;
};

// Depth-2 brick chains of n qubits.
std::vector<BlockEntropyRow> block_entropy_scan(std::size_t n, const std::vector<std::size_t>& blocks,
                                                std::size_t instances, std::uint64_t seed, int workers = 1);

}  // namespace shallow2d
