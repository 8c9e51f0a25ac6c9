// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/effective1d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "shallow2d/detail/parallel.hpp"
#include "shallow2d/errors.hpp"

namespace shallow2d {

namespace {

RowMatrix diag2(cplx a, cplx b) {
  RowMatrix m = RowMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

KrausPair chr_kraus(double theta, double phi) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  const cplx w = std::polar(1.0, -phi);
  return {diag2(c, w * s), diag2(s, -w * c)};
}

RowMatrix weak_n(double x) {
  require(x >= -1.0 && x <= 1.0, "weak_n: x must lie in [-1, 1]");
  return diag2(std::sqrt((1.0 + x) / 2.0), std::sqrt((1.0 - x) / 2.0));
}

KrausPair weak_n_kraus(double x) { return {weak_n(x), weak_n(-x)}; }

RowMatrix phase_gate(double phi) { return diag2(1.0, std::polar(1.0, phi)); }

KrausPair toy_kraus(double theta) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  return {diag2(c, s), diag2(s, c)};
}

double completeness_error(const KrausPair& kraus) {
  const RowMatrix sum = kraus.k0.adjoint() * kraus.k0 + kraus.k1.adjoint() * kraus.k1;
  return (sum - RowMatrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
}

RowMatrix hadamard() { return fixed_gate(GateKind::hadamard_like_fixed, 2); }

RowMatrix bloch_vector(BlochAngles a) {
  RowMatrix v(2, 1);
  v(0, 0) = std::cos(a.theta / 2.0);
  v(1, 0) = std::polar(std::sin(a.theta / 2.0), a.phi);
  return v;
}

RowMatrix bloch_projector(BlochAngles a, int outcome) {
  require(outcome == 0 || outcome == 1, "bloch_projector: outcome must be 0 or 1");
  const RowMatrix v = bloch_vector(a);
  const RowMatrix p0 = v * v.adjoint();
  return outcome == 0 ? p0 : RowMatrix(RowMatrix::Identity(2, 2) - p0);
}

BlochAngles measurement_basis(const RowMatrix& u) {
  require(u.rows() == 2 && u.cols() == 2, "measurement_basis: expected a single-qubit gate");
  const cplx v0 = std::conj(u(0, 0)), v1 = std::conj(u(0, 1));
  BlochAngles a;
  a.theta = 2.0 * std::atan2(std::abs(v1), std::abs(v0));
  // The azimuth is a global phase when the state is |1>.
  a.phi = std::abs(v0) > 0.0 ? std::arg(v1) - std::arg(v0) : 0.0;
  if (a.phi < 0.0) a.phi += 2.0 * std::numbers::pi;
  return a;
}

EffectiveChain::EffectiveChain(std::size_t n) : state_(Statevector::zero_state(n, 2)) {
  require(n >= 1, "EffectiveChain: empty chain");
  const cplx amp = 1.0 / std::sqrt(static_cast<double>(state_.amplitudes.size()));
  std::fill(state_.amplitudes.begin(), state_.amplitudes.end(), amp);
}

void EffectiveChain::cz_layer() {
  // Sites s and s + 1 are adjacent bits, so idx & (idx >> 1) marks the
  // neighbouring pairs that are both 1.
  for (std::size_t idx = 0; idx < state_.amplitudes.size(); ++idx)
    if (std::popcount(idx & (idx >> 1)) % 2 == 1) state_.amplitudes[idx] = -state_.amplitudes[idx];
}

void EffectiveChain::hadamard_layer() {
  const RowMatrix h = hadamard();
  for (std::size_t s = 0; s < size(); ++s) apply_gate(state_, {s}, h);
}

void EffectiveChain::apply(std::size_t site, const RowMatrix& gate) { apply_gate(state_, {site}, gate); }

double EffectiveChain::project(std::size_t site, const KrausPair& kraus, int outcome) {
  require(outcome == 0 || outcome == 1, "EffectiveChain::project: outcome must be 0 or 1");
  apply_gate(state_, {site}, outcome == 0 ? kraus.k0 : kraus.k1);
  const double p = std::pow(state_.norm(), 2);
  if (p > 0.0) {
    const double scale = 1.0 / std::sqrt(p);
    for (cplx& a : state_.amplitudes) a *= scale;
  }
  return p;
}

int EffectiveChain::measure(std::size_t site, const KrausPair& kraus, RandomStream& rng) {
  Statevector trial = state_;
  apply_gate(trial, {site}, kraus.k0);
  const double p0 = std::pow(trial.norm(), 2);
  const int outcome = rng.uniform() < p0 ? 0 : 1;
  if (project(site, kraus, outcome) <= 0.0) throw NumericalFailure("EffectiveChain::measure: state lost all weight");
  return outcome;
}

std::vector<double> EffectiveChain::half_chain_schmidt() const {
  require(size() >= 2, "EffectiveChain: half-chain cut needs two sites");
  std::vector<std::size_t> left(size() / 2);
  for (std::size_t s = 0; s < left.size(); ++s) left[s] = s;
  std::vector<double> p = schmidt_probabilities(state_, left);
  std::sort(p.begin(), p.end(), std::greater<>());
  for (double& x : p) x = std::sqrt(std::max(x, 0.0));
  return p;
}

double EffectiveChain::half_chain_entropy(double k) const {
  std::vector<double> p = half_chain_schmidt();
  for (double& x : p) x *= x;
  return renyi_entropy(p, k);
}

std::vector<int> chr_effective_step_fixed(EffectiveChain& chain, const std::vector<BlochAngles>& bases,
                                          RandomStream& rng) {
  require(bases.size() == chain.size(), "chr_effective_step_fixed: one basis per site is required");
  chain.cz_layer();
  std::vector<int> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i)
    out[i] = chain.measure(i, chr_kraus(bases[i].theta, bases[i].phi), rng);
  chain.hadamard_layer();
  return out;
}

std::vector<int> chr_effective_step_random(EffectiveChain& chain, RandomStream& rng) {
  chain.cz_layer();
  std::vector<int> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const double x = 2.0 * rng.uniform() - 1.0;
    out[i] = chain.measure(i, weak_n_kraus(x), rng);
    chain.apply(i, phase_gate(2.0 * std::numbers::pi * rng.uniform()));
  }
  chain.hadamard_layer();
  return out;
}

std::vector<std::vector<BlochAngles>> chr_bases(const CircuitInstance& instance) {
  const CircuitLayout& layout = instance.layout;
  require(layout.family == "chr" && layout.q == 2, "chr_bases: expected a qubit CHR instance");
  std::vector<std::vector<BlochAngles>> bases(static_cast<std::size_t>(layout.cols),
                                              std::vector<BlochAngles>(static_cast<std::size_t>(layout.rows)));
  std::vector<int> seen(layout.n_sites(), 0);
  for (std::size_t g = 0; g < layout.events.size(); ++g) {
    const GateEvent& e = layout.events[g];
    if (e.kind != GateKind::haar_one_site) continue;
    const Site s = e.sites[0];
    bases[static_cast<std::size_t>(s.col)][static_cast<std::size_t>(s.row)] = measurement_basis(instance.gates[g]);
    ++seen[static_cast<std::size_t>(s.row * layout.cols + s.col)];
  }
  require(std::all_of(seen.begin(), seen.end(), [](int k) { return k == 1; }),
          "chr_bases: every site needs exactly one measurement gate");
  return bases;
}

namespace {

// Runs the fixed-basis chain conditioned on `outcomes`; stops at the first
// zero-probability outcome. `states`, when given, receives the chain state
// after each weak-measurement column.
double run_conditioned(const std::vector<std::vector<BlochAngles>>& bases,
                       const std::vector<std::vector<int>>& outcomes, std::vector<Statevector>* states) {
  require(!bases.empty() && bases.size() == outcomes.size(), "chr_effective: bases and outcomes disagree in columns");
  const std::size_t rows = bases[0].size();
  for (std::size_t t = 0; t < bases.size(); ++t)
    require(bases[t].size() == rows && outcomes[t].size() == rows, "chr_effective: ragged column");
  EffectiveChain chain(rows);
  double p = 1.0;
  for (std::size_t t = 0; t + 1 < bases.size(); ++t) {
    chain.cz_layer();
    for (std::size_t i = 0; i < rows; ++i) {
      p *= chain.project(i, chr_kraus(bases[t][i].theta, bases[t][i].phi), outcomes[t][i]);
      if (p == 0.0) return 0.0;
    }
    chain.hadamard_layer();
    if (states) states->push_back(chain.state());
  }
  chain.cz_layer();
  const std::size_t last = bases.size() - 1;
  for (std::size_t i = 0; i < rows; ++i) {
    const RowMatrix proj = bloch_projector(bases[last][i], outcomes[last][i]);
    p *= chain.project(i, {proj, proj}, 0);
    if (p == 0.0) return 0.0;
  }
  return p;
}

}  // namespace

double chr_effective_probability(const std::vector<std::vector<BlochAngles>>& bases,
                                 const std::vector<std::vector<int>>& outcomes) {
  return run_conditioned(bases, outcomes, nullptr);
}

std::vector<Statevector> chr_effective_states(const std::vector<std::vector<BlochAngles>>& bases,
                                              const std::vector<std::vector<int>>& outcomes) {
  std::vector<Statevector> states;
  if (run_conditioned(bases, outcomes, &states) == 0.0)
    throw InvalidArgument("chr_effective_states: outcome string has probability zero");
  return states;
}

OutputDistribution chr_effective_distribution(const CircuitInstance& instance, std::size_t cap_sites) {
  const auto bases = chr_bases(instance);
  const std::size_t rows = static_cast<std::size_t>(instance.layout.rows);
  const std::size_t cols = static_cast<std::size_t>(instance.layout.cols);
  const std::size_t n = rows * cols;
  if (n > cap_sites) throw ResourceCapExceeded("chr_effective_distribution: lattice exceeds the enumeration cap");
  OutputDistribution dist{n, 2, std::vector<double>(std::size_t{1} << n)};
  std::vector<std::vector<int>> grid(cols, std::vector<int>(rows));
  for (std::size_t idx = 0; idx < dist.probabilities.size(); ++idx) {
    const Outcome x = outcome_from_index(idx, n, 2);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) grid[c][r] = x[r * cols + c];
    dist.probabilities[idx] = run_conditioned(bases, grid, nullptr);
  }
  return dist;
}

DynamicsTrace chr_chain_dynamics(std::size_t n, int steps, RandomStream& rng, bool haar_bases, bool keep_spectra) {
  require(n >= 2 && steps >= 0, "chr_chain_dynamics: need n >= 2 and steps >= 0");
  EffectiveChain chain(n);
  DynamicsTrace trace{n, {}};
  for (int t = 1; t <= steps; ++t) {
    TraceStep step;
    step.step = t;
    if (haar_bases) {
      std::vector<BlochAngles> bases(n);
      for (BlochAngles& b : bases) b = measurement_basis(haar_matrix(2, rng));
      step.outcomes = chr_effective_step_fixed(chain, bases, rng);
    } else {
      step.outcomes = chr_effective_step_random(chain, rng);
    }
    std::vector<double> schmidt = chain.half_chain_schmidt();
    std::vector<double> p(schmidt.size());
    std::transform(schmidt.begin(), schmidt.end(), p.begin(), [](double x) { return x * x; });
    step.entropy = renyi_entropy(p, 1.0);
    if (keep_spectra) step.schmidt = std::move(schmidt);
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

double measured_block_entropy(const CircuitInstance& chain, std::size_t block) {
  const CircuitLayout& layout = chain.layout;
  require(layout.rows == 1 && layout.q == 2, "measured_block_entropy: expected a qubit chain");
  const std::size_t n = static_cast<std::size_t>(layout.cols);
  require(block >= 1 && block + 2 <= n, "measured_block_entropy: block must leave sites on both sides");
  const std::size_t start = (n - block) / 2;
  std::vector<std::size_t> b_sites(block), a_sites(start);
  for (std::size_t k = 0; k < block; ++k) b_sites[k] = start + k;
  for (std::size_t k = 0; k < start; ++k) a_sites[k] = k;
  const Statevector psi = simulate_exact(chain);
  double expected = 0.0;
  for (std::size_t idx = 0; idx < (std::size_t{1} << block); ++idx) {
    Statevector post = psi;
    const Outcome b = outcome_from_index(idx, block, 2);
    const double p = project_sites(post, b_sites, b);
    if (p > 0.0) expected += p * entanglement_entropy(post, a_sites);
  }
  return expected;
}

std::vector<BlockEntropyRow> block_entropy_scan(std::size_t n, const std::vector<std::size_t>& blocks,
                                                std::size_t instances, std::uint64_t seed, int workers) {
  require(instances >= 1, "block_entropy_scan: need at least one instance");
  const CircuitLayout layout = brick_chain_layout(static_cast<int>(n));
  const auto per_instance = parallel_map<std::vector<double>>(instances, workers, [&](std::size_t i) {
    const CircuitInstance inst = make_instance(layout, derive_seed(seed, i));
    std::vector<double> s(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) s[k] = measured_block_entropy(inst, blocks[k]);
    return s;
  });
  std::vector<BlockEntropyRow> rows;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : per_instance) {
      sum += s[k];
      sum2 += s[k] * s[k];
    }
    const double m = static_cast<double>(instances);
    const double mean = sum / m;
    const double var = instances > 1 ? std::max(0.0, (sum2 - m * mean * mean) / (m - 1.0)) : 0.0;
    rows.push_back({blocks[k], mean, std::sqrt(var / m), instances});
  }
  return rows;
}

}  // namespace shallow2d
