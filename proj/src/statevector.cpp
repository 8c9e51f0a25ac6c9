// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/statevector.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "shallow2d/errors.hpp"

namespace shallow2d {

namespace {

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

void check_cap(std::size_t n_sites, int q, double cap) {
  const double bits = static_cast<double>(n_sites) * std::log2(static_cast<double>(q));
  if (bits > cap + 1e-9)
    throw ResourceCapExceeded("oracle: " + std::to_string(n_sites) + " sites of dimension " + std::to_string(q) +
                              " exceed the cap of " + std::to_string(cap) + " qubits");
}

}  // namespace

Statevector Statevector::zero_state(std::size_t n_sites, int local_dim, double qubit_cap) {
  require(local_dim >= 2, "statevector: local dimension must be at least 2");
  check_cap(n_sites, local_dim, qubit_cap);
  Statevector s{n_sites, local_dim, std::vector<cplx>(int_pow(static_cast<std::size_t>(local_dim), n_sites))};
  s.amplitudes[0] = 1.0;
  return s;
}

double Statevector::norm() const {
  double acc = 0.0;
  for (const cplx& a : amplitudes) acc += std::norm(a);
  return std::sqrt(acc);
}

std::size_t outcome_index(const Outcome& x, int q) {
  std::size_t idx = 0;
  for (int v : x) {
    require(v >= 0 && v < q, "outcome digit out of range");
    idx = idx * static_cast<std::size_t>(q) + static_cast<std::size_t>(v);
  }
  return idx;
}

Outcome outcome_from_index(std::size_t index, std::size_t n_sites, int q) {
  Outcome x(n_sites);
  for (std::size_t s = n_sites; s-- > 0;) {
    x[s] = static_cast<int>(index % static_cast<std::size_t>(q));
    index /= static_cast<std::size_t>(q);
  }
  return x;
}

double OutputDistribution::probability(const Outcome& x) const {
  require(x.size() == n_sites, "outcome length mismatch");
  return probabilities[outcome_index(x, local_dim)];
}

OutputDistribution OutputDistribution::marginal(const std::vector<std::size_t>& sites) const {
  const std::size_t q = static_cast<std::size_t>(local_dim);
  std::vector<std::size_t> weight(n_sites, 0);
  std::vector<bool> used(n_sites, false);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    require(sites[k] < n_sites && !used[sites[k]], "marginal: invalid site list");
    used[sites[k]] = true;
    weight[sites[k]] = int_pow(q, sites.size() - 1 - k);
  }
  OutputDistribution out{sites.size(), local_dim, std::vector<double>(int_pow(q, sites.size()), 0.0)};
  std::vector<std::size_t> digits(n_sites, 0);
  std::size_t target = 0;
  for (std::size_t idx = 0; idx < probabilities.size(); ++idx) {
    out.probabilities[target] += probabilities[idx];
    // Increment the odometer over all sites, updating the marginal index.
    for (std::size_t s = n_sites; s-- > 0;) {
      target += weight[s];
      if (++digits[s] < q) break;
      target -= weight[s] * q;
      digits[s] = 0;
    }
  }
  return out;
}

void apply_gate(Statevector& state, const std::vector<std::size_t>& sites, const RowMatrix& gate) {
  const std::size_t q = static_cast<std::size_t>(state.local_dim);
  const std::size_t k = sites.size();
  const std::size_t block = int_pow(q, k);
  require(static_cast<std::size_t>(gate.rows()) == block && static_cast<std::size_t>(gate.cols()) == block,
          "apply_gate: gate dimension mismatch");
  std::vector<std::size_t> stride(k);
  for (std::size_t j = 0; j < k; ++j) {
    require(sites[j] < state.n_sites, "apply_gate: site out of range");
    for (std::size_t i = 0; i < j; ++i) require(sites[i] != sites[j], "apply_gate: repeated site");
    stride[j] = int_pow(q, state.n_sites - 1 - sites[j]);
  }
  // Offsets of the q^k sub-block entries relative to a base index.
  std::vector<std::size_t> offset(block, 0);
  for (std::size_t b = 0; b < block; ++b) {
    std::size_t rem = b;
    for (std::size_t j = k; j-- > 0;) {
      offset[b] += (rem % q) * stride[j];
      rem /= q;
    }
  }
  Eigen::VectorXcd in(static_cast<Eigen::Index>(block)), out(static_cast<Eigen::Index>(block));
  const std::size_t total = state.amplitudes.size();
  for (std::size_t base = 0; base < total; ++base) {
    bool is_base = true;
    for (std::size_t j = 0; j < k && is_base; ++j) is_base = (base / stride[j]) % q == 0;
    if (!is_base) continue;
    for (std::size_t b = 0; b < block; ++b) in(static_cast<Eigen::Index>(b)) = state.amplitudes[base + offset[b]];
    out.noalias() = gate * in;
    for (std::size_t b = 0; b < block; ++b) state.amplitudes[base + offset[b]] = out(static_cast<Eigen::Index>(b));
  }
}

Statevector simulate_exact(const CircuitInstance& instance, double qubit_cap) {
  const CircuitLayout& layout = instance.layout;
  require(instance.gates.size() == layout.events.size(), "simulate_exact: gate count does not match the layout");
  Statevector state = Statevector::zero_state(layout.n_sites(), layout.q, qubit_cap);
  for (std::size_t e = 0; e < layout.events.size(); ++e) {
    std::vector<std::size_t> sites;
    for (const Site& s : layout.events[e].sites) sites.push_back(layout.site_index(s));
    apply_gate(state, sites, instance.gates[e]);
  }
  const double nrm = state.norm();
  for (cplx& a : state.amplitudes) a /= nrm;
  return state;
}

OutputDistribution output_distribution(const Statevector& state) {
  OutputDistribution d{state.n_sites, state.local_dim, std::vector<double>(state.amplitudes.size())};
  for (std::size_t i = 0; i < d.probabilities.size(); ++i) d.probabilities[i] = std::norm(state.amplitudes[i]);
  return d;
}

OutputDistribution exact_distribution(const CircuitInstance& instance, double qubit_cap) {
  return output_distribution(simulate_exact(instance, qubit_cap));
}

double project_sites(Statevector& state, const std::vector<std::size_t>& sites, const std::vector<int>& outcomes) {
  require(sites.size() == outcomes.size(), "project_sites: length mismatch");
  const std::size_t q = static_cast<std::size_t>(state.local_dim);
  std::vector<std::size_t> stride(sites.size());
  for (std::size_t j = 0; j < sites.size(); ++j) {
    require(sites[j] < state.n_sites, "project_sites: site out of range");
    require(outcomes[j] >= 0 && outcomes[j] < state.local_dim, "project_sites: outcome out of range");
    stride[j] = int_pow(q, state.n_sites - 1 - sites[j]);
  }
  double kept = 0.0;
  for (std::size_t idx = 0; idx < state.amplitudes.size(); ++idx) {
    bool match = true;
    for (std::size_t j = 0; j < sites.size() && match; ++j)
      match = (idx / stride[j]) % q == static_cast<std::size_t>(outcomes[j]);
    if (match)
      kept += std::norm(state.amplitudes[idx]);
    else
      state.amplitudes[idx] = 0.0;
  }
  if (kept > 0.0) {
    const double scale = 1.0 / std::sqrt(kept);
    for (cplx& a : state.amplitudes) a *= scale;
  }
  return kept;
}

namespace {

// Amplitudes as a matrix with `region` (listed order) as the row index.
RowMatrix split_matrix(const Statevector& state, const std::vector<std::size_t>& region) {
  const std::size_t n = state.n_sites;
  const std::size_t q = static_cast<std::size_t>(state.local_dim);
  std::vector<bool> in_region(n, false);
  std::vector<std::size_t> perm;
  for (std::size_t s : region) {
    require(s < n && !in_region[s], "region: invalid site list");
    in_region[s] = true;
    perm.push_back(s);
  }
  for (std::size_t s = 0; s < n; ++s)
    if (!in_region[s]) perm.push_back(s);
  ComplexTensor t(Shape(n, q), state.amplitudes);
  const std::size_t rows = int_pow(q, region.size());
  return t.permuted(perm).as_matrix(region.size()).reshaped<Eigen::RowMajor>(static_cast<Eigen::Index>(rows),
                                                                               static_cast<Eigen::Index>(state.amplitudes.size() / rows));
}

}  // namespace

ComplexTensor reduced_density(const Statevector& state, const std::vector<std::size_t>& region, double qubit_cap) {
  check_cap(region.size(), state.local_dim, qubit_cap);
  const RowMatrix m = split_matrix(state, region);
  const RowMatrix rho = m * m.adjoint();
  return ComplexTensor::from_matrix(rho);
}

std::vector<double> schmidt_probabilities(const Statevector& state, const std::vector<std::size_t>& region) {
  const RowMatrix m = split_matrix(state, region);
  Eigen::MatrixXcd work = m;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(work);
  if (svd.info() != Eigen::Success) throw NumericalFailure("schmidt_probabilities: SVD did not converge");
  std::vector<double> p;
  double total = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    p.push_back(s * s);
    total += s * s;
  }
  for (double& x : p) x /= total;
  return p;
}

double renyi_entropy(const std::vector<double>& p, double k) {
  require(k >= 0.0, "renyi_entropy: order must be non-negative");
  if (std::abs(k - 1.0) < 1e-12) return shannon_entropy(p);
  if (k == 0.0) {
    std::size_t support = 0;
    for (double x : p) support += x > 0.0 ? 1 : 0;
    return support ? std::log2(static_cast<double>(support)) : 0.0;
  }
  double acc = 0.0;
  for (double x : p)
    if (x > 0.0) acc += std::pow(x, k);
  return std::log2(acc) / (1.0 - k);
}

double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

double entanglement_entropy(const Statevector& state, const std::vector<std::size_t>& region, double k) {
  return renyi_entropy(schmidt_probabilities(state, region), k);
}

double purity(const ComplexTensor& rho) {
  const RowMatrix m = rho.as_matrix(1);
  return (m * m).trace().real();
}

EntropyReport exact_entropies(const OutputDistribution& dist, const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b, const std::vector<std::size_t>& c) {
  std::vector<bool> used(dist.n_sites, false);
  for (const auto* part : {&a, &b, &c})
    for (std::size_t s : *part) {
      require(s < dist.n_sites && !used[s], "exact_entropies: regions must be disjoint");
      used[s] = true;
    }
  auto joined = [](std::initializer_list<const std::vector<std::size_t>*> parts) {
    std::vector<std::size_t> out;
    for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
    return out;
  };
  auto h = [&](const std::vector<std::size_t>& region) {
    return region.empty() ? 0.0 : shannon_entropy(dist.marginal(region).probabilities);
  };
  EntropyReport r;
  r.s_ab = h(joined({&a, &b}));
  r.s_bc = h(joined({&b, &c}));
  r.s_b = h(b);
  r.s_abc = h(joined({&a, &b, &c}));
  r.cmi = r.s_ab + r.s_bc - r.s_b - r.s_abc;
  return r;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& r) {
  require(p.size() == r.size(), "total_variation: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - r[i]);
  return 0.5 * acc;
}

}  // namespace shallow2d
