// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "shallow2d/detail/parallel.hpp"
#include "shallow2d/errors.hpp"
#include "shallow2d/random.hpp"
#include "shallow2d/statevector.hpp"
#include "shallow2d/statmech.hpp"

namespace shallow2d {

namespace {

std::vector<std::size_t> site_indices(const CircuitLayout& layout, const std::vector<Site>& sites) {
  std::vector<std::size_t> out;
  for (const Site& s : sites) out.push_back(layout.site_index(s));
  return out;
}

struct MeanError {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

MeanError mean_error(const std::vector<double>& xs) {
  MeanError out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stderr_mean = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return out;
}

}  // namespace

CircuitAverage circuit_average_z2(const CircuitLayout& layout, const SpinBoundary& boundary, std::size_t instances,
                                  std::uint64_t seed, int workers) {
  require(instances > 0, "circuit_average_z2: need at least one instance");
  const std::vector<std::size_t> b = site_indices(layout, boundary.measured);
  const std::vector<std::size_t> a = site_indices(layout, boundary.twisted);
  require(static_cast<double>(b.size()) * std::log2(layout.q) <= 16.0,
          "circuit_average_z2: too many measured sites to enumerate");
  const std::size_t n_outcomes = static_cast<std::size_t>(std::llround(std::pow(layout.q, b.size())));

  using Pair = std::pair<double, double>;
  const std::vector<Pair> per = parallel_map<Pair>(instances, workers, [&](std::size_t i) {
    const Statevector state = simulate_exact(make_instance(layout, derive_seed(seed, i)));
    double z0 = 0.0, za = 0.0;
    for (std::size_t m = 0; m < n_outcomes; ++m) {
      Statevector post = state;
      const double p = project_sites(post, b, outcome_from_index(m, b.size(), layout.q));
      if (p <= 0.0) continue;
      z0 += p * p;
      double inner = 1.0;
      if (!a.empty() && boundary.dephased) {
        inner = 0.0;
        for (double r : output_distribution(post).marginal(a).probabilities) inner += r * r;
      } else if (!a.empty()) {
        inner = purity(reduced_density(post, a));
      }
      za += p * p * inner;
    }
    return Pair{z0, za};
  });
  std::vector<double> z0s, zas;
  for (const auto& [z0, za] : per) {
    z0s.push_back(z0);
    zas.push_back(za);
  }
  const MeanError e0 = mean_error(z0s), ea = mean_error(zas);
  return {e0.mean, e0.stderr_mean, ea.mean, ea.stderr_mean, instances};
}

namespace {

// Metropolis chain over the outgoing spins of a decimated model.
class Chain {
 public:
  Chain(const DecimatedModel& model, std::uint64_t seed) : model_(model), rng_(seed), spins_(model.n_spins, 0) {
    touching_.resize(model.n_spins);
    for (std::size_t f = 0; f < model.factors.size(); ++f)
      for (std::size_t s : model.factors[f].spins) touching_[s].push_back(f);
    // The all-identity configuration has positive weight.
    for (std::size_t s = 0; s < model.n_spins; ++s)
      if (local_weight(s) <= 0.0) throw NumericalFailure("quasi_entropy_mc: starting configuration has zero weight");
  }

  void sweep() {
    for (std::size_t s = 0; s < spins_.size(); ++s) {
      const double before = local_weight(s);
      spins_[s] ^= 1;
      const double after = local_weight(s);
      if (after < before && rng_.uniform() * before >= after) spins_[s] ^= 1;
    }
  }

  int spin(std::size_t s) const { return spins_[s]; }

 private:
  double factor_value(std::size_t f) const {
    const SpinFactor& factor = model_.factors[f];
    std::size_t idx = 0;
    for (std::size_t s : factor.spins) idx = (idx << 1) | spins_[s];
    return factor.table[idx];
  }

  double local_weight(std::size_t s) const {
    double w = 1.0;
    for (std::size_t f : touching_[s]) w *= factor_value(f);
    return w;
  }

  const DecimatedModel& model_;
  RandomStream rng_;
  std::vector<std::uint8_t> spins_;
  std::vector<std::vector<std::size_t>> touching_;
};

// Gelman-Rubin statistic over the halves of every chain.
double split_r_hat(const std::vector<std::vector<double>>& traces) {
  std::vector<std::vector<double>> halves;
  for (const auto& t : traces) {
    const std::size_t h = t.size() / 2;
    halves.emplace_back(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(h));
    halves.emplace_back(t.begin() + static_cast<std::ptrdiff_t>(h), t.begin() + static_cast<std::ptrdiff_t>(2 * h));
  }
  const double n = static_cast<double>(halves.front().size());
  if (n < 2) return 1.0;
  std::vector<double> means;
  double w = 0.0;
  for (const auto& seq : halves) {
    const MeanError me = mean_error(seq);
    means.push_back(me.mean);
    w += me.stderr_mean * me.stderr_mean * n;
  }
  w /= static_cast<double>(halves.size());
  const MeanError between = mean_error(means);
  const double b_over_n = between.stderr_mean * between.stderr_mean * static_cast<double>(means.size());
  if (w <= 0.0) return b_over_n > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return std::sqrt(((n - 1.0) / n * w + b_over_n) / w);
}

}  // namespace

QuasiEntropyEstimate quasi_entropy_mc(const CircuitLayout& layout, const SpinBoundary& boundary,
                                      const McOptions& options) {
  require(options.chains >= 2, "quasi_entropy_mc: need at least two chains");
  require(options.batches >= 2 && options.sweeps >= options.batches, "quasi_entropy_mc: too few sweeps per batch");
  QuasiEntropyEstimate out;
  out.exact = false;
  if (boundary.twisted.empty()) return out;

  const DecimatedModel twisted_model = decimate(build_spin_model(layout, boundary), layout);
  double variance = 0.0;
  for (std::size_t k = 0; k < boundary.twisted.size(); ++k) {
    // Stage k: the first k sites of A are twisted, the ratio twists one more.
    SpinBoundary stage = boundary;
    stage.twisted.resize(k);
    const DecimatedModel model = decimate(build_spin_model(layout, stage), layout);
    const std::size_t qudit = layout.site_index(boundary.twisted[k]);
    const std::ptrdiff_t f_cur = model.terminal_factor[qudit], f_new = twisted_model.terminal_factor[qudit];
    if (f_cur < 0) continue;  // an untouched |0> qudit has unit purity
    const SpinFactor& cur = model.factors[static_cast<std::size_t>(f_cur)];
    const SpinFactor& nxt = twisted_model.factors[static_cast<std::size_t>(f_new)];
    const std::size_t spin = cur.spins.at(0);
    const double r[2] = {nxt.table[0] / cur.table[0], nxt.table[1] / cur.table[1]};

    const std::uint64_t stage_seed = derive_seed(options.seed, k);
    const auto traces = parallel_map<std::vector<double>>(options.chains, options.workers, [&](std::size_t c) {
      Chain chain(model, derive_seed(stage_seed, c));
      for (std::size_t s = 0; s < options.burn_in; ++s) chain.sweep();
      std::vector<double> trace;
      trace.reserve(options.sweeps);
      for (std::size_t s = 0; s < options.sweeps; ++s) {
        chain.sweep();
        trace.push_back(r[chain.spin(spin)]);
      }
      return trace;
    });

    std::vector<double> batch_means;
    const std::size_t per_batch = options.sweeps / options.batches;
    for (const auto& t : traces)
      for (std::size_t b = 0; b < options.batches; ++b) {
        double sum = 0.0;
        for (std::size_t s = b * per_batch; s < (b + 1) * per_batch; ++s) sum += t[s];
        batch_means.push_back(sum / static_cast<double>(per_batch));
      }
    const MeanError ratio = mean_error(batch_means);
    if (!(ratio.mean > 0.0)) throw NumericalFailure("quasi_entropy_mc: stage ratio is not positive");
    out.s2 -= std::log2(ratio.mean);
    const double rel = ratio.stderr_mean / (ratio.mean * std::numbers::ln2);
    variance += rel * rel;
    out.max_r_hat = std::max(out.max_r_hat, split_r_hat(traces));
  }
  out.stderr_s2 = std::sqrt(variance);
  out.converged = out.max_r_hat < options.r_hat_limit;
  return out;
}

std::vector<QuasiEntropyRow> quasi_entropy_scan(const QuasiEntropyScanConfig& config) {
  require(config.width_offset >= 0, "quasi_entropy_scan: width_offset must be non-negative");
  std::vector<QuasiEntropyRow> rows;
  for (int size : config.sizes) {
    require(size >= 2, "quasi_entropy_scan: sizes must be at least 2");
    const int width = size + config.width_offset;
    const CircuitLayout layout = family_layout(config.spec, size, width);
    SpinBoundary boundary;
    boundary.dephased = config.dephased;
    for (int r = 0; r < size; ++r)
      for (int c = 0; c + 1 < width; ++c) boundary.measured.push_back({r, c});
    for (int r = 0; r < size / 2; ++r) boundary.twisted.push_back({r, width - 1});

    QuasiEntropyRow row{size, {}};
    try {
      row.estimate.s2 = quasi_entropy_exact(layout, boundary, config.exact_spin_cap);
      row.estimate.exact = true;
    } catch (const ResourceCapExceeded&) {
      McOptions mc = config.mc;
      mc.seed = derive_seed(config.mc.seed, static_cast<std::uint64_t>(size));
      row.estimate = quasi_entropy_mc(layout, boundary, mc);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_quasi_entropy_csv(std::ostream& out, const std::vector<QuasiEntropyRow>& rows) {
  out << "size,s2,stderr_s2,max_r_hat,converged,exact\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.size << ',' << r.estimate.s2 << ',' << r.estimate.stderr_s2 << ',' << r.estimate.max_r_hat << ','
        << (r.estimate.converged ? 1 : 0) << ',' << (r.estimate.exact ? 1 : 0) << '\n';
}

}  // namespace shallow2d
