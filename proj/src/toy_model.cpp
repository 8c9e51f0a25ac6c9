// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>

#include "shallow2d/detail/parallel.hpp"
#include "shallow2d/effective1d.hpp"
#include "shallow2d/errors.hpp"

namespace shallow2d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared weight of |00> in |00> + e^rho |11>, normalized.
double weight_00(double rho) { return 1.0 / (1.0 + std::exp(2.0 * rho)); }
double weight_11(double rho) { return 1.0 / (1.0 + std::exp(-2.0 * rho)); }

double binary_entropy_bits(double rho) {
  if (std::isinf(rho)) return 0.0;
  const double a = std::abs(rho);
  // p = major weight, 1 - p = e^{-2a} p.
  const double log_major = -std::log1p(std::exp(-2.0 * a));
  const double log_minor = log_major - 2.0 * a;
  return -(std::exp(log_major) * log_major + std::exp(log_minor) * log_minor) / std::log(2.0);
}

struct Partial {
  double sum;
  std::size_t last;
  bool operator<(const Partial& o) const { return sum < o.sum; }
};

}  // namespace

std::vector<double> pair_product_spectrum(const std::vector<double>& deficits, std::size_t count) {
  std::vector<double> d;
  double log_base = 0.0;
  for (double x : deficits) {
    require(x <= 0.0, "pair_product_spectrum: deficits must be <= 0");
    if (x == -kInf) continue;
    log_base -= std::log1p(std::exp(x));
    d.push_back(x);
  }
  std::sort(d.begin(), d.end(), std::greater<>());
  std::vector<double> out;
  if (count == 0) return out;
  out.push_back(std::exp(log_base / 2.0));
  // Subsets in decreasing total deficit: each popped subset ending at index
  // i spawns "append i + 1" and "replace i by i + 1".
  std::priority_queue<Partial> heap;
  if (!d.empty()) heap.push({d[0], 0});
  while (out.size() < count && !heap.empty()) {
    const Partial top = heap.top();
    heap.pop();
    out.push_back(std::exp((log_base + top.sum) / 2.0));
    if (top.last + 1 < d.size()) {
      heap.push({top.sum + d[top.last + 1], top.last + 1});
      heap.push({top.sum - d[top.last] + d[top.last + 1], top.last + 1});
    }
  }
  return out;
}

DynamicsTrace toy_model_run(std::size_t n, double theta, int steps, RandomStream& rng, const ToyModelOptions& options) {
  require(n >= 2 && n % 2 == 0, "toy_model_run: chain length must be even");
  require(steps >= static_cast<int>(n / 2), "toy_model_run: need at least n/2 steps");
  require(theta >= 0.0 && theta <= std::numbers::pi, "toy_model_run: theta must lie in [0, pi]");
  const std::size_t half = n / 2;
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  // Diagonal entries (a0, a1) of M0 and M1; outcome k multiplies the pair
  // ratio by a1/a0.
  const double diag[2][2] = {{c, s}, {s, c}};
  const double shift[2] = {std::log(s) - std::log(c), std::log(c) - std::log(s)};
  // rho[d]: log ratio of the pair on sites (half-1-d, half+d); starts as |00>.
  std::vector<double> rho(half, -kInf);
  DynamicsTrace trace{n, {}};
  for (int t = 1; t <= steps; ++t) {
    // Fresh EPR pair on the central bond, then every pair moves one bond
    // outward and the outermost pair wraps back to the centre.
    rho[0] = 0.0;
    std::rotate(rho.rbegin(), rho.rbegin() + 1, rho.rend());
    const bool record = t == steps || (options.record_stride > 0 && t % options.record_stride == 0);
    TraceStep step;
    step.step = t;
    if (record && options.keep_outcomes) step.outcomes.assign(n, 0);
    for (std::size_t d = 0; d < half; ++d) {
      for (int side = 0; side < 2; ++side) {
        const double w0 = weight_00(rho[d]), w1 = weight_11(rho[d]);
        const double p0 = w0 * diag[0][0] * diag[0][0] + w1 * diag[0][1] * diag[0][1];
        const int k = rng.uniform() < p0 ? 0 : 1;
        if (!std::isinf(rho[d])) rho[d] += shift[k];
        if (!step.outcomes.empty()) step.outcomes[side == 0 ? half - 1 - d : half + d] = k;
      }
    }
    if (!record) continue;
    std::vector<double> deficits(half);
    for (std::size_t d = 0; d < half; ++d) {
      deficits[d] = std::isinf(rho[d]) ? -kInf : -2.0 * std::abs(rho[d]);
      step.entropy += binary_entropy_bits(rho[d]);
    }
    const std::size_t live = static_cast<std::size_t>(
        std::count_if(deficits.begin(), deficits.end(), [](double x) { return x != -kInf; }));
    const bool complete = live < 63 && (std::size_t{1} << live) <= options.max_spectrum;
    step.schmidt = pair_product_spectrum(deficits, options.max_spectrum);
    if (!complete) {
      double kept = 0.0;
      for (auto it = step.schmidt.rbegin(); it != step.schmidt.rend(); ++it) kept += *it * *it;
      step.tail_weight = std::max(0.0, 1.0 - kept);
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

std::vector<DynamicsTrace> toy_model_ensemble(std::size_t n, double theta, int steps, std::size_t trajectories,
                                              std::uint64_t seed, int workers, const ToyModelOptions& options) {
  return parallel_map<DynamicsTrace>(trajectories, workers, [&](std::size_t i) {
    RandomStream rng(derive_seed(seed, i));
    return toy_model_run(n, theta, steps, rng, options);
  });
}

void DynamicsTrace::write_csv(std::ostream& out) const {
  out << "step,cut,index,lambda\n";
  const std::size_t cut = n / 2 - 1;
  out.precision(17);
  for (const TraceStep& s : steps)
    for (std::size_t i = 0; i < s.schmidt.size(); ++i)
      out << s.step << ',' << cut << ',' << i + 1 << ',' << s.schmidt[i] << '\n';
}

SpectrumFit spectrum_fit(const std::vector<double>& spectrum, std::size_t i_min, SpectrumModel model, double floor) {
  require(i_min >= 2, "spectrum_fit: i_min must be at least 2");
  for (std::size_t i = 1; i < spectrum.size(); ++i)
    require(spectrum[i] <= spectrum[i - 1] * (1.0 + 1e-12), "spectrum_fit: spectrum must be non-increasing");
  std::vector<double> xs, ys;
  for (std::size_t i = i_min; i <= spectrum.size(); ++i) {
    const double lambda = spectrum[i - 1];
    if (!(lambda > floor)) break;
    const double li = std::log(static_cast<double>(i));
    switch (model) {
      case SpectrumModel::log_squared:
        xs.push_back(li * li);
        ys.push_back(std::log(lambda));
        break;
      case SpectrumModel::power_law:
        xs.push_back(li);
        ys.push_back(std::log(lambda));
        break;
      case SpectrumModel::loglog:
        if (lambda >= 1.0) continue;
        xs.push_back(std::log(li));
        ys.push_back(std::log(-std::log(lambda)));
        break;
    }
  }
  if (xs.size() < 5) throw InvalidArgument("spectrum_fit: fewer than 5 points above the numerical floor");
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  require(sxx > 0.0, "spectrum_fit: degenerate abscissae");
  SpectrumFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = xs.size();
  return fit;
}

std::size_t default_i_star(std::size_t n) {
  require(n >= 2, "default_i_star: n must be at least 2");
  return static_cast<std::size_t>(std::ceil(std::exp(std::sqrt(std::log(static_cast<double>(n))))));
}

std::size_t minimal_rank(const std::vector<double>& schmidt, double tail_weight, double eps) {
  if (tail_weight > eps)
    throw ResourceCapExceeded("minimal_rank: the stored spectrum is too short for this eps");
  double discarded = tail_weight;
  for (std::size_t r = schmidt.size(); r > 1; --r) {
    const double next = discarded + schmidt[r - 1] * schmidt[r - 1];
    if (next > eps) return r;
    discarded = next;
  }
  return 1;
}

std::vector<RankRow> rank_epsilon_tradeoff(const std::vector<DynamicsTrace>& traces, const std::vector<double>& eps,
                                           double delta) {
  require(!traces.empty(), "rank_epsilon_tradeoff: no traces");
  require(delta >= 0.0 && delta < 1.0, "rank_epsilon_tradeoff: delta must lie in [0, 1)");
  std::vector<RankRow> rows;
  for (double e : eps) {
    std::vector<std::size_t> ranks;
    for (const DynamicsTrace& t : traces) {
      require(!t.steps.empty(), "rank_epsilon_tradeoff: empty trace");
      ranks.push_back(minimal_rank(t.steps.back().schmidt, t.steps.back().tail_weight, e));
    }
    std::sort(ranks.begin(), ranks.end());
    const double pos = std::ceil((1.0 - delta) * static_cast<double>(ranks.size()));
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(pos), 1, ranks.size()) - 1;
    rows.push_back({e, delta, ranks[k]});
  }
  return rows;
}

}  // namespace shallow2d
