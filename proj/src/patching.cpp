// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/patching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "shallow2d/detail/parallel.hpp"
#include "shallow2d/errors.hpp"

namespace shallow2d {

namespace {

// [begin, end) bands along one axis: patch bands of width l separated by
// gap bands of width l - 1, clipped to the lattice.
struct Band {
  int begin;
  int end;
  bool patch;
};

std::vector<Band> bands(int extent, int l) {
  std::vector<Band> out;
  for (int start = 0; start < extent; start += 2 * l - 1) {
    out.push_back({start, std::min(start + l, extent), true});
    if (start + l < extent) out.push_back({start + l, std::min(start + 2 * l - 1, extent), false});
  }
  return out;
}

Region block(const Band& r, const Band& c) {
  Region out;
  for (int i = r.begin; i < r.end; ++i)
    for (int j = c.begin; j < c.end; ++j) out.push_back({i, j});
  return out;
}

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  while (exp-- > 0) out *= base;
  return out;
}

}  // namespace

int region_distance(const Region& a, const Region& b) {
  require(!a.empty() && !b.empty(), "region_distance: empty region");
  int best = std::numeric_limits<int>::max();
  for (const Site& x : a)
    for (const Site& y : b) best = std::min(best, std::max(std::abs(x.row - y.row), std::abs(x.col - y.col)));
  return best;
}

std::vector<std::string> PatchPlan::violations() const {
  std::vector<std::string> out;
  std::vector<int> cover(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);
  std::vector<bool> sampled(cover.size(), false);
  auto index = [&](Site s) { return static_cast<std::size_t>(s.row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(s.col); };
  for (const Region& p : patches)
    for (const Site& s : p) {
      ++cover[index(s)];
      sampled[index(s)] = true;
    }
  for (std::size_t i = 0; i < patches.size(); ++i)
    for (std::size_t j = i + 1; j < patches.size(); ++j)
      if (region_distance(patches[i], patches[j]) < l)
        out.push_back("patches " + std::to_string(i) + " and " + std::to_string(j) + " are closer than l");
  for (std::size_t k = 0; k < stitches.size(); ++k) {
    for (const Site& s : stitches[k].condition)
      if (!sampled[index(s)]) out.push_back("stitch " + std::to_string(k) + " conditions on an unsampled site");
    for (const Site& s : stitches[k].target) {
      ++cover[index(s)];
      sampled[index(s)] = true;
    }
  }
  if (std::any_of(cover.begin(), cover.end(), [](int c) { return c != 1; }))
    out.push_back("patches and stitch targets do not cover the lattice exactly once");
  return out;
}

PatchPlan plan_patches(const CircuitLayout& layout, int l, const PlanOptions& options) {
  require(l >= 1, "plan_patches: l must be positive");
  if (!options.allow_short_lengthscale)
    require(l > 2 * layout.depth(), "plan_patches: l must exceed twice the circuit depth");
  PatchPlan plan{l, layout.rows, layout.cols, {}, {}};
  const std::vector<Band> rb = bands(layout.rows, l), cb = bands(layout.cols, l);
  std::vector<bool> sampled(layout.n_sites(), false);
  auto mark = [&](const Region& r) {
    for (const Site& s : r) sampled[layout.site_index(s)] = true;
  };
  for (const Band& r : rb)
    for (const Band& c : cb)
      if (r.patch && c.patch) {
        plan.patches.push_back(block(r, c));
        mark(plan.patches.back());
      }
  for (int stage : {2, 3}) {
    for (const Band& r : rb)
      for (const Band& c : cb) {
        const int gaps = (r.patch ? 0 : 1) + (c.patch ? 0 : 1);
        if (gaps != stage - 1) continue;
        StitchStep step{stage, block(r, c), {}};
        for (int i = 0; i < layout.rows; ++i)
          for (int j = 0; j < layout.cols; ++j) {
            const Site s{i, j};
            if (sampled[layout.site_index(s)] && region_distance(step.target, {s}) < l) step.condition.push_back(s);
          }
        mark(step.target);
        plan.stitches.push_back(std::move(step));
      }
  }
  return plan;
}

PatchOracle::PatchOracle(CircuitInstance instance, double qubit_cap)
    : instance_(std::move(instance)), qubit_cap_(qubit_cap) {}

Region PatchOracle::lightcone_sites(const Region& sites) const {
  const CircuitLayout& layout = instance_.layout;
  std::vector<bool> in(layout.n_sites(), false);
  for (const Site& s : sites) in[layout.site_index(s)] = true;
  std::vector<std::size_t> order(layout.events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return layout.events[a].layer > layout.events[b].layer; });
  for (std::size_t g : order) {
    const auto& es = layout.events[g].sites;
    if (std::any_of(es.begin(), es.end(), [&](const Site& s) { return in[layout.site_index(s)]; }))
      for (const Site& s : es) in[layout.site_index(s)] = true;
  }
  Region out = sites;
  for (int r = 0; r < layout.rows; ++r)
    for (int c = 0; c < layout.cols; ++c)
      if (in[layout.site_index({r, c})] && std::find(sites.begin(), sites.end(), Site{r, c}) == sites.end())
        out.push_back({r, c});
  return out;
}

const OutputDistribution& PatchOracle::marginal(const Region& sites) {
  const CircuitLayout& layout = instance_.layout;
  std::vector<std::size_t> key;
  for (const Site& s : sites) key.push_back(layout.site_index(s));
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  std::set<std::size_t> distinct(key.begin(), key.end());
  require(distinct.size() == key.size(), "PatchOracle::marginal: repeated site");

  // Targets occupy local indices 0..|sites|-1, the rest of the cone follows.
  const Region cone = lightcone_sites(sites);
  std::vector<std::ptrdiff_t> local(layout.n_sites(), -1);
  for (std::size_t k = 0; k < cone.size(); ++k) local[layout.site_index(cone[k])] = static_cast<std::ptrdiff_t>(k);
  Statevector psi = Statevector::zero_state(cone.size(), layout.q, qubit_cap_);
  std::vector<std::size_t> order(layout.events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return layout.events[a].layer < layout.events[b].layer; });
  for (std::size_t g : order) {
    const auto& es = layout.events[g].sites;
    std::vector<std::size_t> targets;
    for (const Site& s : es) {
      const std::ptrdiff_t k = local[layout.site_index(s)];
      if (k < 0) break;
      targets.push_back(static_cast<std::size_t>(k));
    }
    // The cone is closed under backward inclusion, so a gate is either
    // entirely inside it or irrelevant to the targets.
    if (targets.size() == es.size()) apply_gate(psi, targets, instance_.gates[g]);
  }
  std::vector<std::size_t> keep(sites.size());
  std::iota(keep.begin(), keep.end(), 0);
  return cache_.emplace(key, output_distribution(psi).marginal(keep)).first->second;
}

std::vector<double> PatchOracle::conditional(const Region& region, const Assignment& given) {
  Region joint = region;
  for (const auto& [s, v] : given) joint.push_back(s);
  const OutputDistribution& m = marginal(joint);
  const std::size_t q = static_cast<std::size_t>(instance_.layout.q);
  std::size_t given_index = 0;
  for (const auto& [s, v] : given) {
    require(v >= 0 && static_cast<std::size_t>(v) < q, "PatchOracle::conditional: outcome out of range");
    given_index = given_index * q + static_cast<std::size_t>(v);
  }
  const std::size_t stride = int_pow(q, given.size());
  std::vector<double> out(int_pow(q, region.size()));
  double total = 0.0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = m.probabilities[r * stride + given_index];
    total += out[r];
  }
  if (!(total > 0.0)) throw InvalidArgument("PatchOracle::conditional: conditioning event has probability zero");
  for (double& p : out) p /= total;
  return out;
}

double PatchOracle::conditional_probability(const Region& region, const std::vector<int>& values,
                                            const Assignment& given) {
  require(values.size() == region.size(), "PatchOracle::conditional_probability: value count mismatch");
  const int q = instance_.layout.q;
  Region joint = region;
  std::vector<int> joint_values = values;
  Region cond;
  std::vector<int> cond_values;
  for (const auto& [s, v] : given) {
    joint.push_back(s);
    joint_values.push_back(v);
    cond.push_back(s);
    cond_values.push_back(v);
  }
  const double p_joint = marginal(joint).probabilities[outcome_index(joint_values, q)];
  if (cond.empty()) return p_joint;
  const double p_cond = marginal(cond).probabilities[outcome_index(cond_values, q)];
  return p_cond > 0.0 ? p_joint / p_cond : 0.0;
}

std::vector<int> sample_patch(PatchOracle& oracle, const Region& region, const Assignment& given, RandomStream& rng) {
  const std::vector<double> p = oracle.conditional(region, given);
  return outcome_from_index(rng.categorical(p), region.size(), oracle.instance().layout.q);
}

namespace {

Assignment assignment_of(const CircuitLayout& layout, const Region& sites, const Outcome& x) {
  Assignment a;
  for (const Site& s : sites) a.push_back({s, x[layout.site_index(s)]});
  return a;
}

}  // namespace

Outcome recovery_stitch(PatchOracle& oracle, const PatchPlan& plan, RandomStream& rng) {
  const CircuitLayout& layout = oracle.instance().layout;
  require(plan.rows == layout.rows && plan.cols == layout.cols, "recovery_stitch: plan does not match the lattice");
  Outcome x(layout.n_sites(), -1);
  auto store = [&](const Region& r, const std::vector<int>& v) {
    for (std::size_t k = 0; k < r.size(); ++k) x[layout.site_index(r[k])] = v[k];
  };
  for (const Region& p : plan.patches) store(p, sample_patch(oracle, p, {}, rng));
  for (const StitchStep& step : plan.stitches)
    store(step.target, sample_patch(oracle, step.target, assignment_of(layout, step.condition, x), rng));
  return x;
}

PatchingProbability patching_probability(PatchOracle& oracle, const PatchPlan& plan, const Outcome& x) {
  const CircuitLayout& layout = oracle.instance().layout;
  require(x.size() == layout.n_sites(), "patching_probability: outcome length mismatch");
  double log_p = 0.0;
  auto factor = [&](const Region& r, const Assignment& given) {
    std::vector<int> v;
    for (const Site& s : r) v.push_back(x[layout.site_index(s)]);
    const double p = oracle.conditional_probability(r, v, given);
    log_p += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  };
  for (const Region& p : plan.patches) factor(p, {});
  for (const StitchStep& step : plan.stitches) {
    if (log_p == -std::numeric_limits<double>::infinity()) break;
    factor(step.target, assignment_of(layout, step.condition, x));
  }
  return {std::exp(log_p), log_p};
}

OutputDistribution stitched_distribution(PatchOracle& oracle, const PatchPlan& plan, std::size_t cap_sites) {
  const CircuitLayout& layout = oracle.instance().layout;
  const std::size_t n = layout.n_sites();
  if (n > cap_sites) throw ResourceCapExceeded("stitched_distribution: lattice exceeds the enumeration cap");
  OutputDistribution d{n, layout.q, std::vector<double>(int_pow(static_cast<std::size_t>(layout.q), n))};
  for (std::size_t idx = 0; idx < d.probabilities.size(); ++idx)
    d.probabilities[idx] = patching_probability(oracle, plan, outcome_from_index(idx, n, layout.q)).probability;
  return d;
}

std::vector<double> recovery_errors(PatchOracle& oracle, const PatchPlan& plan) {
  const int q = oracle.instance().layout.q;
  std::vector<double> errors;
  // Stage 1: joint patch marginal against the product of patch marginals.
  Region sampled;
  for (const Region& p : plan.patches) sampled.insert(sampled.end(), p.begin(), p.end());
  {
    const OutputDistribution& joint = oracle.marginal(sampled);
    double tv = 0.0;
    for (std::size_t idx = 0; idx < joint.probabilities.size(); ++idx) {
      const Outcome v = outcome_from_index(idx, sampled.size(), q);
      double prod = 1.0;
      std::size_t offset = 0;
      for (const Region& p : plan.patches) {
        prod *= oracle.marginal(p).probabilities[outcome_index({v.begin() + offset, v.begin() + offset + p.size()}, q)];
        offset += p.size();
      }
      tv += std::abs(joint.probabilities[idx] - prod);
    }
    errors.push_back(0.5 * tv);
  }
  for (const StitchStep& step : plan.stitches) {
    Region joint_sites = sampled;
    joint_sites.insert(joint_sites.end(), step.target.begin(), step.target.end());
    // Condition sites as positions within `sampled`.
    std::vector<std::size_t> cpos;
    for (const Site& s : step.condition)
      cpos.push_back(static_cast<std::size_t>(std::find(sampled.begin(), sampled.end(), s) - sampled.begin()));
    const std::vector<double> exact = oracle.marginal(joint_sites).probabilities;
    const std::vector<double> before = oracle.marginal(sampled).probabilities;
    double tv = 0.0;
    for (std::size_t idx = 0; idx < exact.size(); ++idx) {
      const Outcome v = outcome_from_index(idx, joint_sites.size(), q);
      const Outcome prefix(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(sampled.size()));
      const std::vector<int> a(v.begin() + static_cast<std::ptrdiff_t>(sampled.size()), v.end());
      Assignment given;
      for (std::size_t k = 0; k < cpos.size(); ++k) given.push_back({step.condition[k], prefix[cpos[k]]});
      const double recovered = before[outcome_index(prefix, q)] * oracle.conditional_probability(step.target, a, given);
      tv += std::abs(exact[idx] - recovered);
    }
    errors.push_back(0.5 * tv);
    sampled = joint_sites;
  }
  return errors;
}

double markov_distance(const OutputDistribution& dist, const std::vector<std::size_t>& a,
                       const std::vector<std::size_t>& b, const std::vector<std::size_t>& c) {
  std::vector<std::size_t> abc = a;
  abc.insert(abc.end(), b.begin(), b.end());
  abc.insert(abc.end(), c.begin(), c.end());
  const OutputDistribution joint = dist.marginal(abc);
  const std::size_t q = static_cast<std::size_t>(dist.local_dim);
  const std::size_t na = int_pow(q, a.size()), nb = int_pow(q, b.size()), nc = int_pow(q, c.size());
  // joint index = (ia * nb + ib) * nc + ic.
  std::vector<double> pab(na * nb, 0.0), pbc(nb * nc, 0.0), pb(nb, 0.0);
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib)
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const double p = joint.probabilities[(ia * nb + ib) * nc + ic];
        pab[ia * nb + ib] += p;
        pbc[ib * nc + ic] += p;
        pb[ib] += p;
      }
  double l1 = 0.0;
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib)
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const double markov = pb[ib] > 0.0 ? pab[ia * nb + ib] * pbc[ib * nc + ic] / pb[ib] : 0.0;
        l1 += std::abs(joint.probabilities[(ia * nb + ib) * nc + ic] - markov);
      }
  return l1;
}

void CmiTable::write_csv(std::ostream& out) const {
  out << "separation,cmi_mean,cmi_stderr,n_instances\n";
  out.precision(17);
  for (const CmiRow& r : rows) out << r.separation << ',' << r.cmi_mean << ',' << r.cmi_stderr << ',' << r.instances << '\n';
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Advances through one column per entry of `columns`, fixing its outcomes.
// Returns the log probability of the prefix; -infinity when it is impossible.
double fixed_sweep(SebdEngine& engine, const std::vector<std::vector<int>>& columns) {
  double log_p = 0.0;
  for (const std::vector<int>& column : columns) {
    if (!engine.advance()) throw NumericalFailure("column_cmi: exact sweep failed");
    for (int v : column) {
      const double p = engine.project(v);
      if (!(p > 0.0)) return kNegInf;
      log_p += std::log(p);
    }
  }
  return log_p;
}

// Accumulates p * p(rest) into `out` over every outcome of the columns up to
// iteration `last_iteration`, indexed column-major from `index`.
void enumerate(const SebdEngine& engine, int last_iteration, double p, std::size_t index, int q,
               std::vector<double>& out) {
  SebdEngine e = engine;
  if (!e.column_open()) {
    if (e.iteration() > last_iteration) {
      out[index] += p;
      return;
    }
    if (!e.advance()) throw NumericalFailure("column_cmi: exact sweep failed");
  }
  const std::vector<double> probs = e.probabilities();
  for (int v = 0; v < q; ++v) {
    const double pv = probs[static_cast<std::size_t>(v)];
    if (!(pv > 0.0)) continue;
    SebdEngine child = e;
    child.project(v);
    enumerate(child, last_iteration, p * pv, index * static_cast<std::size_t>(q) + static_cast<std::size_t>(v), q, out);
  }
}

// Distribution of the next column given everything measured so far.
std::vector<double> next_column(const SebdEngine& engine, std::size_t rows, int q) {
  std::vector<double> out(int_pow(static_cast<std::size_t>(q), rows), 0.0);
  enumerate(engine, engine.iteration(), 1.0, 0, q, out);
  return out;
}

}  // namespace

ColumnCmi column_cmi(const CircuitInstance& instance, int separation, std::size_t exact_bits, std::size_t samples,
                     std::uint64_t seed) {
  const CircuitLayout& layout = instance.layout;
  require(separation >= 1 && separation < layout.cols, "column_cmi: separation must lie in [1, cols)");
  const int q = layout.q;
  const std::size_t rows = static_cast<std::size_t>(layout.rows);
  const std::size_t span = static_cast<std::size_t>(separation) + 1;
  const SebdEngine base(instance, TruncationPolicy{});
  const double bits = static_cast<double>(rows * span) * std::log2(static_cast<double>(q));

  if (bits <= static_cast<double>(exact_bits)) {
    std::vector<std::size_t> a(rows), b, c(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      a[r] = r;
      c[r] = rows * (span - 1) + r;
    }
    for (std::size_t k = rows; k < rows * (span - 1); ++k) b.push_back(k);
    std::vector<double> p(int_pow(static_cast<std::size_t>(q), rows * span), 0.0);
    enumerate(base, separation + 1, 1.0, 0, q, p);
    const OutputDistribution dist{rows * span, q, std::move(p)};
    return {exact_entropies(dist, a, b, c).cmi, 0.0, true};
  }

  // I(A:C|B) = E_{ab} KL(p(c|ab) || p(c|b)). Each draw of (a, b) contributes
  // the exact inner divergence; p(c|b) mixes p(c|a'b) with weights p(a'b).
  require(samples >= 2, "column_cmi: need at least two samples");
  RandomStream rng(seed);
  const std::size_t n_a = int_pow(static_cast<std::size_t>(q), rows);
  const std::size_t n_c = n_a;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    SebdEngine e = base;
    std::vector<std::vector<int>> prefix(span - 1, std::vector<int>(rows));
    for (std::size_t t = 0; t + 1 < span; ++t) {
      if (!e.advance()) throw NumericalFailure("column_cmi: exact sweep failed");
      for (std::size_t r = 0; r < rows; ++r) prefix[t][r] = e.measure(rng).outcome;
    }
    const std::vector<double> p_c_ab = next_column(e, rows, q);
    std::vector<double> p_c_b(n_c, 0.0);
    double p_b = 0.0;
    for (std::size_t ia = 0; ia < n_a; ++ia) {
      const Outcome av = outcome_from_index(ia, rows, q);
      prefix[0].assign(av.begin(), av.end());
      SebdEngine alt = base;
      const double log_ab = fixed_sweep(alt, prefix);
      if (log_ab == kNegInf) continue;
      const double w = std::exp(log_ab);
      const std::vector<double> pc = next_column(alt, rows, q);
      for (std::size_t ic = 0; ic < n_c; ++ic) p_c_b[ic] += w * pc[ic];
      p_b += w;
    }
    double kl = 0.0;
    for (std::size_t ic = 0; ic < n_c; ++ic)
      if (p_c_ab[ic] > 0.0) kl += p_c_ab[ic] * std::log2(p_c_ab[ic] * p_b / p_c_b[ic]);
    sum += kl;
    sum2 += kl * kl;
  }
  const double m = static_cast<double>(samples);
  const double mean = sum / m;
  const double var = std::max(0.0, (sum2 - m * mean * mean) / (m - 1.0));
  return {mean, std::sqrt(var / m), false};
}

CmiTable cmi_decay_scan(const CmiScanConfig& config) {
  require(config.instances >= 1, "cmi_decay_scan: need at least one instance");
  const auto per_instance = parallel_map<std::vector<ColumnCmi>>(config.instances, config.workers, [&](std::size_t i) {
    const std::uint64_t inst_seed = derive_seed(config.seed, i);
    const CircuitInstance inst = family_instance(config.spec, config.rows, config.cols, inst_seed);
    std::vector<ColumnCmi> out;
    for (int l : config.separations)
      out.push_back(column_cmi(inst, l, config.exact_bits, config.samples, derive_seed(inst_seed, static_cast<std::uint64_t>(l))));
    return out;
  });
  CmiTable table;
  const double m = static_cast<double>(config.instances);
  for (std::size_t k = 0; k < config.separations.size(); ++k) {
    double sum = 0.0, sum2 = 0.0;
    bool exact = true;
    for (const auto& row : per_instance) {
      sum += row[k].cmi;
      sum2 += row[k].cmi * row[k].cmi;
      exact = exact && row[k].exact;
    }
    const double mean = sum / m;
    const double var = config.instances > 1 ? std::max(0.0, (sum2 - m * mean * mean) / (m - 1.0)) : 0.0;
    table.rows.push_back({config.separations[k], mean, std::sqrt(var / m), config.instances, exact});
  }
  return table;
}

}  // namespace shallow2d
