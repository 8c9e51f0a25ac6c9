// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/sebd.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "shallow2d/errors.hpp"

namespace shallow2d {

struct SebdEngine::Plan {
  CircuitInstance instance;
  std::vector<std::vector<std::size_t>> increments;
};

SebdEngine::SebdEngine(const CircuitInstance& instance, TruncationPolicy policy)
    : policy_(policy), mps_(static_cast<std::size_t>(instance.layout.rows)) {
  require(instance.gates.size() == instance.layout.events.size(), "sebd: gate count does not match the layout");
  require(!policy.max_bond || *policy.max_bond >= 1, "sebd: bond cap must be positive");
  auto plan = std::make_shared<Plan>();
  plan->instance = instance;
  plan->increments = lightcone_increments(instance.layout);
  plan_ = std::move(plan);
  live_cols_.resize(static_cast<std::size_t>(instance.layout.rows));
  measured_.assign(static_cast<std::size_t>(instance.layout.rows),
                   std::vector<bool>(static_cast<std::size_t>(instance.layout.cols), false));
}

int SebdEngine::columns() const { return plan_->instance.layout.cols; }
int SebdEngine::rows() const { return plan_->instance.layout.rows; }

SlotRef SebdEngine::locate(Site s) {
  const auto& cols = live_cols_[static_cast<std::size_t>(s.row)];
  const auto it = std::find(cols.begin(), cols.end(), s.col);
  require(it != cols.end(), "sebd: qudit is not live");
  return {static_cast<std::size_t>(s.row), static_cast<std::size_t>(it - cols.begin())};
}

SlotRef SebdEngine::ensure_live(Site s) {
  auto& cols = live_cols_[static_cast<std::size_t>(s.row)];
  if (std::find(cols.begin(), cols.end(), s.col) != cols.end()) return locate(s);
  if (measured_[static_cast<std::size_t>(s.row)][static_cast<std::size_t>(s.col)])
    throw Error("sebd: gate scheduled on an already measured qudit");
  const std::size_t slot = mps_.absorb(static_cast<std::size_t>(s.row), plan_->instance.layout.q);
  cols.push_back(s.col);
  return {static_cast<std::size_t>(s.row), slot};
}

bool SebdEngine::advance() {
  require(!failed_, "sebd: engine has failed");
  require(!column_open_, "sebd: previous column is still open");
  require(!finished(), "sebd: sweep already finished");
  const int t = iteration_;
  mps_.compress(policy_, t, log_);
  const CircuitInstance& inst = plan_->instance;
  for (std::size_t e : plan_->increments[static_cast<std::size_t>(t - 1)]) {
    std::vector<SlotRef> targets;
    for (const Site& s : inst.layout.events[e].sites) targets.push_back(ensure_live(s));
    const SplitDiscard drop = mps_.apply_gate(targets, inst.gates[e], policy_.zero_tolerance);
    if (drop.weight > 0.0 || drop.sum > 0.0) {
      const std::size_t bond = std::min(targets[0].pos, targets.back().pos);
      log_.append({t, bond, drop.weight, drop.sum, mps_.bond_dim(bond), true});
    }
  }
  const std::size_t bond = mps_.max_bond_dim();
  max_bond_seen_ = std::max(max_bond_seen_, bond);
  if (policy_.max_bond && bond > *policy_.max_bond) {
    failed_ = true;
    return false;
  }
  column_open_ = true;
  next_row_ = 0;
  return true;
}

std::vector<double> SebdEngine::probabilities() {
  require(column_open_, "sebd: no open column");
  std::vector<double> p = mps_.slot_probabilities(ensure_live({next_row_, iteration_ - 1}));
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw NumericalFailure("sebd: all outcome probabilities vanish");
  for (double& x : p) x /= total;
  return p;
}

void SebdEngine::close_row() {
  measured_[static_cast<std::size_t>(next_row_)][static_cast<std::size_t>(iteration_ - 1)] = true;
  auto& cols = live_cols_[static_cast<std::size_t>(next_row_)];
  cols.erase(std::find(cols.begin(), cols.end(), iteration_ - 1));
  if (++next_row_ == rows()) {
    column_open_ = false;
    ++iteration_;
  }
}

double SebdEngine::project(int outcome) {
  require(column_open_, "sebd: no open column");
  const double p = mps_.project(ensure_live({next_row_, iteration_ - 1}), outcome);
  close_row();
  return p;
}

MeasureOutcome SebdEngine::measure(RandomStream& rng) {
  const std::vector<double> p = probabilities();
  const int k = static_cast<int>(rng.categorical(p));
  mps_.project(locate({next_row_, iteration_ - 1}), k);
  close_row();
  return {k, p[static_cast<std::size_t>(k)]};
}

std::vector<std::vector<Site>> SebdEngine::live_sites() const {
  std::vector<std::vector<Site>> out(live_cols_.size());
  for (std::size_t r = 0; r < live_cols_.size(); ++r)
    for (int c : live_cols_[r]) out[r].push_back({static_cast<int>(r), c});
  return out;
}

namespace {

IterationRecord make_record(MatrixProductState& mps, int iteration, std::size_t cut, bool keep_spectrum) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.cut = cut;
  rec.bond_dim = mps.bond_dim(cut);
  const std::vector<double> s = mps.schmidt_values(cut);
  std::vector<double> p;
  for (double x : s) p.push_back(x * x);
  rec.renyi_half = renyi_entropy(p, 0.5);
  rec.renyi_one = renyi_entropy(p, 1.0);
  rec.renyi_two = renyi_entropy(p, 2.0);
  if (keep_spectrum) rec.schmidt = s;
  return rec;
}

}  // namespace

SebdSample sebd_sample(const CircuitInstance& instance, const SebdOptions& options, std::uint64_t sample_seed) {
  SebdEngine engine(instance, options.policy);
  RandomStream rng(sample_seed);
  SebdSample out;
  out.seed = sample_seed;
  const CircuitLayout& layout = instance.layout;
  Outcome x(layout.n_sites(), 0);
  std::vector<std::size_t> cuts = options.record_cuts;
  if (cuts.empty() && layout.rows >= 2) cuts.push_back(static_cast<std::size_t>(layout.rows / 2 - 1));
  while (!engine.finished()) {
    const int t = engine.iteration();
    if (!engine.advance()) {
      out.failed = true;
      break;
    }
    for (int r = 0; r < layout.rows; ++r) {
      const MeasureOutcome m = engine.measure(rng);
      x[layout.site_index({r, t - 1})] = m.outcome;
      out.log_probability += std::log(m.probability);
    }
    if (options.record_stride > 0 && t % options.record_stride == 0 && t < layout.cols)
      for (std::size_t cut : cuts) out.records.push_back(make_record(engine.state(), t, cut, options.keep_spectra));
  }
  if (!out.failed) out.outcome = std::move(x);
  out.log = engine.log();
  out.max_bond = engine.max_bond_seen();
  return out;
}

SebdProbability sebd_probability(const CircuitInstance& instance, const TruncationPolicy& policy, const Outcome& x) {
  const CircuitLayout& layout = instance.layout;
  require(x.size() == layout.n_sites(), "sebd_probability: outcome length does not match the lattice");
  for (int v : x) require(v >= 0 && v < layout.q, "sebd_probability: outcome digit out of range");
  SebdEngine engine(instance, policy);
  SebdProbability out;
  auto finish = [&] {
    out.log = engine.log();
    out.max_bond = engine.max_bond_seen();
    out.probability = std::isfinite(out.log_probability) ? std::exp(out.log_probability) : 0.0;
    return out;
  };
  while (!engine.finished()) {
    const int t = engine.iteration();
    if (!engine.advance()) {
      out.failed = true;
      out.log_probability = -std::numeric_limits<double>::infinity();
      return finish();
    }
    for (int r = 0; r < layout.rows; ++r) {
      const double p = engine.project(x[layout.site_index({r, t - 1})]);
      if (!(p > 0.0)) {
        out.log_probability = -std::numeric_limits<double>::infinity();
        return finish();
      }
      out.log_probability += std::log(p);
    }
  }
  return finish();
}

namespace {

struct Enumerator {
  const CircuitLayout& layout;
  SebdDistribution& out;
  std::vector<std::size_t> weight;

  void terminal(const SebdEngine& e, double prob) {
    out.expected_sqrt_term += prob * e.log().sqrt_term();
    out.expected_split_term += prob * e.log().split_term();
    out.expected_lambda += prob * e.log().lambda();
  }

  void visit(SebdEngine& e, double prob, std::size_t index) {
    if (e.finished()) {
      out.probabilities[index] += prob;
      terminal(e, prob);
      return;
    }
    if (!e.column_open() && !e.advance()) {
      out.fail_probability += prob;
      terminal(e, prob);
      return;
    }
    const Site site{e.next_row(), e.iteration() - 1};
    const std::size_t w = weight[layout.site_index(site)];
    const std::vector<double> p = e.probabilities();
    int last = -1;
    for (int k = 0; k < static_cast<int>(p.size()); ++k)
      if (p[static_cast<std::size_t>(k)] > 0.0) last = k;
    for (int k = 0; k <= last; ++k) {
      const double pk = p[static_cast<std::size_t>(k)];
      if (!(pk > 0.0)) continue;
      const std::size_t child_index = index + static_cast<std::size_t>(k) * w;
      if (k == last) {
        e.project(k);
        visit(e, prob * pk, child_index);
      } else {
        SebdEngine child = e;
        child.project(k);
        visit(child, prob * pk, child_index);
      }
    }
  }
};

}  // namespace

SebdDistribution sebd_distribution(const CircuitInstance& instance, const TruncationPolicy& policy,
                                   double qubit_cap) {
  const CircuitLayout& layout = instance.layout;
  const std::size_t n = layout.n_sites();
  const double bits = static_cast<double>(n) * std::log2(static_cast<double>(layout.q));
  if (bits > qubit_cap + 1e-9) throw ResourceCapExceeded("sebd_distribution: outcome space exceeds the enumeration cap");
  SebdDistribution out;
  std::size_t size = 1;
  std::vector<std::size_t> weight(n);
  for (std::size_t s = n; s-- > 0;) {
    weight[s] = size;
    size *= static_cast<std::size_t>(layout.q);
  }
  out.probabilities.assign(size, 0.0);
  Enumerator walker{layout, out, weight};
  SebdEngine engine(instance, policy);
  walker.visit(engine, 1.0, 0);
  return out;
}

double sampler_total_variation(const SebdDistribution& sebd, const OutputDistribution& exact) {
  return total_variation(sebd.probabilities, exact.probabilities) + 0.5 * sebd.fail_probability;
}

ErrorCertificate error_certificate(const TruncationLog& log, double p_fail, std::optional<double> confidence) {
  require(p_fail >= 0.0 && p_fail <= 1.0, "error_certificate: failure probability must lie in [0, 1]");
  ErrorCertificate c;
  c.sqrt_term = log.sqrt_term();
  c.split_term = log.split_term();
  c.failure_term = p_fail;
  c.tv_bound = c.sqrt_term + c.split_term + c.failure_term;
  c.lambda_bound = std::sqrt(2.0) * log.lambda() + p_fail;
  c.confidence = confidence;
  return c;
}

ErrorCertificate error_certificate(const SebdDistribution& dist) {
  ErrorCertificate c;
  c.sqrt_term = dist.expected_sqrt_term;
  c.split_term = dist.expected_split_term;
  c.failure_term = dist.fail_probability;
  c.tv_bound = c.sqrt_term + c.split_term + c.failure_term;
  c.lambda_bound = std::sqrt(2.0) * dist.expected_lambda + dist.fail_probability;
  return c;
}

double uniform_budget_bound(int L1, int L2, double eps, double p_fail) {
  return static_cast<double>(L2) * std::sqrt(2.0 * eps * static_cast<double>(L1)) + p_fail;
}

Interval failure_confidence_interval(std::size_t trials, std::size_t failures, double confidence) {
  require(trials >= 1, "failure_confidence_interval: at least one trial is required");
  require(failures <= trials, "failure_confidence_interval: failures exceed trials");
  require(confidence > 0.0 && confidence < 1.0, "failure_confidence_interval: confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const double n = static_cast<double>(trials);
  const double f = static_cast<double>(failures);
  Interval out;
  out.lower = failures == 0 ? 0.0 : boost::math::ibeta_inv(f, n - f + 1.0, alpha / 2.0);
  out.upper = failures == trials ? 1.0 : boost::math::ibeta_inv(f + 1.0, n - f, 1.0 - alpha / 2.0);
  return out;
}

CircuitLayout family_layout(const FamilySpec& spec, int rows, int cols) {
  if (spec.family == "brickwork") return brickwork_layout(rows, cols, spec.q);
  if (spec.family == "extended_brickwork") return extended_brickwork_layout(rows, spec.r, spec.v, spec.q);
  if (spec.family == "chr") return chr_rect_layout(rows, cols, spec.q);
  if (spec.family == "chr_fixed") {
    CircuitLayout layout = chr_rect_layout(rows, cols, spec.q);
    for (GateEvent& e : layout.events)
      if (e.kind == GateKind::haar_one_site) e.kind = GateKind::hadamard_like_fixed;
    layout.family = "chr_fixed";
    return layout;
  }
  if (spec.family == "product") return product_layout(rows, cols, spec.q);
  throw InvalidArgument("unknown architecture family '" + spec.family + "'");
}

CircuitInstance family_instance(const FamilySpec& spec, int rows, int cols, std::uint64_t seed) {
  return make_instance(family_layout(spec, rows, cols), seed);
}

}  // namespace shallow2d
