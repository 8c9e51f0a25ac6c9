// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shallow2d/architecture.hpp"
#include "shallow2d/mps.hpp"
#include "shallow2d/statevector.hpp"

namespace shallow2d {

// Column sweep over a 2D layout. MPS position = lattice row; every live
// qudit of a row is a slot of that row's site. Iteration t (1-based)
// compresses, applies the lightcone increment V_t, checks the bond cap, then
// measures column t-1 (0-based) from row 0 down.
class SebdEngine {
 public:
  SebdEngine(const CircuitInstance& instance, TruncationPolicy policy);

  int columns() const;
  int rows() const;
  // Iteration of the column being measured, or of the next column to open.
  int iteration() const { return iteration_; }
  bool column_open() const { return column_open_; }
  int next_row() const { return next_row_; }
  bool finished() const { return iteration_ > columns(); }

  // Compresses, applies V_t and opens column t. Returns false (FAIL) when
  // a bond exceeds the cap; the engine is then unusable.
  bool advance();

  // Conditional distribution of the next row of the open column.
  std::vector<double> probabilities();
  // Conditions the next row on `outcome`; returns its conditional probability.
  double project(int outcome);
  MeasureOutcome measure(RandomStream& rng);

  const MatrixProductState& state() const { return mps_; }
  MatrixProductState& state() { return mps_; }
  const TruncationLog& log() const { return log_; }
  std::size_t max_bond_seen() const { return max_bond_seen_; }
  bool failed() const { return failed_; }
  // Live qudits per row in slot order, as lattice sites.
  std::vector<std::vector<Site>> live_sites() const;

 private:
  struct Plan;
  std::shared_ptr<const Plan> plan_;
  TruncationPolicy policy_;
  MatrixProductState mps_;
  std::vector<std::vector<int>> live_cols_;
  std::vector<std::vector<bool>> measured_;
  TruncationLog log_;
  int iteration_ = 1;
  int next_row_ = 0;
  bool column_open_ = false;
  bool failed_ = false;
  std::size_t max_bond_seen_ = 1;

  SlotRef locate(Site s);
  SlotRef ensure_live(Site s);
  void close_row();
};

struct IterationRecord {
  int iteration = 0;
  std::size_t cut = 0;  // bond index (between rows cut and cut+1)
  std::size_t bond_dim = 0;
  double renyi_half = 0.0;  // bits, k = 0.5
  double renyi_one = 0.0;   // bits, k = 1
  double renyi_two = 0.0;   // bits, k = 2
  std::vector<double> schmidt;  // filled only when spectra are kept
};

struct SebdOptions {
  TruncationPolicy policy;
  // Records are taken after measuring column t when t % stride == 0; 0 disables.
  int record_stride = 0;
  std::vector<std::size_t> record_cuts;  // empty = half-chain cut
  bool keep_spectra = false;
};

struct SebdSample {
  bool failed = false;
  Outcome outcome;  // row-major site order; empty on FAIL
  double log_probability = 0.0;  // natural log of the sampled string under the sweep
  TruncationLog log;
  std::vector<IterationRecord> records;
  std::uint64_t seed = 0;
  std::size_t max_bond = 1;
};

SebdSample sebd_sample(const CircuitInstance& instance, const SebdOptions& options, std::uint64_t sample_seed);

struct SebdProbability {
  double probability = 0.0;
  double log_probability = 0.0;  // natural log; -infinity when probability is 0
  bool failed = false;
  TruncationLog log;
  std::size_t max_bond = 1;
};

// Product of the sweep's conditional probabilities for `x`, in log space.
// A bond above the cap yields probability 0.
SebdProbability sebd_probability(const CircuitInstance& instance, const TruncationPolicy& policy, const Outcome& x);

// Exact distribution of the sampler's output by enumeration of every branch.
struct SebdDistribution {
  std::vector<double> probabilities;  // indexed by outcome_index
  double fail_probability = 0.0;
  double expected_sqrt_term = 0.0;   // E sum_i sqrt(2 eps_i)
  double expected_split_term = 0.0;  // E sum over split drops of sqrt(2 w)
  double expected_lambda = 0.0;      // E Lambda
};

SebdDistribution sebd_distribution(const CircuitInstance& instance, const TruncationPolicy& policy,
                                   double qubit_cap = 16.0);

// Total variation between the sampler (FAIL counted as its own outcome)
// and an exact distribution.
double sampler_total_variation(const SebdDistribution& sebd, const OutputDistribution& exact);

struct ErrorCertificate {
  double tv_bound = 0.0;      // sqrt_term + split_term + failure_term
  double sqrt_term = 0.0;
  double split_term = 0.0;
  double failure_term = 0.0;
  double lambda_bound = 0.0;  // sqrt(2) Lambda + failure_term
  std::optional<double> confidence;
};

ErrorCertificate error_certificate(const TruncationLog& log, double p_fail,
                                   std::optional<double> confidence = std::nullopt);
ErrorCertificate error_certificate(const SebdDistribution& dist);
// L2 sqrt(2 eps L1) + p_fail.
double uniform_budget_bound(int L1, int L2, double eps, double p_fail);

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

// Two-sided Clopper-Pearson interval at the given confidence.
Interval failure_confidence_interval(std::size_t trials, std::size_t failures, double confidence);

// Layout families addressable by name: brickwork, extended_brickwork, chr,
// chr_fixed (single-site gates replaced by the fixed Hadamard-like gate),
// product.
struct FamilySpec {
  std::string family = "brickwork";
  int q = 2;
  int r = 1;  // extended_brickwork only
  int v = 1;  // extended_brickwork only
};

CircuitLayout family_layout(const FamilySpec& spec, int rows, int cols);
CircuitInstance family_instance(const FamilySpec& spec, int rows, int cols, std::uint64_t seed);

struct ScanConfig {
  FamilySpec spec;
  std::vector<int> sizes;
  int trials = 10;
  TruncationPolicy policy;
  std::uint64_t seed = 1;
  int workers = 1;
  int final_iterations = 10;
  bool keep_spectra = false;
};

struct ScanRow {
  int size = 0;
  int instance = 0;
  std::uint64_t seed = 0;
  int iteration = 0;
  IterationRecord record;
  bool failed = false;
};

struct ScanSummary {
  int size = 0;
  int instances = 0;
  int failures = 0;
  double mean_renyi_half = 0.0;
  double mean_renyi_one = 0.0;
  double mean_renyi_two = 0.0;
  double stderr_renyi_one = 0.0;  // instance scatter / sqrt(instances)
  double mean_max_bond = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<ScanSummary> summary;
};

// Half-chain entropies per iteration on size x size lattices. Per instance
// the entropies are averaged over the final `final_iterations` recorded
// iterations, then averaged over instances.
ScanResult entanglement_scan(const ScanConfig& config);

// Runs tasks 0..count-1 on up to `workers` threads; results are placed by
// task index.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, int workers, Fn&& fn);

}  // namespace shallow2d

#include "shallow2d/detail/parallel.hpp"
