// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shallow2d/architecture.hpp"
#include "shallow2d/random.hpp"
#include "shallow2d/sebd.hpp"
#include "shallow2d/statevector.hpp"

namespace shallow2d {

using Region = std::vector<Site>;
// Partial assignment of outcomes to sites.
using Assignment = std::vector<std::pair<Site, int>>;

// Max-norm lattice distance between two regions.
int region_distance(const Region& a, const Region& b);

struct StitchStep {
  int stage = 2;      // 2: bridges between patches, 3: holes
  Region target;      // A, sampled by this step
  Region condition;   // B, already-sampled sites within distance l of A
};

// Square patches of side l on a period of 2l - 1, so neighbouring patches
// sit at distance exactly l. Bands between patches are bridges (stage 2),
// crossings of two gap bands are holes (stage 3); both are ordered
// row-major.
struct PatchPlan {
  int l = 0;
  int rows = 0;
  int cols = 0;
  std::vector<Region> patches;
  std::vector<StitchStep> stitches;

  // Empty when the coverage and separation invariants hold.
  std::vector<std::string> violations() const;
};

struct PlanOptions {
  // Permit l <= 2 * depth. Stage-1 patches are then correlated and sampling
  // them independently is an additional approximation.
  bool allow_short_lengthscale = false;
};

PatchPlan plan_patches(const CircuitLayout& layout, int l, const PlanOptions& options = {});

// Exact marginals of an instance from dense simulation of the backward
// lightcone of the requested sites. Marginals are cached by site list.
class PatchOracle {
 public:
  explicit PatchOracle(CircuitInstance instance, double qubit_cap = kDefaultOracleQubitCap);

  const CircuitInstance& instance() const { return instance_; }
  // Sites touched by the gates in the backward lightcone of `sites`, plus `sites`.
  Region lightcone_sites(const Region& sites) const;
  // Distribution of `sites` in the listed order.
  const OutputDistribution& marginal(const Region& sites);
  // Conditional distribution of `region` given `given`, indexed by
  // outcome_index over `region`. Throws when `given` has probability 0.
  std::vector<double> conditional(const Region& region, const Assignment& given);
  // p(values on region | given); 0 when the event has probability 0.
  double conditional_probability(const Region& region, const std::vector<int>& values, const Assignment& given);

 private:
  CircuitInstance instance_;
  double qubit_cap_;
  std::map<std::vector<std::size_t>, OutputDistribution> cache_;
};

// Exact sample of `region` from the marginal conditioned on `given`.
std::vector<int> sample_patch(PatchOracle& oracle, const Region& region, const Assignment& given, RandomStream& rng);

// Stage 1 samples every patch independently, stages 2 and 3 apply the
// recovery maps of the plan. Output in row-major site order.
Outcome recovery_stitch(PatchOracle& oracle, const PatchPlan& plan, RandomStream& rng);

struct PatchingProbability {
  double probability = 0.0;
  double log_probability = 0.0;  // natural log; -infinity at zero
};

// Product of the plan's patch marginals and recovery conditionals at x.
PatchingProbability patching_probability(PatchOracle& oracle, const PatchPlan& plan, const Outcome& x);
// The distribution recovery_stitch samples from, by enumeration.
OutputDistribution stitched_distribution(PatchOracle& oracle, const PatchPlan& plan, std::size_t cap_sites = 16);
// Per recovery step, the total variation between the exact marginal on
// (sampled sites + A) and the recovered one D_{A|B} D_{sampled}.
std::vector<double> recovery_errors(PatchOracle& oracle, const PatchPlan& plan);

// || p_ABC - p_{A|B} p_B p_{C|B} ||_1 for disjoint site lists of `dist`.
double markov_distance(const OutputDistribution& dist, const std::vector<std::size_t>& a,
                       const std::vector<std::size_t>& b, const std::vector<std::size_t>& c);

struct CmiRow {
  int separation = 0;
  double cmi_mean = 0.0;  // bits, raw
  double cmi_stderr = 0.0;
  std::size_t instances = 0;
  bool exact = true;  // false when per-instance values are Monte Carlo estimates
};

struct CmiTable {
  std::vector<CmiRow> rows;

  // Columns separation, cmi_mean, cmi_stderr, n_instances.
  void write_csv(std::ostream& out) const;
};

// A = column 0, C = column `separation`, B = the columns between.
struct CmiScanConfig {
  FamilySpec spec;
  int rows = 4;
  int cols = 10;
  std::vector<int> separations{1, 2, 3, 4, 5, 6};
  std::size_t instances = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  // Above this many outcome bits in A, B and C the CMI is the mean over
  // `samples` draws of (a, b) of KL(p(c|ab) || p(c|b)), each term exact.
  std::size_t exact_bits = 16;
  std::size_t samples = 200;
};

struct ColumnCmi {
  double cmi = 0.0;
  double stderr_cmi = 0.0;  // Monte Carlo error; 0 when exact
  bool exact = true;
};

// I(A:C|B) in bits for the column tripartition, from SEBD column sweeps.
ColumnCmi column_cmi(const CircuitInstance& instance, int separation, std::size_t exact_bits = 16,
                     std::size_t samples = 200, std::uint64_t seed = 1);

CmiTable cmi_decay_scan(const CmiScanConfig& config);

}  // namespace shallow2d
