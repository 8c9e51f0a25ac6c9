// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include <algorithm>
#include <cmath>

#include "shallow2d/errors.hpp"
#include "shallow2d/sebd.hpp"

namespace shallow2d {

namespace {

struct InstanceOutcome {
  std::uint64_t seed = 0;
  SebdSample sample;
};

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

ScanResult entanglement_scan(const ScanConfig& config) {
  require(config.trials >= 1, "entanglement_scan: trials must be positive");
  require(config.final_iterations >= 1, "entanglement_scan: final_iterations must be positive");
  require(!config.sizes.empty(), "entanglement_scan: no sizes given");
  ScanResult result;
  for (int size : config.sizes) {
    require(size >= 2, "entanglement_scan: sizes must be at least 2");
    const std::uint64_t size_seed = derive_seed(config.seed, static_cast<std::uint64_t>(size));
    SebdOptions options;
    options.policy = config.policy;
    options.record_stride = 1;
    options.keep_spectra = config.keep_spectra;
    const auto outcomes = parallel_map<InstanceOutcome>(
        static_cast<std::size_t>(config.trials), config.workers, [&](std::size_t trial) {
          const std::uint64_t seed = derive_seed(size_seed, trial);
          const CircuitInstance instance = family_instance(config.spec, size, size, seed);
          return InstanceOutcome{seed, sebd_sample(instance, options, derive_seed(seed, 1))};
        });

    ScanSummary summary;
    summary.size = size;
    std::vector<double> s_half, s_one, s_two, bonds;
    for (std::size_t trial = 0; trial < outcomes.size(); ++trial) {
      const InstanceOutcome& o = outcomes[trial];
      for (const IterationRecord& rec : o.sample.records)
        result.rows.push_back({size, static_cast<int>(trial), o.seed, rec.iteration, rec, o.sample.failed});
      if (o.sample.failed) {
        ++summary.failures;
        continue;
      }
      int last = 0;
      for (const IterationRecord& rec : o.sample.records) last = std::max(last, rec.iteration);
      std::vector<double> a, b, c;
      for (const IterationRecord& rec : o.sample.records)
        if (rec.iteration > last - config.final_iterations) {
          a.push_back(rec.renyi_half);
          b.push_back(rec.renyi_one);
          c.push_back(rec.renyi_two);
        }
      s_half.push_back(mean_of(a));
      s_one.push_back(mean_of(b));
      s_two.push_back(mean_of(c));
      bonds.push_back(static_cast<double>(o.sample.max_bond));
    }
    summary.instances = static_cast<int>(s_one.size());
    summary.mean_renyi_half = mean_of(s_half);
    summary.mean_renyi_one = mean_of(s_one);
    summary.mean_renyi_two = mean_of(s_two);
    summary.mean_max_bond = mean_of(bonds);
    if (s_one.size() >= 2) {
      double var = 0.0;
      for (double x : s_one) var += (x - summary.mean_renyi_one) * (x - summary.mean_renyi_one);
      var /= static_cast<double>(s_one.size() - 1);
      summary.stderr_renyi_one = std::sqrt(var / static_cast<double>(s_one.size()));
    }
    result.summary.push_back(summary);
  }
  return result;
}

}  // namespace shallow2d
