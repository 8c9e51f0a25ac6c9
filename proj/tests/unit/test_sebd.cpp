#include <cmath>
#include <limits>

#include "doctest.h"
#include "shallow2d/errors.hpp"
#include "shallow2d/sebd.hpp"

using namespace shallow2d;

namespace {

TruncationPolicy exact_policy() { return TruncationPolicy{}; }

struct Case {
  const char* name;
  CircuitLayout layout;
};

std::vector<Case> oracle_cases() {
  CircuitLayout chr_fixed = chr_rect_layout(2, 3);
  return {
      {"brickwork 3x3", brickwork_layout(3, 3)},
      {"brickwork 3x4", brickwork_layout(3, 4)},
      {"brickwork 4x3", brickwork_layout(4, 3)},
      {"extended 2x(r=1,v=1)", extended_brickwork_layout(2, 1, 1)},
      {"extended 2x(r=2,v=1)", extended_brickwork_layout(2, 2, 1)},
      {"chr 3x3", chr_layout(3)},
      {"chr 2x3", chr_rect_layout(2, 3)},
      {"chr q=3 2x2", chr_layout(2, 3)},
      {"brickwork q=3 2x3", brickwork_layout(2, 3, 3)},
      {"product 3x3", product_layout(3, 3)},
      {"chain 1x8", brick_chain_layout(8)},
  };
}

}  // namespace

TEST_CASE("exact mode reproduces the oracle distribution") {
  for (const Case& c : oracle_cases()) {
    INFO(c.name);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const CircuitInstance inst = make_instance(c.layout, seed);
      const OutputDistribution exact = exact_distribution(inst);
      const SebdDistribution sebd = sebd_distribution(inst, exact_policy());
      CHECK(sebd.fail_probability == 0.0);
      CHECK(sampler_total_variation(sebd, exact) < 1e-8);
    }
  }
}

TEST_CASE("exact-mode probabilities match the oracle on CHR 2x3") {
  const CircuitInstance inst = make_instance(chr_rect_layout(2, 3), 5);
  const OutputDistribution exact = exact_distribution(inst);
  RandomStream rng(6);
  double total = 0.0;
  for (std::size_t idx = 0; idx < exact.probabilities.size(); ++idx)
    total += sebd_probability(inst, exact_policy(), outcome_from_index(idx, 6, 2)).probability;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  for (int i = 0; i < 50; ++i) {
    const std::size_t idx = rng.categorical(std::vector<double>(exact.probabilities.size(), 1.0));
    const SebdProbability p = sebd_probability(inst, exact_policy(), outcome_from_index(idx, 6, 2));
    if (exact.probabilities[idx] > 1e-12) {
      CHECK(std::abs(p.probability - exact.probabilities[idx]) / exact.probabilities[idx] < 1e-9);
      CHECK(std::abs(p.log_probability - std::log(exact.probabilities[idx])) < 1e-9);
    }
  }
  CHECK_THROWS_AS(sebd_probability(inst, exact_policy(), Outcome{0, 1}), InvalidArgument);
}

TEST_CASE("truncated probabilities obey the uniform-string bound") {
  const CircuitInstance inst = make_instance(brickwork_layout(2, 3), 3);
  const OutputDistribution exact = exact_distribution(inst);
  for (double eps : {1e-3, 1e-2}) {
    TruncationPolicy policy;
    policy.eps = eps;
    double mean_abs = 0.0;
    for (std::size_t idx = 0; idx < exact.probabilities.size(); ++idx) {
      const double p = sebd_probability(inst, policy, outcome_from_index(idx, 6, 2)).probability;
      mean_abs += std::abs(p - exact.probabilities[idx]);
    }
    mean_abs /= static_cast<double>(exact.probabilities.size());
    const SebdDistribution dist = sebd_distribution(inst, policy);
    const double bound = (2.0 * uniform_budget_bound(2, 3, eps, 0.0) + dist.fail_probability) / 64.0;
    CHECK(mean_abs <= bound);
  }
}

TEST_CASE("a zero conditional probability short-circuits to exact zero") {
  const CircuitInstance inst = make_instance(product_layout(1, 2), 1);
  CircuitInstance ones = inst;
  ones.gates[0] = RowMatrix::Identity(2, 2);
  ones.gates[1] = RowMatrix::Identity(2, 2);
  const SebdProbability p = sebd_probability(ones, exact_policy(), {1, 0});
  CHECK(p.probability == 0.0);
  CHECK(p.log_probability == -std::numeric_limits<double>::infinity());
}

TEST_CASE("bond cap failures yield FAIL and probability zero") {
  const CircuitInstance inst = make_instance(brickwork_layout(4, 6), 2);
  TruncationPolicy tight;
  tight.max_bond = 1;
  const SebdSample s = sebd_sample(inst, SebdOptions{tight, 0, {}, false}, 3);
  CHECK(s.failed);
  CHECK(s.outcome.empty());
  CHECK(s.max_bond > 1);
  const SebdProbability p = sebd_probability(inst, tight, Outcome(24, 0));
  CHECK(p.failed);
  CHECK(p.probability == 0.0);
}

TEST_CASE("product circuits never fail at D = 1") {
  const CircuitInstance inst = make_instance(product_layout(3, 5), 9);
  TruncationPolicy policy;
  policy.eps = 1.0;
  policy.max_bond = 1;
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(!sebd_sample(inst, SebdOptions{policy, 0, {}, false}, s).failed);
  const SebdDistribution d = sebd_distribution(inst, policy);
  CHECK(sampler_total_variation(d, exact_distribution(inst)) < 1e-10);
}

TEST_CASE("sampling is deterministic given seeds") {
  const CircuitInstance inst = make_instance(chr_layout(4), 12);
  SebdOptions opt;
  opt.policy.eps = 1e-8;
  opt.record_stride = 1;
  const SebdSample a = sebd_sample(inst, opt, 77);
  const SebdSample b = sebd_sample(inst, opt, 77);
  CHECK(a.outcome == b.outcome);
  CHECK(a.log_probability == b.log_probability);
  CHECK(a.log.lambda() == b.log.lambda());
  REQUIRE(a.records.size() == 3);
  CHECK(a.records[1].renyi_one == b.records[1].renyi_one);
}

TEST_CASE("empirical frequencies match the oracle") {
  const CircuitInstance inst = make_instance(brickwork_layout(2, 3), 17);
  const OutputDistribution exact = exact_distribution(inst);
  const int n = 100000;
  std::vector<int> counts(exact.probabilities.size(), 0);
  for (int i = 0; i < n; ++i) {
    const SebdSample s = sebd_sample(inst, SebdOptions{}, derive_seed(4, static_cast<std::uint64_t>(i)));
    ++counts[outcome_index(s.outcome, 2)];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double p = exact.probabilities[k];
    const double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(counts[k] - n * p) <= 4.0 * sigma + 1.0);
  }
}

TEST_CASE("certificates bound the exact TV on truncated runs") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    for (double eps : {1e-4, 1e-3, 1e-2}) {
      const CircuitInstance inst = make_instance(brickwork_layout(3, 4), seed);
      TruncationPolicy policy;
      policy.eps = eps;
      const SebdDistribution d = sebd_distribution(inst, policy);
      const double tv = sampler_total_variation(d, exact_distribution(inst));
      const ErrorCertificate c = error_certificate(d);
      CHECK(tv <= c.tv_bound + 1e-12);
      CHECK(c.tv_bound <= uniform_budget_bound(3, 4, eps, 0.0) + c.split_term + 1e-12);
      ++checked;
    }
  CHECK(checked == 18);
}

TEST_CASE("certificate arithmetic") {
  const ErrorCertificate empty = error_certificate(TruncationLog{}, 0.0);
  CHECK(empty.tv_bound == 0.0);
  CHECK(empty.lambda_bound == 0.0);
  TruncationLog log;
  log.append({1, 0, 5e-5, std::sqrt(5e-5), 1, false});
  const ErrorCertificate one = error_certificate(log, 0.02, 0.95);
  CHECK(one.sqrt_term == doctest::Approx(0.01));
  CHECK(one.tv_bound == doctest::Approx(0.03));
  CHECK(one.lambda_bound == doctest::Approx(std::sqrt(2.0) * std::sqrt(5e-5) + 0.02));
  CHECK(one.confidence.value() == 0.95);
  CHECK(uniform_budget_bound(4, 9, 1e-8, 0.0) == doctest::Approx(9.0 * std::sqrt(8e-8)));
}

TEST_CASE("Clopper-Pearson failure intervals") {
  // 0 of 3000 at 95%: upper = 1 - 0.025^(1/3000).
  const Interval none = failure_confidence_interval(3000, 0, 0.95);
  CHECK(none.lower == 0.0);
  CHECK(none.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 3000.0)).epsilon(1e-9));
  CHECK(none.upper > 0.9e-3);
  CHECK(none.upper < 1.3e-3);
  CHECK(failure_confidence_interval(10, 10, 0.95).upper == 1.0);
  // Frozen reference: 3 of 20 at 95% is [0.03207, 0.37893].
  const Interval mid = failure_confidence_interval(20, 3, 0.95);
  CHECK(mid.lower == doctest::Approx(0.032071).epsilon(1e-4));
  CHECK(mid.upper == doctest::Approx(0.378927).epsilon(1e-4));
  double prev_width = 0.0;
  for (double c : {0.5, 0.8, 0.9, 0.95, 0.99}) {
    const Interval i = failure_confidence_interval(200, 7, c);
    CHECK(i.upper - i.lower > prev_width);
    prev_width = i.upper - i.lower;
  }
  CHECK_THROWS_AS(failure_confidence_interval(5, 6, 0.9), InvalidArgument);
}

TEST_CASE("product circuits carry no entanglement") {
  ScanConfig config;
  config.spec.family = "product";
  config.sizes = {4, 6};
  config.trials = 3;
  const ScanResult r = entanglement_scan(config);
  REQUIRE(r.summary.size() == 2);
  for (const ScanSummary& s : r.summary) {
    CHECK(s.mean_renyi_one == 0.0);
    CHECK(s.mean_renyi_half == 0.0);
    CHECK(s.instances == 3);
  }
}

TEST_CASE("scans are independent of the worker count") {
  ScanConfig config;
  config.sizes = {5};
  config.trials = 4;
  config.policy.eps = 1e-10;
  const ScanResult one = entanglement_scan(config);
  config.workers = 3;
  const ScanResult three = entanglement_scan(config);
  REQUIRE(one.rows.size() == three.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) CHECK(one.rows[i].record.renyi_one == three.rows[i].record.renyi_one);
  CHECK(one.summary[0].mean_renyi_one == three.summary[0].mean_renyi_one);
  CHECK(one.summary[0].mean_renyi_one > 0.0);
}

TEST_CASE("family names") {
  CHECK(family_layout({"chr_fixed", 2, 1, 1}, 2, 2).family == "chr_fixed");
  CHECK(family_layout({"extended_brickwork", 2, 2, 1}, 3, 0).cols == 8);
  CHECK_THROWS_AS(family_layout({"hexagonal", 2, 1, 1}, 2, 2), InvalidArgument);
}
