#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "shallow2d/errors.hpp"
#include "shallow2d/tensor.hpp"

using namespace shallow2d;

namespace {

ComplexTensor random_tensor(Shape shape, RandomStream& rng) {
  ComplexTensor t(std::move(shape));
  for (cplx& x : t.values()) x = rng.complex_normal();
  return t;
}

}  // namespace

TEST_CASE("splitmix64 reference outputs") {
  // Published first outputs of splitmix64 started from state 0.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ULL);
  CHECK(splitmix64(state) == 0x06C45D188009454FULL);
}

TEST_CASE("derived seeds are distinct and reproducible") {
  CHECK(derive_seed(7, 0) == derive_seed(7, 0));
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("uniform and categorical streams") {
  RandomStream rng(3);
  double mean = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(std::abs(mean / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[rng.categorical({0.2, 0.0, 0.8})];
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] / double(n) - 0.2) < 4.0 * std::sqrt(0.16 / n));
  CHECK_THROWS_AS(rng.categorical({0.0, 0.0}), NumericalFailure);
}

TEST_CASE("contract agrees with an explicit index loop") {
  RandomStream rng(11);
  const ComplexTensor a = random_tensor({2, 3, 4}, rng);
  const ComplexTensor b = random_tensor({4, 5, 3}, rng);
  const ComplexTensor c = contract(a, {1, 2}, b, {2, 0});
  REQUIRE(c.shape() == Shape{2, 5});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      cplx expect = 0.0;
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 4; ++l) expect += a.at({i, k, l}) * b.at({l, j, k});
      CHECK(std::abs(c.at({i, j}) - expect) < 1e-12);
    }
  CHECK_THROWS_AS(contract(a, {0}, b, {0}), InvalidArgument);
}

TEST_CASE("permutation round trip and axis mapping") {
  RandomStream rng(5);
  const ComplexTensor a = random_tensor({2, 3, 4}, rng);
  const ComplexTensor p = a.permuted({2, 0, 1});
  REQUIRE(p.shape() == Shape{4, 2, 3});
  CHECK(p.at({3, 1, 2}) == a.at({1, 2, 3}));
  const ComplexTensor back = p.permuted({1, 2, 0});
  CHECK(back.values() == a.values());
}

TEST_CASE("apply_operator matches the Kronecker product") {
  RandomStream rng(9);
  const ComplexTensor psi = random_tensor({2, 3, 2}, rng);
  const RowMatrix u = haar_matrix(4, rng);
  // Acting on axes (2, 0): axis 2 is the most significant gate index.
  const ComplexTensor out = apply_operator(psi, {2, 0}, u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        cplx expect = 0.0;
        for (std::size_t i2 = 0; i2 < 2; ++i2)
          for (std::size_t k2 = 0; k2 < 2; ++k2)
            expect += u(static_cast<Eigen::Index>(k * 2 + i), static_cast<Eigen::Index>(k2 * 2 + i2)) *
                      psi.at({i2, j, k2});
        CHECK(std::abs(out.at({i, j, k}) - expect) < 1e-12);
      }
}

TEST_CASE("svd reconstructs and orders singular values") {
  RandomStream rng(17);
  const ComplexTensor m = random_tensor({5, 3}, rng);
  const SvdOutcome svd = svd_truncate(m, std::nullopt, 0.0);
  REQUIRE(svd.singular_values.size() == 3);
  CHECK(std::is_sorted(svd.singular_values.rbegin(), svd.singular_values.rend()));
  RowMatrix us = svd.left_isometry.as_matrix(1);
  for (std::size_t i = 0; i < 3; ++i) us.col(static_cast<Eigen::Index>(i)) *= svd.singular_values[i];
  const RowMatrix rebuilt = us * svd.right_isometry.as_matrix(1);
  CHECK((rebuilt - m.as_matrix(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(unitarity_error(svd.left_isometry.as_matrix(1)) < 1e-12);
}

TEST_CASE("hand-built Schmidt pair truncates to rank one") {
  // sqrt(0.9995)|00> + sqrt(0.0005)|11>: squared weights (0.9995, 0.0005).
  ComplexTensor m({2, 2});
  m.at({0, 0}) = std::sqrt(0.9995);
  m.at({1, 1}) = std::sqrt(0.0005);
  const SvdOutcome svd = svd_truncate(m, std::nullopt, 1e-3);
  CHECK(svd.singular_values.size() == 1);
  CHECK(svd.discarded_weight == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(svd.discarded_sum == doctest::Approx(std::sqrt(5e-4)).epsilon(1e-12));
  const SvdOutcome keep = svd_truncate(m, std::nullopt, 4e-4);
  CHECK(keep.singular_values.size() == 2);
  CHECK(keep.discarded_weight == 0.0);
}

TEST_CASE("truncation rank rules") {
  TruncationRule rule;
  rule.weight_budget = 0.025;
  // Suffix squared sums: 0.01 (drop 1), 0.02 (drop 2), 0.12 (stop).
  CHECK(truncation_rank({0.9, 0.3162277660168379, 0.1, 0.1}, rule) == 2);
  rule.weight_budget = 0.015;
  rule.degeneracy_tolerance = 1e-12;
  // The value tied with the last kept one is retained.
  CHECK(truncation_rank({0.9, 0.1, 0.1, 0.01}, rule) == 3);
  rule.max_rank = 1;
  CHECK(truncation_rank({0.9, 0.3, 0.2}, rule) == 1);
  TruncationRule zero;
  zero.zero_tolerance = 1e-13;
  CHECK(truncation_rank({1.0, 1e-15, 0.0}, zero) == 1);
  // Exact zeros fit any budget, including zero.
  CHECK(truncation_rank({1.0, 1e-15, 0.0}, TruncationRule{}) == 2);
  TruncationRule all;
  all.weight_budget = 10.0;
  CHECK(truncation_rank({0.5, 0.5}, all) == 1);
}

TEST_CASE("thin QR factors") {
  RandomStream rng(23);
  const RowMatrix m = random_tensor({6, 3}, rng).as_matrix(1);
  const QrOutcome qr = thin_qr(m);
  CHECK(qr.q.cols() == 3);
  CHECK((qr.q * qr.r - m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(unitarity_error(qr.q) < 1e-12);
}

TEST_CASE("Haar unitaries: unitarity, determinism and first moment") {
  RandomStream a(99), b(99);
  const RowMatrix u = haar_matrix(4, a);
  const RowMatrix v = haar_matrix(4, b);
  CHECK(unitarity_error(u) < 1e-10);
  CHECK((u - v).cwiseAbs().maxCoeff() == 0.0);
  // E|U_00|^2 = 1/d and E|U_00|^4 = 2/(d(d+1)).
  RandomStream rng(1);
  const int n = 40000;
  double m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = std::norm(haar_matrix(4, rng)(0, 0));
    m2 += p;
    m4 += p * p;
  }
  m2 /= n;
  m4 /= n;
  const double sd2 = std::sqrt((0.1 - 0.0625) / n);  // Var|U00|^2 = 2/(d(d+1)) - 1/d^2
  CHECK(std::abs(m2 - 0.25) < 4.0 * sd2);
  CHECK(std::abs(m4 - 0.1) < 0.01);
}
