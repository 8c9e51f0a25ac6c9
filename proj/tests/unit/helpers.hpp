// Shared fixtures for the unit tests.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "shallow2d/tensor.hpp"

namespace testing_support {

using shallow2d::cplx;

// |<a|b>| for unit vectors; 1 means equal up to a global phase.
inline double overlap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return std::abs(acc);
}

inline double norm2(const std::vector<cplx>& a) {
  double acc = 0.0;
  for (const cplx& x : a) acc += std::norm(x);
  return std::sqrt(acc);
}

// max_i |a_i - b_i| after aligning the global phase of b to a.
inline double phase_aligned_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(b[i]) * a[i];
  const cplx phase = std::abs(acc) > 0.0 ? acc / std::abs(acc) : cplx(1.0);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - phase * b[i]));
  return d;
}

inline shallow2d::RowMatrix kron(const shallow2d::RowMatrix& a, const shallow2d::RowMatrix& b) {
  shallow2d::RowMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace testing_support
