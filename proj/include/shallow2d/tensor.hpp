// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "shallow2d/random.hpp"

namespace shallow2d {

using cplx = std::complex<double>;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<std::size_t>;

// Dense complex array stored in row-major order: the last axis varies
// fastest. Every reshape is a reinterpretation of this order.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Shape shape);
  ComplexTensor(Shape shape, std::vector<cplx> data);

  static ComplexTensor from_matrix(const RowMatrix& m);
  static ComplexTensor scalar(cplx value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const;

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& values() const { return data_; }
  std::vector<cplx>& values() { return data_; }

  cplx& at(const std::vector<std::size_t>& index);
  const cplx& at(const std::vector<std::size_t>& index) const;

  ComplexTensor reshaped(Shape shape) const&;
  ComplexTensor reshaped(Shape shape) &&;
  // Axis k of the result is axis perm[k] of this tensor.
  ComplexTensor permuted(const std::vector<std::size_t>& perm) const;
  ComplexTensor conjugated() const;

  // Flattens the first `row_axes` axes into rows and the rest into columns.
  RowMatrix as_matrix(std::size_t row_axes) const;
  Eigen::Map<const RowMatrix> matrix_view(std::size_t rows, std::size_t cols) const;
  Eigen::Map<RowMatrix> matrix_view(std::size_t rows, std::size_t cols);

  double norm() const;
  ComplexTensor& operator*=(cplx factor);

 private:
  Shape shape_;
  std::vector<cplx> data_;
};

ComplexTensor operator*(cplx factor, const ComplexTensor& t);

std::size_t shape_size(const Shape& shape);

// Sums a over axes_a against b over axes_b (paired in order). The result
// carries the free axes of a in their original order, then those of b.
ComplexTensor contract(const ComplexTensor& a, const std::vector<std::size_t>& axes_a, const ComplexTensor& b,
                       const std::vector<std::size_t>& axes_b);

// result[..., i', ...] = sum_i op(i', i) t[..., i, ...] where the multi-index
// i runs over `axes` (first listed axis most significant).
ComplexTensor apply_operator(const ComplexTensor& t, const std::vector<std::size_t>& axes, const RowMatrix& op);

struct SvdOutcome {
  ComplexTensor left_isometry;         // m.rows x k
  std::vector<double> singular_values; // k kept values, non-increasing
  ComplexTensor right_isometry;        // k x m.cols, rows orthonormal (this is V^dagger)
  double discarded_weight = 0.0;       // sum of squares of dropped values
  double discarded_sum = 0.0;          // sum of dropped values
  std::size_t full_rank = 0;           // number of values before truncation
};

struct TruncationRule {
  std::optional<std::size_t> max_rank;  // nullopt = unbounded
  double weight_budget = 0.0;
  // Values within this distance (relative to the largest) of the last kept
  // value are kept as well.
  double degeneracy_tolerance = 0.0;
  // Values at or below this fraction of the largest are numerically zero
  // and always dropped (their weight is still reported).
  double zero_tolerance = 0.0;
};

// Number of leading singular values kept under `rule`; `s` non-increasing.
std::size_t truncation_rank(const std::vector<double>& s, const TruncationRule& rule);

SvdOutcome svd_truncate(const RowMatrix& m, const TruncationRule& rule);
SvdOutcome svd_truncate(const ComplexTensor& m, std::optional<std::size_t> max_rank, double weight_budget);

struct QrOutcome {
  RowMatrix q;  // isometry, rows x min(rows, cols)
  RowMatrix r;  // min(rows, cols) x cols
};
QrOutcome thin_qr(const RowMatrix& m);

RowMatrix haar_matrix(std::size_t dim, RandomStream& rng);
ComplexTensor haar_unitary(std::size_t dim, RandomStream& rng);

// Max-entry deviation of m^dagger m from the identity; zero for unitaries
// and for isometries with orthonormal columns.
double unitarity_error(const RowMatrix& m);

}  // namespace shallow2d
