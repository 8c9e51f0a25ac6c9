// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/tensor.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shallow2d/errors.hpp"

namespace shallow2d {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

ComplexTensor::ComplexTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), cplx(0.0, 0.0)) {}

ComplexTensor::ComplexTensor(Shape shape, std::vector<cplx> data) : shape_(std::move(shape)), data_(std::move(data)) {
  require(shape_size(shape_) == data_.size(), "ComplexTensor: shape does not match data length");
}

ComplexTensor ComplexTensor::from_matrix(const RowMatrix& m) {
  ComplexTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  std::copy(m.data(), m.data() + m.size(), t.data_.begin());
  return t;
}

ComplexTensor ComplexTensor::scalar(cplx value) { return ComplexTensor({}, {value}); }

std::size_t ComplexTensor::extent(std::size_t axis) const {
  require(axis < shape_.size(), "ComplexTensor: axis out of range");
  return shape_[axis];
}

namespace {
std::size_t flat_index(const Shape& shape, const std::vector<std::size_t>& index) {
  require(index.size() == shape.size(), "ComplexTensor: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    require(index[k] < shape[k], "ComplexTensor: index out of range");
    flat = flat * shape[k] + index[k];
  }
  return flat;
}
}  // namespace

cplx& ComplexTensor::at(const std::vector<std::size_t>& index) { return data_[flat_index(shape_, index)]; }
const cplx& ComplexTensor::at(const std::vector<std::size_t>& index) const {
  return data_[flat_index(shape_, index)];
}

ComplexTensor ComplexTensor::reshaped(Shape shape) const& {
  ComplexTensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

ComplexTensor ComplexTensor::reshaped(Shape shape) && {
  require(shape_size(shape) == data_.size(), "reshape: total size must be preserved");
  shape_ = std::move(shape);
  return std::move(*this);
}

ComplexTensor ComplexTensor::permuted(const std::vector<std::size_t>& perm) const {
  const std::size_t r = shape_.size();
  require(perm.size() == r, "permute: permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    require(p < r && !seen[p], "permute: not a permutation");
    seen[p] = true;
  }
  bool identity = true;
  for (std::size_t k = 0; k < r; ++k) identity = identity && perm[k] == k;
  if (identity) return *this;

  Shape new_shape(r);
  for (std::size_t k = 0; k < r; ++k) new_shape[k] = shape_[perm[k]];
  std::vector<std::size_t> old_strides(r, 1);
  for (std::size_t k = r; k-- > 1;) old_strides[k - 1] = old_strides[k] * shape_[k];
  // Stride in the source for each axis of the result.
  std::vector<std::size_t> src_stride(r);
  for (std::size_t k = 0; k < r; ++k) src_stride[k] = old_strides[perm[k]];

  ComplexTensor out(new_shape);
  const std::size_t total = data_.size();
  if (total == 0) return out;
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  const std::size_t inner = r ? new_shape[r - 1] : 1;
  const std::size_t inner_stride = r ? src_stride[r - 1] : 0;
  for (std::size_t dst = 0; dst < total; dst += inner) {
    const cplx* from = data_.data() + src;
    cplx* to = out.data_.data() + dst;
    for (std::size_t j = 0; j < inner; ++j) to[j] = from[j * inner_stride];
    // Advance the multi-index over all but the innermost axis.
    for (std::size_t k = r - 1; k-- > 0;) {
      ++counter[k];
      src += src_stride[k];
      if (counter[k] < new_shape[k]) break;
      src -= counter[k] * src_stride[k];
      counter[k] = 0;
    }
  }
  return out;
}

ComplexTensor ComplexTensor::conjugated() const {
  ComplexTensor out = *this;
  for (cplx& z : out.data_) z = std::conj(z);
  return out;
}

RowMatrix ComplexTensor::as_matrix(std::size_t row_axes) const {
  require(row_axes <= shape_.size(), "as_matrix: too many row axes");
  std::size_t rows = 1;
  for (std::size_t k = 0; k < row_axes; ++k) rows *= shape_[k];
  const std::size_t cols = rows == 0 ? 0 : data_.size() / rows;
  return matrix_view(rows, cols);
}

Eigen::Map<const RowMatrix> ComplexTensor::matrix_view(std::size_t rows, std::size_t cols) const {
  require(rows * cols == data_.size(), "matrix_view: size mismatch");
  return Eigen::Map<const RowMatrix>(data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Eigen::Map<RowMatrix> ComplexTensor::matrix_view(std::size_t rows, std::size_t cols) {
  require(rows * cols == data_.size(), "matrix_view: size mismatch");
  return Eigen::Map<RowMatrix>(data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

double ComplexTensor::norm() const {
  double s = 0.0;
  for (const cplx& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

ComplexTensor& ComplexTensor::operator*=(cplx factor) {
  for (cplx& z : data_) z *= factor;
  return *this;
}

ComplexTensor operator*(cplx factor, const ComplexTensor& t) {
  ComplexTensor out = t;
  out *= factor;
  return out;
}

ComplexTensor contract(const ComplexTensor& a, const std::vector<std::size_t>& axes_a, const ComplexTensor& b,
                       const std::vector<std::size_t>& axes_b) {
  require(axes_a.size() == axes_b.size(), "contract: axis lists differ in length");
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  std::size_t inner = 1;
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    require(axes_a[k] < a.rank() && axes_b[k] < b.rank(), "contract: axis index out of range");
    require(!used_a[axes_a[k]] && !used_b[axes_b[k]], "contract: repeated axis");
    require(a.shape()[axes_a[k]] == b.shape()[axes_b[k]],
            "contract: extent mismatch on axis pair " + std::to_string(k));
    used_a[axes_a[k]] = used_b[axes_b[k]] = true;
    inner *= a.shape()[axes_a[k]];
  }
  std::vector<std::size_t> perm_a, perm_b;
  Shape out_shape;
  std::size_t rows = 1, cols = 1;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!used_a[k]) {
      perm_a.push_back(k);
      out_shape.push_back(a.shape()[k]);
      rows *= a.shape()[k];
    }
  perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
  perm_b = axes_b;
  for (std::size_t k = 0; k < b.rank(); ++k)
    if (!used_b[k]) {
      perm_b.push_back(k);
      out_shape.push_back(b.shape()[k]);
      cols *= b.shape()[k];
    }
  const ComplexTensor pa = a.permuted(perm_a);
  const ComplexTensor pb = b.permuted(perm_b);
  ComplexTensor out(out_shape);
  out.matrix_view(rows, cols).noalias() = pa.matrix_view(rows, inner) * pb.matrix_view(inner, cols);
  return out;
}

ComplexTensor apply_operator(const ComplexTensor& t, const std::vector<std::size_t>& axes, const RowMatrix& op) {
  std::size_t k = 1;
  std::vector<bool> chosen(t.rank(), false);
  for (std::size_t ax : axes) {
    require(ax < t.rank() && !chosen[ax], "apply_operator: bad axis list");
    chosen[ax] = true;
    k *= t.shape()[ax];
  }
  require(static_cast<std::size_t>(op.rows()) == k && static_cast<std::size_t>(op.cols()) == k,
          "apply_operator: operator dimension mismatch");
  std::vector<std::size_t> perm;
  for (std::size_t ax = 0; ax < t.rank(); ++ax)
    if (!chosen[ax]) perm.push_back(ax);
  perm.insert(perm.end(), axes.begin(), axes.end());
  ComplexTensor moved = t.permuted(perm);
  const std::size_t rest = k == 0 ? 0 : moved.size() / k;
  auto view = moved.matrix_view(rest, k);
  RowMatrix updated = view * op.transpose();
  view = updated;
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  return moved.permuted(inverse);
}

std::size_t truncation_rank(const std::vector<double>& s, const TruncationRule& rule) {
  const std::size_t n = s.size();
  if (n == 0) return 0;
  const double top = s.front();
  std::size_t keep = n;
  if (rule.zero_tolerance > 0.0)
    while (keep > 1 && s[keep - 1] <= rule.zero_tolerance * top) --keep;
  // Largest trailing suffix whose squared sum stays within budget.
  double tail = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    if (j >= keep) {
      tail += s[j] * s[j];
      continue;
    }
    const double next = tail + s[j] * s[j];
    if (j == 0 || next > rule.weight_budget) break;
    tail = next;
    keep = j;
  }
  if (keep == 0) keep = 1;
  if (rule.degeneracy_tolerance > 0.0) {
    const double last = s[keep - 1];
    while (keep < n && s[keep] > rule.zero_tolerance * top &&
           std::abs(s[keep] - last) <= rule.degeneracy_tolerance * top)
      ++keep;
  }
  if (rule.max_rank && keep > *rule.max_rank) keep = std::max<std::size_t>(*rule.max_rank, 1);
  return keep;
}

SvdOutcome svd_truncate(const RowMatrix& m, const TruncationRule& rule) {
  require(m.rows() > 0 && m.cols() > 0, "svd_truncate: empty matrix");
  Eigen::MatrixXcd work = m;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(work, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalFailure("svd_truncate: SVD did not converge");
  const Eigen::VectorXd& sv = svd.singularValues();
  const std::size_t full = static_cast<std::size_t>(sv.size());
  std::vector<double> s(sv.data(), sv.data() + full);
  for (double& x : s) x = std::max(x, 0.0);
  // Eigen returns non-increasing values; a stable sort keeps the earlier
  // index first on exact ties.
  std::vector<std::size_t> order(full);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<double> sorted(full);
  for (std::size_t i = 0; i < full; ++i) sorted[i] = s[order[i]];

  const std::size_t keep = truncation_rank(sorted, rule);
  SvdOutcome out;
  out.full_rank = full;
  out.singular_values.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(keep));
  for (std::size_t j = keep; j < full; ++j) {
    out.discarded_weight += sorted[j] * sorted[j];
    out.discarded_sum += sorted[j];
  }
  RowMatrix u(m.rows(), static_cast<Eigen::Index>(keep));
  RowMatrix vh(static_cast<Eigen::Index>(keep), m.cols());
  for (std::size_t j = 0; j < keep; ++j) {
    u.col(static_cast<Eigen::Index>(j)) = svd.matrixU().col(static_cast<Eigen::Index>(order[j]));
    vh.row(static_cast<Eigen::Index>(j)) = svd.matrixV().col(static_cast<Eigen::Index>(order[j])).adjoint();
  }
  out.left_isometry = ComplexTensor::from_matrix(u);
  out.right_isometry = ComplexTensor::from_matrix(vh);
  return out;
}

SvdOutcome svd_truncate(const ComplexTensor& m, std::optional<std::size_t> max_rank, double weight_budget) {
  require(m.rank() == 2, "svd_truncate: input must be a matrix");
  require(weight_budget >= 0.0, "svd_truncate: weight budget must be non-negative");
  require(!max_rank || *max_rank >= 1, "svd_truncate: max_rank must be positive");
  TruncationRule rule;
  rule.max_rank = max_rank;
  rule.weight_budget = weight_budget;
  return svd_truncate(m.as_matrix(1), rule);
}

QrOutcome thin_qr(const RowMatrix& m) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::MatrixXcd work = m;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(work);
  QrOutcome out;
  out.q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

RowMatrix haar_matrix(std::size_t dim, RandomStream& rng) {
  require(dim >= 1, "haar_unitary: dimension must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  for (Eigen::Index j = 0; j < d; ++j) {
    const cplx r = qr.matrixQR()(j, j);
    const double a = std::abs(r);
    // Makes R's diagonal positive, so that Q is Haar distributed.
    if (a > 0.0) q.col(j) *= r / a;
  }
  return q;
}

ComplexTensor haar_unitary(std::size_t dim, RandomStream& rng) { return ComplexTensor::from_matrix(haar_matrix(dim, rng)); }

double unitarity_error(const RowMatrix& m) {
  const RowMatrix d = m.adjoint() * m - RowMatrix::Identity(m.cols(), m.cols());
  return d.cwiseAbs().maxCoeff();
}

}  // namespace shallow2d
