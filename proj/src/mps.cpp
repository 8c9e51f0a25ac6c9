// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/mps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shallow2d/errors.hpp"

namespace shallow2d {

void TruncationLog::append(const TruncationRecord& record) {
  records_.push_back(record);
  lambda_ += record.discarded_sum;
  if (record.split) {
    split_term_ += std::sqrt(2.0 * record.discarded_weight);
    return;
  }
  const std::size_t i = static_cast<std::size_t>(std::max(record.iteration, 0));
  if (iteration_weights_.size() <= i) iteration_weights_.resize(i + 1, 0.0);
  iteration_weights_[i] += record.discarded_weight;
}

void TruncationLog::merge(const TruncationLog& other) {
  for (const TruncationRecord& r : other.records_) append(r);
}

double TruncationLog::eps_total() const {
  return std::accumulate(iteration_weights_.begin(), iteration_weights_.end(), 0.0);
}

double TruncationLog::sqrt_term() const {
  double acc = 0.0;
  for (double e : iteration_weights_) acc += std::sqrt(2.0 * e);
  return acc;
}

namespace {

using StridedSlice = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

// Matrix A_p (left x right) of physical index p in a (l, p, r) tensor.
StridedSlice physical_slice(const ComplexTensor& a, std::size_t p) {
  const auto dl = static_cast<Eigen::Index>(a.extent(0));
  const auto dp = a.extent(1);
  const auto dr = a.extent(2);
  return StridedSlice(a.data() + p * dr, dl, static_cast<Eigen::Index>(dr),
                      Eigen::OuterStride<>(static_cast<Eigen::Index>(dp * dr)));
}

std::size_t product_of(const std::vector<int>& dims, std::size_t begin, std::size_t end) {
  std::size_t p = 1;
  for (std::size_t i = begin; i < end; ++i) p *= static_cast<std::size_t>(dims[i]);
  return p;
}

// Gate with its two tensor factors exchanged: |j,i> <-> |i,j>.
RowMatrix swap_factors(const RowMatrix& gate, std::size_t da, std::size_t db) {
  const ComplexTensor g = ComplexTensor::from_matrix(gate).reshaped({da, db, da, db});
  return g.permuted({1, 0, 3, 2}).as_matrix(2);
}

ComplexTensor from_rows(const RowMatrix& m, Shape shape) {
  return ComplexTensor::from_matrix(m).reshaped(std::move(shape));
}

}  // namespace

MatrixProductState::MatrixProductState(std::size_t n_sites)
    : tensors_(n_sites, ComplexTensor({1, 1, 1}, {cplx(1.0)})), slots_(n_sites) {
  require(n_sites >= 1, "mps: at least one site is required");
}

MatrixProductState MatrixProductState::product_state(const std::vector<int>& dims,
                                                     const std::vector<int>& basis_indices) {
  require(dims.size() == basis_indices.size(), "product_state: dims and basis indices differ in length");
  MatrixProductState mps(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    require(dims[i] >= 1, "product_state: dimensions must be positive");
    require(basis_indices[i] >= 0 && basis_indices[i] < dims[i], "product_state: basis index out of range");
    ComplexTensor t({1, static_cast<std::size_t>(dims[i]), 1});
    t.values()[static_cast<std::size_t>(basis_indices[i])] = 1.0;
    mps.tensors_[i] = std::move(t);
    mps.slots_[i] = {dims[i]};
  }
  return mps;
}

std::size_t MatrixProductState::physical_dim(std::size_t pos) const { return tensors_.at(pos).extent(1); }

std::size_t MatrixProductState::bond_dim(std::size_t bond) const {
  require(bond + 1 < tensors_.size(), "bond index out of range");
  return tensors_[bond].extent(2);
}

std::size_t MatrixProductState::max_bond_dim() const {
  std::size_t m = 1;
  for (std::size_t b = 0; b + 1 < tensors_.size(); ++b) m = std::max(m, tensors_[b].extent(2));
  return m;
}

void MatrixProductState::shift_center_right() {
  const std::size_t c = center_;
  const ComplexTensor& a = tensors_[c];
  const std::size_t dl = a.extent(0), dp = a.extent(1);
  QrOutcome qr = thin_qr(a.as_matrix(2));
  const std::size_t k = static_cast<std::size_t>(qr.q.cols());
  tensors_[c] = from_rows(qr.q, {dl, dp, k});
  const ComplexTensor& b = tensors_[c + 1];
  const std::size_t dp2 = b.extent(1), dr2 = b.extent(2);
  const RowMatrix next = qr.r * b.as_matrix(1);
  tensors_[c + 1] = from_rows(next, {k, dp2, dr2});
  center_ = c + 1;
}

void MatrixProductState::shift_center_left() {
  const std::size_t c = center_;
  const ComplexTensor& a = tensors_[c];
  const std::size_t dp = a.extent(1), dr = a.extent(2);
  QrOutcome qr = thin_qr(a.as_matrix(1).adjoint());
  const std::size_t k = static_cast<std::size_t>(qr.q.cols());
  tensors_[c] = from_rows(qr.q.adjoint(), {k, dp, dr});
  const ComplexTensor& b = tensors_[c - 1];
  const std::size_t dl2 = b.extent(0), dp2 = b.extent(1);
  const RowMatrix prev = b.as_matrix(2) * qr.r.adjoint();
  tensors_[c - 1] = from_rows(prev, {dl2, dp2, k});
  center_ = c - 1;
}

void MatrixProductState::move_center(std::size_t pos) {
  require(pos < tensors_.size(), "move_center: position out of range");
  while (center_ < pos) shift_center_right();
  while (center_ > pos) shift_center_left();
}

std::size_t MatrixProductState::absorb(std::size_t pos, int dim) {
  require(pos < tensors_.size(), "absorb: position out of range");
  require(dim >= 1, "absorb: dimension must be positive");
  const ComplexTensor& a = tensors_[pos];
  const std::size_t dl = a.extent(0), dp = a.extent(1), dr = a.extent(2);
  const std::size_t d = static_cast<std::size_t>(dim);
  ComplexTensor out({dl, dp * d, dr});
  for (std::size_t l = 0; l < dl; ++l)
    for (std::size_t p = 0; p < dp; ++p)
      for (std::size_t r = 0; r < dr; ++r)
        out.values()[(l * dp * d + p * d) * dr + r] = a.values()[(l * dp + p) * dr + r];
  tensors_[pos] = std::move(out);
  slots_[pos].push_back(dim);
  return slots_[pos].size() - 1;
}

SplitDiscard MatrixProductState::split_pair(std::size_t pos, const ComplexTensor& theta, const TruncationRule& rule) {
  const std::size_t dl = theta.extent(0), p1 = theta.extent(1), p2 = theta.extent(2), dr = theta.extent(3);
  SvdOutcome svd = svd_truncate(theta.as_matrix(2), rule);
  const std::size_t k = svd.singular_values.size();
  tensors_[pos] = std::move(svd.left_isometry).reshaped({dl, p1, k});
  RowMatrix right = svd.right_isometry.as_matrix(1);
  for (std::size_t i = 0; i < k; ++i) right.row(static_cast<Eigen::Index>(i)) *= svd.singular_values[i];
  tensors_[pos + 1] = from_rows(right, {k, p2, dr});
  center_ = pos + 1;
  return {svd.discarded_weight, svd.discarded_sum};
}

SplitDiscard MatrixProductState::apply_gate(const std::vector<SlotRef>& targets, const RowMatrix& gate,
                                            double zero_tolerance) {
  require(targets.size() == 1 || targets.size() == 2, "apply_gate: one or two targets are supported");
  for (const SlotRef& t : targets) {
    require(t.pos < tensors_.size(), "apply_gate: position out of range");
    require(t.slot < slots_[t.pos].size(), "apply_gate: slot out of range");
  }
  std::size_t gate_dim = 1;
  for (const SlotRef& t : targets) gate_dim *= static_cast<std::size_t>(slots_[t.pos][t.slot]);
  require(static_cast<std::size_t>(gate.rows()) == gate_dim && static_cast<std::size_t>(gate.cols()) == gate_dim,
          "apply_gate: gate dimension mismatch");

  if (targets.size() == 1 || targets[0].pos == targets[1].pos) {
    const std::size_t pos = targets[0].pos;
    if (targets.size() == 2) require(targets[0].slot != targets[1].slot, "apply_gate: repeated target");
    ComplexTensor& a = tensors_[pos];
    const Shape original = a.shape();
    Shape split{original[0]};
    for (int d : slots_[pos]) split.push_back(static_cast<std::size_t>(d));
    split.push_back(original[2]);
    std::vector<std::size_t> axes;
    for (const SlotRef& t : targets) axes.push_back(1 + t.slot);
    a = apply_operator(std::move(a).reshaped(split), axes, gate).reshaped(original);
    return {};
  }

  SlotRef left = targets[0], right = targets[1];
  RowMatrix g = gate;
  if (left.pos > right.pos) {
    g = swap_factors(gate, static_cast<std::size_t>(slots_[left.pos][left.slot]),
                     static_cast<std::size_t>(slots_[right.pos][right.slot]));
    std::swap(left, right);
  }
  require(right.pos == left.pos + 1, "apply_gate: targets must be on one site or adjacent sites");
  const std::size_t pos = left.pos;
  move_center(pos);
  const ComplexTensor theta = contract(tensors_[pos], {2}, tensors_[pos + 1], {0});
  const Shape joined = theta.shape();
  Shape split{joined[0]};
  for (int d : slots_[pos]) split.push_back(static_cast<std::size_t>(d));
  for (int d : slots_[pos + 1]) split.push_back(static_cast<std::size_t>(d));
  split.push_back(joined[3]);
  const std::vector<std::size_t> axes{1 + left.slot, 1 + slots_[pos].size() + right.slot};
  const ComplexTensor updated = apply_operator(theta.reshaped(split), axes, g).reshaped(joined);
  TruncationRule rule;
  rule.zero_tolerance = zero_tolerance;
  return split_pair(pos, updated, rule);
}

std::vector<double> MatrixProductState::slot_probabilities(SlotRef target) {
  require(target.pos < tensors_.size() && target.slot < slots_[target.pos].size(), "slot out of range");
  move_center(target.pos);
  const ComplexTensor& a = tensors_[target.pos];
  const std::vector<int>& dims = slots_[target.pos];
  const std::size_t pre = product_of(dims, 0, target.slot);
  const std::size_t d = static_cast<std::size_t>(dims[target.slot]);
  const std::size_t post = product_of(dims, target.slot + 1, dims.size()) * a.extent(2);
  const std::size_t outer = a.extent(0) * pre;
  std::vector<double> p(d, 0.0);
  const cplx* data = a.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < d; ++k) {
      const cplx* row = data + (o * d + k) * post;
      for (std::size_t i = 0; i < post; ++i) p[k] += std::norm(row[i]);
    }
  return p;
}

double MatrixProductState::project(SlotRef target, int outcome) {
  require(target.pos < tensors_.size() && target.slot < slots_[target.pos].size(), "slot out of range");
  std::vector<int>& dims = slots_[target.pos];
  require(outcome >= 0 && outcome < dims[target.slot], "project: outcome out of range");
  move_center(target.pos);
  const ComplexTensor& a = tensors_[target.pos];
  const std::size_t dl = a.extent(0), dr = a.extent(2);
  const std::size_t pre = product_of(dims, 0, target.slot);
  const std::size_t d = static_cast<std::size_t>(dims[target.slot]);
  const std::size_t post_phys = product_of(dims, target.slot + 1, dims.size());
  const std::size_t post = post_phys * dr;
  ComplexTensor out({dl, pre * post_phys, dr});
  double prob = 0.0;
  for (std::size_t o = 0; o < dl * pre; ++o) {
    const cplx* src = a.data() + (o * d + static_cast<std::size_t>(outcome)) * post;
    cplx* dst = out.data() + o * post;
    for (std::size_t i = 0; i < post; ++i) {
      dst[i] = src[i];
      prob += std::norm(src[i]);
    }
  }
  if (prob > 0.0) out *= cplx(1.0 / std::sqrt(prob));
  tensors_[target.pos] = std::move(out);
  dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(target.slot));
  return prob;
}

MeasureOutcome MatrixProductState::measure(SlotRef target, RandomStream& rng) {
  const std::vector<double> p = slot_probabilities(target);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw NumericalFailure("measure: all outcome probabilities vanish");
  const int k = static_cast<int>(rng.categorical(p));
  project(target, k);
  return {k, p[static_cast<std::size_t>(k)] / total};
}

CompressionResult MatrixProductState::compress(const TruncationPolicy& policy, int iteration, TruncationLog& log) {
  require(policy.eps >= 0.0, "compress: eps must be non-negative");
  const std::size_t n = tensors_.size();
  move_center(n - 1);
  TruncationRule rule;
  rule.weight_budget = policy.eps;
  rule.degeneracy_tolerance = policy.degeneracy_tolerance;
  rule.zero_tolerance = policy.zero_tolerance;
  CompressionResult result;
  for (std::size_t b = n - 1; b-- > 0;) {
    const ComplexTensor& a = tensors_[b + 1];
    const std::size_t dp = a.extent(1), dr = a.extent(2);
    SvdOutcome svd = svd_truncate(a.as_matrix(1), rule);
    const std::size_t k = svd.singular_values.size();
    tensors_[b + 1] = std::move(svd.right_isometry).reshaped({k, dp, dr});
    RowMatrix us = svd.left_isometry.as_matrix(1);
    for (std::size_t i = 0; i < k; ++i) us.col(static_cast<Eigen::Index>(i)) *= svd.singular_values[i];
    const ComplexTensor& prev = tensors_[b];
    const std::size_t pl = prev.extent(0), pp = prev.extent(1);
    tensors_[b] = from_rows(prev.as_matrix(2) * us, {pl, pp, k});
    center_ = b;
    log.append({iteration, b, svd.discarded_weight, svd.discarded_sum, k, false});
    result.discarded_weight += svd.discarded_weight;
    result.max_bond = std::max(result.max_bond, k);
  }
  normalize();
  result.exceeds_max_bond = policy.max_bond && result.max_bond > *policy.max_bond;
  return result;
}

std::vector<double> MatrixProductState::schmidt_values(std::size_t bond) {
  require(bond + 1 < tensors_.size(), "schmidt_values: bond out of range");
  move_center(bond);
  Eigen::MatrixXcd m = tensors_[bond].as_matrix(2);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  if (svd.info() != Eigen::Success) throw NumericalFailure("schmidt_values: SVD did not converge");
  std::vector<double> s(static_cast<std::size_t>(svd.singularValues().size()));
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = svd.singularValues()(static_cast<Eigen::Index>(i));
    total += s[i] * s[i];
  }
  if (total > 0.0)
    for (double& x : s) x /= std::sqrt(total);
  return s;
}

double MatrixProductState::norm() const {
  RowMatrix env = RowMatrix::Ones(1, 1);
  for (const ComplexTensor& a : tensors_) {
    RowMatrix next = RowMatrix::Zero(static_cast<Eigen::Index>(a.extent(2)), static_cast<Eigen::Index>(a.extent(2)));
    for (std::size_t p = 0; p < a.extent(1); ++p) {
      const StridedSlice s = physical_slice(a, p);
      next.noalias() += s.adjoint() * env * s;
    }
    env = std::move(next);
  }
  return std::sqrt(std::abs(env(0, 0).real()));
}

void MatrixProductState::normalize() {
  // Only the center tensor carries the norm.
  const double n = tensors_[center_].norm();
  if (n > 0.0) tensors_[center_] *= cplx(1.0 / n);
}

double MatrixProductState::canonical_error() const {
  double err = 0.0;
  for (std::size_t pos = 0; pos < tensors_.size(); ++pos) {
    if (pos == center_) continue;
    const ComplexTensor& a = tensors_[pos];
    RowMatrix gram;
    if (pos < center_) {
      const RowMatrix m = a.as_matrix(2);
      gram = m.adjoint() * m;
    } else {
      const RowMatrix m = a.as_matrix(1);
      gram = m * m.adjoint();
    }
    gram -= RowMatrix::Identity(gram.rows(), gram.cols());
    err = std::max(err, gram.cwiseAbs().maxCoeff());
  }
  return err;
}

std::vector<cplx> MatrixProductState::to_dense() const {
  RowMatrix psi = RowMatrix::Ones(1, 1);
  for (const ComplexTensor& a : tensors_) {
    const auto dp = static_cast<Eigen::Index>(a.extent(1));
    const auto dr = static_cast<Eigen::Index>(a.extent(2));
    const RowMatrix next = psi * a.matrix_view(a.extent(0), a.extent(1) * a.extent(2));
    const Eigen::Index rows = psi.rows() * dp;
    psi = Eigen::Map<const RowMatrix>(next.data(), rows, dr);
  }
  return std::vector<cplx>(psi.data(), psi.data() + psi.size());
}

}  // namespace shallow2d
