// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "shallow2d/random.hpp"
#include "shallow2d/tensor.hpp"

namespace shallow2d {

struct TruncationPolicy {
  double eps = 0.0;                       // squared-discard budget per bond per compression
  std::optional<std::size_t> max_bond;    // nullopt = unbounded
  double degeneracy_tolerance = 1e-12;    // relative to the largest value
  double zero_tolerance = 1e-13;          // relative numerical zero for splits and compressions
};

struct TruncationRecord {
  int iteration = 0;
  std::size_t bond = 0;
  double discarded_weight = 0.0;  // sum of squared dropped values
  double discarded_sum = 0.0;     // sum of dropped values
  std::size_t bond_dim = 0;       // bond dimension after truncation
  bool split = false;             // numerical-zero drop while applying a gate
};

// Append-only truncation history. eps(i) is the summed squared discard of
// compression records of iteration i; split records are kept apart.
class TruncationLog {
 public:
  void append(const TruncationRecord& record);
  void merge(const TruncationLog& other);

  const std::vector<TruncationRecord>& records() const { return records_; }
  double lambda() const { return lambda_; }
  // Index i holds eps of iteration i (index 0 unused by the sweep).
  const std::vector<double>& iteration_weights() const { return iteration_weights_; }
  double eps_total() const;
  // Sum over iterations of sqrt(2 eps_i).
  double sqrt_term() const;
  // Sum over split records of sqrt(2 w).
  double split_term() const { return split_term_; }

 private:
  std::vector<TruncationRecord> records_;
  std::vector<double> iteration_weights_;
  double lambda_ = 0.0;
  double split_term_ = 0.0;
};

struct CompressionResult {
  std::size_t max_bond = 1;
  bool exceeds_max_bond = false;
  double discarded_weight = 0.0;
};

// Qudit location inside an MPS: chain position and slot within that site.
struct SlotRef {
  std::size_t pos = 0;
  std::size_t slot = 0;
};

struct SplitDiscard {
  double weight = 0.0;  // sum of squared dropped values
  double sum = 0.0;     // sum of dropped values
};

struct MeasureOutcome {
  int outcome = 0;
  double probability = 0.0;
};

// Open-boundary MPS whose site tensors have axes (left bond, physical, right
// bond). The physical axis of a site is the product of its slots, ordered
// by insertion with the first slot most significant. Tensors left of the
// orthogonality center are left isometries, those right of it right
// isometries.
class MatrixProductState {
 public:
  MatrixProductState() = default;
  // n sites with no slots: physical dimension 1, the scalar state 1.
  explicit MatrixProductState(std::size_t n_sites);

  static MatrixProductState product_state(const std::vector<int>& dims, const std::vector<int>& basis_indices);

  std::size_t length() const { return tensors_.size(); }
  std::size_t physical_dim(std::size_t pos) const;
  const std::vector<int>& slot_dims(std::size_t pos) const { return slots_.at(pos); }
  std::size_t slot_count(std::size_t pos) const { return slots_.at(pos).size(); }
  // Bond b joins positions b and b+1.
  std::size_t bond_dim(std::size_t bond) const;
  std::size_t max_bond_dim() const;
  std::size_t ortho_center() const { return center_; }
  const ComplexTensor& tensor(std::size_t pos) const { return tensors_.at(pos); }

  void move_center(std::size_t pos);

  // Appends a slot of dimension `dim` in basis index 0; returns its slot index.
  std::size_t absorb(std::size_t pos, int dim);

  // Applies a gate on one or two qudits. The first target is the most
  // significant gate index. Two targets lie on one site or on adjacent
  // sites. Returns what the split dropped as numerical zero.
  SplitDiscard apply_gate(const std::vector<SlotRef>& targets, const RowMatrix& gate, double zero_tolerance = 1e-13);

  // Marginal outcome probabilities of one slot given the current state.
  std::vector<double> slot_probabilities(SlotRef target);
  // Projects the slot onto `outcome`, removes it, renormalizes when the
  // probability is positive, and returns the probability.
  double project(SlotRef target, int outcome);
  MeasureOutcome measure(SlotRef target, RandomStream& rng);

  // Left-to-right QR sweep, then right-to-left truncating SVD sweep with
  // the per-bond budget policy.eps. Bonds above policy.max_bond are
  // reported, never cut. Records are appended under `iteration`.
  CompressionResult compress(const TruncationPolicy& policy, int iteration, TruncationLog& log);

  // Schmidt values across bond `bond`, non-increasing, normalized to unit
  // squared sum.
  std::vector<double> schmidt_values(std::size_t bond);

  double norm() const;
  void normalize();
  // Largest deviation from the isometry conditions implied by the center.
  double canonical_error() const;
  // Dense amplitudes; site 0 (then its first slot) is the most significant digit.
  std::vector<cplx> to_dense() const;

 private:
  std::vector<ComplexTensor> tensors_;
  std::vector<std::vector<int>> slots_;
  std::size_t center_ = 0;

  void shift_center_right();
  void shift_center_left();
  SplitDiscard split_pair(std::size_t pos, const ComplexTensor& theta, const TruncationRule& rule);
};

}  // namespace shallow2d
