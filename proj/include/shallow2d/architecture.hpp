// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "shallow2d/tensor.hpp"

namespace shallow2d {

struct Site {
  int row = 0;
  int col = 0;
  auto operator<=>(const Site&) const = default;
};

enum class GateKind { haar_two_site, haar_one_site, cz, hadamard_like_fixed };

std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& name);
bool is_haar(GateKind kind);
// Diagonal gates commute with each other; consecutive layers made only of
// diagonal gates form one commuting block for lightcone purposes.
bool is_diagonal(GateKind kind);

struct GateEvent {
  int layer = 1;  // 1-based time index
  std::vector<Site> sites;
  GateKind kind = GateKind::haar_two_site;
};

struct CircuitLayout {
  int rows = 0;
  int cols = 0;
  int q = 2;
  std::vector<GateEvent> events;
  std::string family = "custom";

  int depth() const;
  std::size_t n_sites() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  // Row-major linear index: row * cols + col.
  std::size_t site_index(Site s) const;
  Site site_at(std::size_t index) const;
  bool contains(Site s) const;
  // Throws InvalidArgument unless events are sorted by layer, supports
  // within a layer are disjoint, and two-site events are axis-adjacent.
  void validate() const;
};

struct CircuitInstance {
  CircuitLayout layout;
  std::vector<RowMatrix> gates;  // one per event, index order of the event's sites
  std::uint64_t seed = 0;
};

// Matrix of a fixed gate kind at local dimension q.
//   cz:                  |a,b> -> w^{ab} |a,b>, w = exp(2 pi i / q)
//   hadamard_like_fixed: F_{jk} = w^{jk} / sqrt(q) (maps |0> to the uniform state)
RowMatrix fixed_gate(GateKind kind, int q);

// Gate for event `index` drawn from the stream derive_seed(seed, index).
RowMatrix event_gate(const CircuitLayout& layout, std::size_t index, std::uint64_t seed);
CircuitInstance make_instance(const CircuitLayout& layout, std::uint64_t seed);

// Brickwork pattern on an L1 x L2 grid. Rows are chains along the sweep
// direction; layers 1 and 2 form a depth-2 brick circuit on every row and
// layer 3 places the coupling gates between rows:
//
//        col:  0   1   2   3   4   5   6   7
//   row 0      o===o===o===o===o===o===o===o     layer 1: (0,1) (2,3) ...
//                  |               |             layer 2: (1,2) (3,4) ...
//   row 1      o===o===o===o===o===o===o===o     layer 3: rows (2k,2k+1) at
//                          |               |              cols 1, 5, 9, ...
//   row 2      o===o===o===o===o===o===o===o              rows (2k+1,2k+2) at
//                  |               |                      cols 3, 7, 11, ...
//   row 3      o===o===o===o===o===o===o===o
//
// A row left unpaired by the parity of L1 receives no coupling gate there.
CircuitLayout brickwork_layout(int L1, int L2, int q = 2);

// Same pattern with the coupling columns spaced 2r apart: coupling columns
// sit at r + 2r j for j = 0 .. 2v-1 on a grid of L rows and 4rv columns, and
// alternate between the (2k,2k+1) and (2k+1,2k+2) row pairings. v counts the
// column pairs. r = 1 gives brickwork_layout(L, 4v).
CircuitLayout extended_brickwork_layout(int L, int r, int v, int q = 2);

// Cluster state with Haar-random single-qubit measurement bases on L x L:
// layer 1 Hadamard-like gate per site, layers 2-5 CZ on horizontal bonds
// (two parities) then vertical bonds (two parities), layer 6 Haar gate per site.
CircuitLayout chr_layout(int L, int q = 2);
// The same construction on a rows x cols grid.
CircuitLayout chr_rect_layout(int rows, int cols, int q = 2);

// Depth-2 brick circuit on a 1 x n chain: bonds (0,1),(2,3),... then (1,2),(3,4),...
CircuitLayout brick_chain_layout(int n, int q = 2);

// Layout of single-site Haar gates only (depth 1).
CircuitLayout product_layout(int rows, int cols, int q = 2);

struct Lightcone {
  std::vector<std::size_t> gates;  // event indices, sorted by layer
  std::vector<Site> sites;         // touched sites and all sites of columns 1..t
};

// Gates causally connected to measurements of columns 1..t (1-based).
Lightcone lightcone(const CircuitLayout& layout, int t);

// For each event, the first column t (1-based) whose lightcone contains it.
std::vector<int> lightcone_entry_columns(const CircuitLayout& layout);

// Partition of the events into V_1, ..., V_{L2}; each list sorted by layer.
std::vector<std::vector<std::size_t>> lightcone_increments(const CircuitLayout& layout);

// Largest |column(entry) - column(site)| over gate sites: the column radius.
int lightcone_radius(const CircuitLayout& layout);

std::string layout_to_json(const CircuitLayout& layout, std::uint64_t seed);
// Parses {rows, cols, q, seed, events:[{layer, sites, kind}]}; returns the
// instance regenerated from the seed.
CircuitInstance instance_from_json(const std::string& text);

}  // namespace shallow2d
