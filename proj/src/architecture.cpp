// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/architecture.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <set>

#include "shallow2d/errors.hpp"

namespace shallow2d {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::haar_two_site: return "haar_two_site";
    case GateKind::haar_one_site: return "haar_one_site";
    case GateKind::cz: return "cz";
    case GateKind::hadamard_like_fixed: return "hadamard_like_fixed";
  }
  return "unknown";
}

GateKind gate_kind_from_string(const std::string& name) {
  for (GateKind k : {GateKind::haar_two_site, GateKind::haar_one_site, GateKind::cz, GateKind::hadamard_like_fixed})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown gate kind '" + name + "'");
}

bool is_haar(GateKind kind) { return kind == GateKind::haar_two_site || kind == GateKind::haar_one_site; }
bool is_diagonal(GateKind kind) { return kind == GateKind::cz; }

int CircuitLayout::depth() const {
  int d = 0;
  for (const auto& e : events) d = std::max(d, e.layer);
  return d;
}

std::size_t CircuitLayout::site_index(Site s) const {
  require(contains(s), "site outside the lattice");
  return static_cast<std::size_t>(s.row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(s.col);
}

Site CircuitLayout::site_at(std::size_t index) const {
  require(index < n_sites(), "site index out of range");
  return {static_cast<int>(index / static_cast<std::size_t>(cols)), static_cast<int>(index % static_cast<std::size_t>(cols))};
}

bool CircuitLayout::contains(Site s) const { return s.row >= 0 && s.row < rows && s.col >= 0 && s.col < cols; }

void CircuitLayout::validate() const {
  require(rows >= 1 && cols >= 1, "layout: empty lattice");
  require(q >= 2, "layout: local dimension must be at least 2");
  int prev_layer = 0;
  std::set<std::pair<int, Site>> occupied;
  for (const auto& e : events) {
    require(e.layer >= 1, "layout: layers are 1-based");
    require(e.layer >= prev_layer, "layout: events must be sorted by layer");
    prev_layer = e.layer;
    const std::size_t arity = (e.kind == GateKind::haar_two_site || e.kind == GateKind::cz) ? 2 : 1;
    require(e.sites.size() == arity, "layout: event arity does not match its kind");
    for (const Site& s : e.sites) {
      require(contains(s), "layout: event site outside the lattice");
      require(occupied.insert({e.layer, s}).second, "layout: overlapping supports within a layer");
    }
    if (arity == 2) {
      const int dr = std::abs(e.sites[0].row - e.sites[1].row);
      const int dc = std::abs(e.sites[0].col - e.sites[1].col);
      require(dr + dc == 1, "layout: two-site events must act on adjacent sites");
    }
  }
}

RowMatrix fixed_gate(GateKind kind, int q) {
  const double angle = 2.0 * std::numbers::pi / q;
  if (kind == GateKind::cz) {
    RowMatrix m = RowMatrix::Zero(q * q, q * q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) m(a * q + b, a * q + b) = std::polar(1.0, angle * ((a * b) % q));
    return m;
  }
  if (kind == GateKind::hadamard_like_fixed) {
    RowMatrix m(q, q);
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) m(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(q)), angle * ((j * k) % q));
    return m;
  }
  throw InvalidArgument("fixed_gate: " + to_string(kind) + " is not a fixed gate");
}

RowMatrix event_gate(const CircuitLayout& layout, std::size_t index, std::uint64_t seed) {
  require(index < layout.events.size(), "event index out of range");
  const GateEvent& e = layout.events[index];
  if (is_haar(e.kind)) {
    RandomStream rng(derive_seed(seed, index));
    const std::size_t dim = e.kind == GateKind::haar_two_site ? static_cast<std::size_t>(layout.q * layout.q)
                                                              : static_cast<std::size_t>(layout.q);
    return haar_matrix(dim, rng);
  }
  return fixed_gate(e.kind, layout.q);
}

CircuitInstance make_instance(const CircuitLayout& layout, std::uint64_t seed) {
  layout.validate();
  CircuitInstance inst{layout, {}, seed};
  inst.gates.reserve(layout.events.size());
  for (std::size_t i = 0; i < layout.events.size(); ++i) inst.gates.push_back(event_gate(layout, i, seed));
  return inst;
}

namespace {

void add_row_bricks(CircuitLayout& layout) {
  for (int parity = 0; parity < 2; ++parity)
    for (int r = 0; r < layout.rows; ++r)
      for (int c = parity; c + 1 < layout.cols; c += 2)
        layout.events.push_back({1 + parity, {{r, c}, {r, c + 1}}, GateKind::haar_two_site});
}

void add_coupling_column(CircuitLayout& layout, int col, int row_parity, int layer) {
  for (int r = row_parity; r + 1 < layout.rows; r += 2)
    layout.events.push_back({layer, {{r, col}, {r + 1, col}}, GateKind::haar_two_site});
}

void sort_events(CircuitLayout& layout) {
  std::stable_sort(layout.events.begin(), layout.events.end(),
                   [](const GateEvent& a, const GateEvent& b) { return a.layer < b.layer; });
}

}  // namespace

CircuitLayout brickwork_layout(int L1, int L2, int q) {
  require(L1 >= 2 && L2 >= 2, "brickwork_layout: both sides must be at least 2");
  CircuitLayout layout{L1, L2, q, {}, "brickwork"};
  add_row_bricks(layout);
  for (int c = 1; c < L2; c += 2) add_coupling_column(layout, c, ((c - 1) / 2) % 2, 3);
  sort_events(layout);
  layout.validate();
  return layout;
}

CircuitLayout extended_brickwork_layout(int L, int r, int v, int q) {
  require(L >= 2 && r >= 1 && v >= 1, "extended_brickwork_layout: need L >= 2, r >= 1, v >= 1");
  CircuitLayout layout{L, 4 * r * v, q, {}, "extended_brickwork"};
  add_row_bricks(layout);
  for (int j = 0; j < 2 * v; ++j) add_coupling_column(layout, r + 2 * r * j, j % 2, 3);
  sort_events(layout);
  layout.validate();
  return layout;
}

CircuitLayout chr_layout(int L, int q) { return chr_rect_layout(L, L, q); }

CircuitLayout chr_rect_layout(int rows, int cols, int q) {
  require(rows >= 1 && cols >= 1 && rows * cols >= 2, "chr_layout: at least two sites are required");
  CircuitLayout layout{rows, cols, q, {}, "chr"};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) layout.events.push_back({1, {{r, c}}, GateKind::hadamard_like_fixed});
  for (int parity = 0; parity < 2; ++parity)
    for (int r = 0; r < rows; ++r)
      for (int c = parity; c + 1 < cols; c += 2)
        layout.events.push_back({2 + parity, {{r, c}, {r, c + 1}}, GateKind::cz});
  for (int parity = 0; parity < 2; ++parity)
    for (int r = parity; r + 1 < rows; r += 2)
      for (int c = 0; c < cols; ++c) layout.events.push_back({4 + parity, {{r, c}, {r + 1, c}}, GateKind::cz});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) layout.events.push_back({6, {{r, c}}, GateKind::haar_one_site});
  layout.validate();
  return layout;
}

CircuitLayout brick_chain_layout(int n, int q) {
  require(n >= 2, "brick_chain_layout: need at least 2 sites");
  CircuitLayout layout{1, n, q, {}, "brick_chain"};
  add_row_bricks(layout);
  sort_events(layout);
  layout.validate();
  return layout;
}

CircuitLayout product_layout(int rows, int cols, int q) {
  CircuitLayout layout{rows, cols, q, {}, "product"};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) layout.events.push_back({1, {{r, c}}, GateKind::haar_one_site});
  layout.validate();
  return layout;
}

std::vector<int> lightcone_entry_columns(const CircuitLayout& layout) {
  // Contiguous [begin, end) ranges of events sharing a layer.
  std::vector<std::pair<std::size_t, std::size_t>> layers;
  for (std::size_t k = 0; k < layout.events.size(); ++k) {
    if (layers.empty() || layout.events[layers.back().first].layer != layout.events[k].layer) layers.push_back({k, k});
    layers.back().second = k + 1;
  }
  auto all_diagonal = [&](std::pair<std::size_t, std::size_t> range) {
    for (std::size_t k = range.first; k < range.second; ++k)
      if (!is_diagonal(layout.events[k].kind)) return false;
    return true;
  };
  // reach[s]: smallest measured column (1-based) causally downstream of site
  // s at the current time slice, sweeping backwards through the layers. A
  // maximal run of diagonal-only layers is one block: its gates commute, so
  // a gate joins the cone iff it touches a site already in the cone.
  std::vector<int> reach(layout.n_sites());
  for (std::size_t i = 0; i < reach.size(); ++i) reach[i] = layout.site_at(i).col + 1;
  std::vector<int> entry(layout.events.size(), 0);
  std::size_t li = layers.size();
  while (li > 0) {
    std::size_t first = li - 1;
    if (all_diagonal(layers[first]))
      while (first > 0 && all_diagonal(layers[first - 1])) --first;
    const std::size_t begin = layers[first].first;
    const std::size_t end = layers[li - 1].second;
    std::vector<std::pair<std::size_t, int>> updates;
    for (std::size_t k = begin; k < end; ++k) {
      int value = layout.cols + 1;
      for (const Site& s : layout.events[k].sites) value = std::min(value, reach[layout.site_index(s)]);
      entry[k] = value;
      for (const Site& s : layout.events[k].sites) updates.emplace_back(layout.site_index(s), value);
    }
    for (auto [site, value] : updates) reach[site] = std::min(reach[site], value);
    li = first;
  }
  return entry;
}

std::vector<std::vector<std::size_t>> lightcone_increments(const CircuitLayout& layout) {
  const std::vector<int> entry = lightcone_entry_columns(layout);
  std::vector<std::vector<std::size_t>> increments(static_cast<std::size_t>(layout.cols));
  for (std::size_t k = 0; k < entry.size(); ++k) {
    // Events reaching no measured column cannot occur: every site is measured.
    increments[static_cast<std::size_t>(entry[k] - 1)].push_back(k);
  }
  return increments;
}

Lightcone lightcone(const CircuitLayout& layout, int t) {
  require(t >= 1 && t <= layout.cols, "lightcone: column index out of range");
  const std::vector<int> entry = lightcone_entry_columns(layout);
  Lightcone cone;
  std::set<Site> sites;
  for (int r = 0; r < layout.rows; ++r)
    for (int c = 0; c < t; ++c) sites.insert({r, c});
  for (std::size_t k = 0; k < entry.size(); ++k)
    if (entry[k] <= t) {
      cone.gates.push_back(k);
      for (const Site& s : layout.events[k].sites) sites.insert(s);
    }
  cone.sites.assign(sites.begin(), sites.end());
  return cone;
}

int lightcone_radius(const CircuitLayout& layout) {
  const std::vector<int> entry = lightcone_entry_columns(layout);
  int radius = 0;
  for (std::size_t k = 0; k < entry.size(); ++k)
    for (const Site& s : layout.events[k].sites) radius = std::max(radius, std::abs(s.col + 1 - entry[k]));
  return radius;
}

std::string layout_to_json(const CircuitLayout& layout, std::uint64_t seed) {
  nlohmann::ordered_json doc;
  doc["family"] = layout.family;
  doc["rows"] = layout.rows;
  doc["cols"] = layout.cols;
  doc["q"] = layout.q;
  doc["seed"] = seed;
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& e : layout.events) {
    nlohmann::ordered_json ev;
    ev["layer"] = e.layer;
    nlohmann::ordered_json sites = nlohmann::ordered_json::array();
    for (const Site& s : e.sites) sites.push_back({s.row, s.col});
    ev["sites"] = sites;
    ev["kind"] = to_string(e.kind);
    events.push_back(ev);
  }
  doc["events"] = events;
  return doc.dump();
}

CircuitInstance instance_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("layout JSON: ") + ex.what());
  }
  try {
    CircuitLayout layout;
    layout.rows = doc.at("rows").get<int>();
    layout.cols = doc.at("cols").get<int>();
    layout.q = doc.at("q").get<int>();
    layout.family = doc.value("family", std::string("custom"));
    for (const auto& ev : doc.at("events")) {
      GateEvent e;
      e.layer = ev.at("layer").get<int>();
      e.kind = gate_kind_from_string(ev.at("kind").get<std::string>());
      for (const auto& s : ev.at("sites")) e.sites.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
      layout.events.push_back(std::move(e));
    }
    return make_instance(layout, doc.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("layout JSON: ") + ex.what());
  }
}

}  // namespace shallow2d
