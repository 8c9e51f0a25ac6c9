#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "shallow2d/architecture.hpp"
#include "shallow2d/errors.hpp"

using namespace shallow2d;

namespace {

// Block label per layer: maximal runs of layers holding only diagonal gates
// share a label, every other layer gets its own.
std::map<int, int> diagonal_blocks(const CircuitLayout& layout) {
  std::map<int, bool> diagonal;
  for (const GateEvent& e : layout.events) {
    auto it = diagonal.emplace(e.layer, true).first;
    it->second = it->second && is_diagonal(e.kind);
  }
  std::map<int, int> label;
  int next = 0;
  bool prev_diagonal = false;
  for (const auto& [layer, diag] : diagonal) {
    if (!(diag && prev_diagonal)) ++next;
    label[layer] = next;
    prev_diagonal = diag;
  }
  return label;
}

// Forward causal cone of each event over the gate DAG, where gates of one
// commuting diagonal block impose no order on each other; entry column is
// one plus the smallest column reached.
std::vector<int> dag_entry_columns(const CircuitLayout& layout) {
  const std::map<int, int> block = diagonal_blocks(layout);
  std::vector<int> entry(layout.events.size());
  for (std::size_t g = 0; g < layout.events.size(); ++g) {
    std::set<Site> reached(layout.events[g].sites.begin(), layout.events[g].sites.end());
    // Gates inside one block are tested against the set as it stood when the block began.
    std::set<Site> frozen = reached;
    int current = block.at(layout.events[g].layer);
    for (std::size_t h = g + 1; h < layout.events.size(); ++h) {
      const int b = block.at(layout.events[h].layer);
      if (b == block.at(layout.events[g].layer)) continue;
      if (b != current) {
        frozen = reached;
        current = b;
      }
      const auto& sites = layout.events[h].sites;
      if (std::any_of(sites.begin(), sites.end(), [&](const Site& s) { return frozen.count(s) > 0; }))
        reached.insert(sites.begin(), sites.end());
    }
    int col = layout.cols;
    for (const Site& s : reached) col = std::min(col, s.col);
    entry[g] = col + 1;
  }
  return entry;
}

std::multiset<std::vector<Site>> gate_multiset(const CircuitLayout& layout) {
  std::multiset<std::vector<Site>> out;
  for (const GateEvent& e : layout.events) {
    std::vector<Site> s = e.sites;
    std::sort(s.begin(), s.end());
    out.insert(s);
  }
  return out;
}

std::set<int> vertical_columns(const CircuitLayout& layout) {
  std::set<int> cols;
  for (const GateEvent& e : layout.events)
    if (e.sites.size() == 2 && e.sites[0].col == e.sites[1].col) cols.insert(e.sites[0].col);
  return cols;
}

}  // namespace

TEST_CASE("brickwork 2x2 instantiation") {
  const CircuitLayout b = brickwork_layout(2, 2);
  CHECK(b.events.size() == 3);
  CHECK(b.depth() == 3);
  std::set<Site> touched;
  for (const GateEvent& e : b.events) touched.insert(e.sites.begin(), e.sites.end());
  CHECK(touched.size() == 4);
  CHECK_THROWS_AS(brickwork_layout(1, 4), InvalidArgument);
}

TEST_CASE("brickwork layouts are local, depth three and cover every site") {
  for (int L1 = 2; L1 <= 7; ++L1)
    for (int L2 = 2; L2 <= 9; ++L2) {
      const CircuitLayout b = brickwork_layout(L1, L2);
      CHECK_NOTHROW(b.validate());
      CHECK(b.depth() == 3);
      std::set<Site> touched;
      for (const GateEvent& e : b.events) {
        touched.insert(e.sites.begin(), e.sites.end());
        CHECK(e.kind == GateKind::haar_two_site);
      }
      CHECK(touched.size() == b.n_sites());
    }
}

TEST_CASE("extended brickwork reduces to brickwork at r = 1") {
  for (int L = 2; L <= 5; ++L)
    for (int v = 1; v <= 3; ++v) {
      const CircuitLayout e = extended_brickwork_layout(L, 1, v);
      const CircuitLayout b = brickwork_layout(L, 4 * v);
      CHECK(e.rows == b.rows);
      CHECK(e.cols == b.cols);
      CHECK(gate_multiset(e) == gate_multiset(b));
    }
}

TEST_CASE("extended brickwork with r = 7, v = 4") {
  const CircuitLayout e = extended_brickwork_layout(6, 7, 4);
  const std::set<int> cols = vertical_columns(e);
  CHECK(cols.size() == 8);  // v column pairs
  std::vector<int> c(cols.begin(), cols.end());
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] - c[i - 1] == 14);
  CHECK(e.depth() == 3);
}

TEST_CASE("extended brickwork size is linear in each parameter") {
  CHECK(extended_brickwork_layout(3, 2, 2).n_sites() * 2 == extended_brickwork_layout(6, 2, 2).n_sites());
  CHECK(extended_brickwork_layout(3, 2, 2).n_sites() * 2 == extended_brickwork_layout(3, 4, 2).n_sites());
  CHECK(extended_brickwork_layout(3, 2, 2).n_sites() * 2 == extended_brickwork_layout(3, 2, 4).n_sites());
}

TEST_CASE("CHR layout structure") {
  for (int L = 2; L <= 6; ++L) {
    const CircuitLayout c = chr_layout(L);
    int cz = 0, haar = 0, had = 0;
    for (const GateEvent& e : c.events) {
      cz += e.kind == GateKind::cz;
      haar += e.kind == GateKind::haar_one_site;
      had += e.kind == GateKind::hadamard_like_fixed;
    }
    CHECK(cz == 2 * L * (L - 1));
    CHECK(haar == L * L);
    CHECK(had == L * L);
    CHECK(lightcone_radius(c) == 1);
  }
}

TEST_CASE("CHR lightcone of the first column") {
  const CircuitLayout c = chr_layout(4);
  const Lightcone lc = lightcone(c, 1);
  std::set<std::size_t> gates(lc.gates.begin(), lc.gates.end());
  for (std::size_t g = 0; g < c.events.size(); ++g) {
    const GateEvent& e = c.events[g];
    const bool touches_first = std::any_of(e.sites.begin(), e.sites.end(), [](const Site& s) { return s.col == 0; });
    if (e.kind == GateKind::cz && touches_first) CHECK(gates.count(g) == 1);
    if (e.kind == GateKind::haar_one_site) CHECK(gates.count(g) == (e.sites[0].col == 0 ? 1u : 0u));
  }
}

TEST_CASE("depth-one layouts have column-local lightcones") {
  const CircuitLayout p = product_layout(3, 5);
  for (int t = 1; t <= 5; ++t) {
    const Lightcone lc = lightcone(p, t);
    CHECK(lc.gates.size() == static_cast<std::size_t>(3 * t));
    for (std::size_t g : lc.gates) CHECK(p.events[g].sites[0].col < t);
  }
}

TEST_CASE("lightcone entry columns agree with the gate DAG on brickwork") {
  for (auto [L1, L2] : {std::pair{4, 6}, std::pair{3, 8}, std::pair{5, 5}}) {
    const CircuitLayout b = brickwork_layout(L1, L2);
    CHECK(lightcone_entry_columns(b) == dag_entry_columns(b));
    CHECK(lightcone_radius(b) <= b.depth());
  }
  const CircuitLayout e = extended_brickwork_layout(4, 3, 2);
  CHECK(lightcone_entry_columns(e) == dag_entry_columns(e));
  const CircuitLayout chain = brick_chain_layout(9);
  CHECK(lightcone_entry_columns(chain) == dag_entry_columns(chain));
}

TEST_CASE("lightcone entry columns agree with the block DAG on CHR") {
  for (int L = 2; L <= 5; ++L) {
    const CircuitLayout c = chr_layout(L);
    CHECK(lightcone_entry_columns(c) == dag_entry_columns(c));
  }
  const CircuitLayout rect = chr_rect_layout(3, 6);
  CHECK(lightcone_entry_columns(rect) == dag_entry_columns(rect));
}

TEST_CASE("lightcone increments partition the gate list and respect causality") {
  for (const CircuitLayout& layout :
       {brickwork_layout(4, 6), chr_layout(4), extended_brickwork_layout(3, 2, 2), product_layout(2, 3)}) {
    const auto inc = lightcone_increments(layout);
    CHECK(inc.size() == static_cast<std::size_t>(layout.cols));
    std::vector<int> seen(layout.events.size(), 0);
    std::map<std::size_t, int> entry;
    for (std::size_t t = 0; t < inc.size(); ++t) {
      for (std::size_t i = 1; i < inc[t].size(); ++i)
        CHECK(layout.events[inc[t][i - 1]].layer <= layout.events[inc[t][i]].layer);
      for (std::size_t g : inc[t]) {
        ++seen[g];
        entry[g] = static_cast<int>(t);
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    // A non-diagonal gate never enters before an earlier gate on a shared site.
    for (std::size_t g = 0; g < layout.events.size(); ++g)
      for (std::size_t h = 0; h < g; ++h) {
        const auto& a = layout.events[h];
        const auto& b = layout.events[g];
        if (a.layer == b.layer) continue;
        const bool shared = std::any_of(a.sites.begin(), a.sites.end(), [&](const Site& s) {
          return std::find(b.sites.begin(), b.sites.end(), s) != b.sites.end();
        });
        if (shared && !(is_diagonal(a.kind) && is_diagonal(b.kind))) CHECK(entry[h] <= entry[g]);
      }
    std::size_t prev = 0;
    for (int t = 1; t <= layout.cols; ++t) {
      const std::size_t size = lightcone(layout, t).gates.size();
      CHECK(size >= prev);
      prev = size;
    }
    CHECK(prev == layout.events.size());
  }
}

TEST_CASE("instances regenerate bit-identically and are unitary") {
  const CircuitLayout b = brickwork_layout(3, 4);
  const CircuitInstance x = make_instance(b, 1234);
  const CircuitInstance y = make_instance(b, 1234);
  const CircuitInstance z = make_instance(b, 1235);
  REQUIRE(x.gates.size() == b.events.size());
  for (std::size_t g = 0; g < x.gates.size(); ++g) {
    CHECK((x.gates[g] - y.gates[g]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(unitarity_error(x.gates[g]) < 1e-10);
  }
  CHECK((x.gates[0] - z.gates[0]).cwiseAbs().maxCoeff() > 0.0);
  // Each event's gate is re-derivable on its own.
  CHECK((event_gate(b, 5, 1234) - x.gates[5]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed gates") {
  const RowMatrix cz = fixed_gate(GateKind::cz, 2);
  CHECK(std::abs(cz(3, 3) - cplx(-1.0)) < 1e-15);
  CHECK(std::abs(cz(1, 1) - cplx(1.0)) < 1e-15);
  const RowMatrix f = fixed_gate(GateKind::hadamard_like_fixed, 3);
  CHECK(unitarity_error(f) < 1e-14);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(f(i, 0) - cplx(1.0 / std::sqrt(3.0))) < 1e-15);
}

TEST_CASE("JSON round trip") {
  const CircuitLayout c = chr_layout(3);
  const std::string text = layout_to_json(c, 77);
  const CircuitInstance inst = instance_from_json(text);
  const CircuitInstance direct = make_instance(c, 77);
  CHECK(inst.seed == 77);
  CHECK(inst.layout.rows == 3);
  REQUIRE(inst.gates.size() == direct.gates.size());
  for (std::size_t g = 0; g < inst.gates.size(); ++g)
    CHECK((inst.gates[g] - direct.gates[g]).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(instance_from_json("{not json"), InvalidArgument);
  CHECK_THROWS_AS(instance_from_json(R"({"rows":2,"cols":2,"q":2,"seed":1,"events":[{"layer":1,"sites":[[0,0],[1,1]],"kind":"cz"}]})"),
                  InvalidArgument);
}
