// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "shallow2d/statmech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

#include <json.hpp>

#include "shallow2d/errors.hpp"

namespace shallow2d {

namespace {

Rational power(int base, int exp) {
  Rational out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

int bit(Perm2 p) { return p == Perm2::e ? 0 : 1; }

// Weight table with value `agree` when both spins match, `disagree` otherwise.
std::array<Rational, 4> agreement_table(const Rational& agree, const Rational& disagree) {
  return {agree, disagree, disagree, agree};
}

}  // namespace

Rational weingarten_k2(Perm2 perm, int q) {
  require(q >= 2, "weingarten_k2: q must be at least 2");
  const Rational d2 = power(q, 2), d4 = power(q, 4);
  return perm == Perm2::e ? Rational(1 / (d4 - 1)) : Rational(-1 / (d2 * (d4 - 1)));
}

Rational weingarten_k2_sum(int q) { return weingarten_k2(Perm2::e, q) + weingarten_k2(Perm2::swap, q); }

double CouplingSet::at(const std::string& name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  throw InvalidArgument("CouplingSet: no coupling named " + name);
}

void CouplingSet::write_csv(std::ostream& out) const {
  out << "coupling,value\n";
  out.precision(17);
  for (const auto& [k, v] : values) out << k << ',' << v << '\n';
}

double weak_measurement_w(double q) {
  require(q > 1.0, "weak_measurement_w: q must exceed 1");
  return 2.0 / (q + 1.0);
}

CouplingSet weak_measurement_couplings(double q) {
  const double w = weak_measurement_w(q);
  const double a = q * q - w * w, b = w * w * q * q - 1.0;
  require(a > 0.0 && b > 0.0, "weak_measurement_couplings: logarithm argument is not positive");
  const double j1 = 0.25 * std::log(a / b);
  const double j3 = -0.5 * std::log(w * (q * q - 1.0) / std::sqrt(a * b));
  return {{{"J1", j1}, {"J2", j1}, {"J3", j3}}};
}

double triangular_criterion(double q) {
  const CouplingSet c = weak_measurement_couplings(q);
  const double s1 = std::sinh(2.0 * c.at("J1")), s2 = std::sinh(2.0 * c.at("J2")), s3 = std::sinh(2.0 * c.at("J3"));
  return s1 * s2 + s2 * s3 + s1 * s3;
}

double triangular_critical_q(double lo, double hi, double tol) {
  double f_lo = triangular_criterion(lo) - 1.0, f_hi = triangular_criterion(hi) - 1.0;
  if (!(f_lo < 0.0 && f_hi > 0.0)) throw NumericalFailure("triangular_critical_q: root is not bracketed");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (triangular_criterion(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CouplingSet brickwork_couplings(double q) {
  require(q >= 2.0, "brickwork_couplings: q must be at least 2");
  const double q2 = q * q, q3 = q2 * q, q4 = q2 * q2, q5 = q4 * q, q6 = q4 * q2;
  const double vert = 0.5 * std::log((q2 + 1.0) / (2.0 * q));
  const double horiz = 0.5 * std::log((q6 + q4 - 4.0 * q3 + q2 + 1.0) / (2.0 * q5 - 2.0 * q4 - 2.0 * q2 + 2.0 * q));
  return {{{"J_vert", vert}, {"J_horiz", horiz}}};
}

double square_ising_critical_coupling() { return 0.5 * std::log(1.0 + std::numbers::sqrt2); }

LinkWeights brickwork_vertical_weights(int q) {
  require(q >= 2, "brickwork_vertical_weights: q must be at least 2");
  return {power(q, 2) * (power(q, 2) + 1), power(q, 2) * 2 * q};
}

LinkWeights brickwork_horizontal_weights(int q) {
  require(q >= 2, "brickwork_horizontal_weights: q must be at least 2");
  const Rational den = power(q, 2) * (power(q, 4) - 1) * (power(q, 4) - 1);
  return {(power(q, 6) + power(q, 4) - 4 * power(q, 3) + power(q, 2) + 1) / den,
          (2 * power(q, 5) - 2 * power(q, 4) - 2 * power(q, 2) + 2 * q) / den};
}

std::size_t SpinModel::free_spins() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const SpinNode& n) { return !n.fixed; }));
}

std::size_t SpinModel::degree(std::size_t node) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const SpinEdge& e) { return e.a == node || e.b == node; }));
}

SpinModel build_spin_model(const CircuitLayout& layout, const SpinBoundary& boundary) {
  layout.validate();
  const int q = layout.q;
  std::vector<int> role(layout.n_sites(), 0);  // 1 twisted, 2 measured
  for (const Site& s : boundary.twisted) role[layout.site_index(s)] = 1;
  for (const Site& s : boundary.measured) {
    require(role[layout.site_index(s)] != 1, "build_spin_model: a site cannot be both twisted and measured");
    role[layout.site_index(s)] = 2;
  }

  SpinModel model;
  model.q = q;
  const Rational q1 = q, q2 = power(q, 2);
  std::vector<std::ptrdiff_t> last(layout.n_sites(), -1);  // outgoing node of the last gate
  for (std::size_t g = 0; g < layout.events.size(); ++g) {
    const GateEvent& e = layout.events[g];
    require(e.kind == GateKind::haar_two_site && e.sites.size() == 2,
            "build_spin_model: every gate must be a two-site Haar gate");
    const std::size_t t = model.nodes.size();
    model.nodes.push_back({NodeKind::incoming, static_cast<int>(g), -1, std::nullopt});
    model.nodes.push_back({NodeKind::outgoing, static_cast<int>(g), -1, std::nullopt});
    model.edges.push_back(
        {t + 1, t, EdgeKind::weingarten, agreement_table(weingarten_k2(Perm2::e, q), weingarten_k2(Perm2::swap, q))});
    for (const Site& s : e.sites) {
      const std::size_t k = layout.site_index(s);
      if (last[k] >= 0) model.edges.push_back({static_cast<std::size_t>(last[k]), t, EdgeKind::link, agreement_table(q2, q1)});
      last[k] = static_cast<std::ptrdiff_t>(t + 1);
    }
  }
  for (std::size_t k = 0; k < layout.n_sites(); ++k) {
    if (last[k] < 0) continue;  // an untouched |0> qudit contributes 1 either way
    const Perm2 chi = role[k] == 1 ? Perm2::swap : Perm2::e;
    const std::size_t x = model.nodes.size();
    model.nodes.push_back({NodeKind::auxiliary, -1, static_cast<int>(k), chi});
    std::array<Rational, 4> w;
    if (role[k] == 2) {
      w = {q1, q1, q1, q1};
    } else if (boundary.dephased && chi == Perm2::swap) {
      w = {q1, q1, q1, q1};
    } else if (boundary.dephased) {
      // q^{C(sigma)}, independent of chi = e.
      w = {q2, q2, q1, q1};
    } else {
      w = agreement_table(q2, q1);
    }
    model.edges.push_back({static_cast<std::size_t>(last[k]), x, EdgeKind::boundary, w});
  }
  return model;
}

std::string spin_model_json(const SpinModel& model) {
  static const char* const node_kinds[] = {"incoming", "outgoing", "auxiliary"};
  static const char* const edge_kinds[] = {"weingarten", "link", "boundary"};
  nlohmann::json j;
  j["q"] = model.q;
  j["constant"] = model.constant.str();
  j["nodes"] = nlohmann::json::array();
  for (const SpinNode& n : model.nodes) {
    nlohmann::json node{{"kind", node_kinds[static_cast<int>(n.kind)]}, {"gate", n.gate}, {"qudit", n.qudit}};
    node["fixed"] = n.fixed ? nlohmann::json(*n.fixed == Perm2::e ? "e" : "swap") : nlohmann::json(nullptr);
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = nlohmann::json::array();
  for (const SpinEdge& e : model.edges) {
    nlohmann::json w = nlohmann::json::array();
    for (const Rational& x : e.weight) w.push_back(x.str());
    j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"kind", edge_kinds[static_cast<int>(e.kind)]}, {"weight", w}});
  }
  return j.dump();
}

std::vector<CircuitLayout> small_layouts(int q, std::size_t max_gates) {
  const std::array<std::array<int, 2>, 4> edges{{{0, 1}, {2, 3}, {0, 2}, {1, 3}}};
  auto edge_of = [&](int a, int b) {
    for (int k = 0; k < 4; ++k)
      if ((edges[k][0] == a && edges[k][1] == b) || (edges[k][0] == b && edges[k][1] == a)) return k;
    return -1;
  };
  // The eight symmetries of the square as site maps, sites row-major.
  std::vector<std::array<int, 4>> symmetries;
  for (int transpose = 0; transpose < 2; ++transpose)
    for (int flip_r = 0; flip_r < 2; ++flip_r)
      for (int flip_c = 0; flip_c < 2; ++flip_c) {
        std::array<int, 4> map{};
        for (int i = 0; i < 4; ++i) {
          int r = i / 2, c = i % 2;
          if (transpose) std::swap(r, c);
          map[i] = 2 * (flip_r ? 1 - r : r) + (flip_c ? 1 - c : c);
        }
        symmetries.push_back(map);
      }

  std::vector<CircuitLayout> out;
  std::vector<int> seq;
  auto emit = [&]() {
    for (const auto& map : symmetries) {
      std::vector<int> image;
      for (int g : seq) image.push_back(edge_of(map[edges[g][0]], map[edges[g][1]]));
      if (image < seq) return;
    }
    CircuitLayout layout;
    layout.rows = 2;
    layout.cols = 2;
    layout.q = q;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const auto [a, b] = edges[seq[k]];
      layout.events.push_back({static_cast<int>(k) + 1, {{a / 2, a % 2}, {b / 2, b % 2}}, GateKind::haar_two_site});
    }
    out.push_back(std::move(layout));
  };
  auto extend = [&](auto&& self) -> void {
    if (!seq.empty()) emit();
    if (seq.size() == max_gates) return;
    for (int g = 0; g < 4; ++g) {
      if (!seq.empty() && seq.back() == g) continue;
      seq.push_back(g);
      self(self);
      seq.pop_back();
    }
  };
  extend(extend);
  return out;
}

namespace {

struct RationalFactor {
  std::vector<std::size_t> vars;  // sorted
  std::vector<Rational> table;    // first var most significant
};

std::size_t local_index(const RationalFactor& f, const std::vector<std::size_t>& vars, std::size_t assignment) {
  // `assignment` indexes `vars` (first most significant); f.vars is a subset.
  std::size_t idx = 0;
  for (std::size_t v : f.vars) {
    const std::size_t pos = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin());
    idx = (idx << 1) | ((assignment >> (vars.size() - 1 - pos)) & 1u);
  }
  return idx;
}

}  // namespace

Rational partition_function_exact(const SpinModel& model, std::size_t spin_cap) {
  if (model.free_spins() > spin_cap) throw ResourceCapExceeded("partition_function_exact: too many free spins");
  std::vector<std::ptrdiff_t> var(model.nodes.size(), -1);
  std::size_t n_vars = 0;
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (!model.nodes[i].fixed) var[i] = static_cast<std::ptrdiff_t>(n_vars++);

  std::vector<RationalFactor> factors;
  Rational constant = model.constant;
  for (const SpinEdge& e : model.edges) {
    const SpinNode &na = model.nodes[e.a], &nb = model.nodes[e.b];
    if (na.fixed && nb.fixed) {
      constant *= e.weight[2 * bit(*na.fixed) + bit(*nb.fixed)];
    } else if (na.fixed || nb.fixed) {
      const bool a_free = !na.fixed;
      const int fixed_bit = bit(a_free ? *nb.fixed : *na.fixed);
      RationalFactor f{{static_cast<std::size_t>(var[a_free ? e.a : e.b])}, {}};
      for (int s = 0; s < 2; ++s) f.table.push_back(a_free ? e.weight[2 * s + fixed_bit] : e.weight[2 * fixed_bit + s]);
      factors.push_back(std::move(f));
    } else {
      std::size_t va = static_cast<std::size_t>(var[e.a]), vb = static_cast<std::size_t>(var[e.b]);
      RationalFactor f{{std::min(va, vb), std::max(va, vb)}, std::vector<Rational>(4)};
      for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb) f.table[va < vb ? 2 * sa + sb : 2 * sb + sa] = e.weight[2 * sa + sb];
      factors.push_back(std::move(f));
    }
  }

  // Variable elimination, smallest intermediate factor first; this is the
  // configuration sum reordered, so the result is exact.
  std::vector<bool> eliminated(n_vars, false);
  for (std::size_t step = 0; step < n_vars; ++step) {
    std::size_t best = n_vars, best_size = std::numeric_limits<std::size_t>::max();
    for (std::size_t v = 0; v < n_vars; ++v) {
      if (eliminated[v]) continue;
      std::set<std::size_t> scope;
      for (const RationalFactor& f : factors)
        if (std::binary_search(f.vars.begin(), f.vars.end(), v)) scope.insert(f.vars.begin(), f.vars.end());
      if (scope.size() < best_size) {
        best = v;
        best_size = scope.size();
      }
    }
    if (best_size > 22) throw ResourceCapExceeded("partition_function_exact: intermediate factor too large");
    std::vector<RationalFactor> touching, rest;
    std::set<std::size_t> scope;
    for (RationalFactor& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), best)) {
        scope.insert(f.vars.begin(), f.vars.end());
        touching.push_back(std::move(f));
      } else {
        rest.push_back(std::move(f));
      }
    }
    const std::vector<std::size_t> full(scope.begin(), scope.end());
    const std::size_t pos = static_cast<std::size_t>(std::find(full.begin(), full.end(), best) - full.begin());
    RationalFactor out;
    for (std::size_t v : full)
      if (v != best) out.vars.push_back(v);
    out.table.assign(std::size_t{1} << out.vars.size(), Rational(0));
    for (std::size_t asg = 0; asg < (std::size_t{1} << full.size()); ++asg) {
      Rational p = 1;
      for (const RationalFactor& f : touching) {
        p *= f.table[local_index(f, full, asg)];
        if (p == 0) break;
      }
      // Drop the eliminated bit from the assignment.
      const std::size_t shift = full.size() - 1 - pos;
      const std::size_t high = asg >> (shift + 1), low = asg & ((std::size_t{1} << shift) - 1);
      out.table[(high << shift) | low] += p;
    }
    eliminated[best] = true;
    rest.push_back(std::move(out));
    factors = std::move(rest);
  }
  Rational z = constant;
  for (const RationalFactor& f : factors) z *= f.table.at(0);
  return z;
}

double quasi_entropy_exact(const CircuitLayout& layout, const SpinBoundary& boundary, std::size_t spin_cap) {
  SpinBoundary plain = boundary;
  plain.twisted.clear();
  const Rational z_a = partition_function_exact(build_spin_model(layout, boundary), spin_cap);
  const Rational z_0 = partition_function_exact(build_spin_model(layout, plain), spin_cap);
  if (!(z_a > 0 && z_0 > 0)) throw NumericalFailure("quasi_entropy_exact: non-positive partition function");
  const Rational ratio = z_a / z_0;
  return -std::log2(static_cast<double>(ratio));
}

DecimatedModel decimate(const SpinModel& model, const CircuitLayout& layout) {
  DecimatedModel out;
  std::vector<std::ptrdiff_t> spin(model.nodes.size(), -1);
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (model.nodes[i].kind == NodeKind::outgoing) {
      spin[i] = static_cast<std::ptrdiff_t>(out.n_spins++);
      out.gate_of_spin.push_back(model.nodes[i].gate);
    }
  out.terminal_factor.assign(layout.n_sites(), -1);
  out.log_constant = std::log(static_cast<double>(model.constant));

  std::vector<std::vector<std::size_t>> incident(model.nodes.size());
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    incident[model.edges[k].a].push_back(k);
    incident[model.edges[k].b].push_back(k);
  }
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    const SpinNode& node = model.nodes[i];
    if (node.kind == NodeKind::incoming) {
      // Sum the incoming spin out of its Weingarten edge and links.
      std::vector<std::size_t> nbrs;
      for (std::size_t k : incident[i]) {
        const std::size_t other = model.edges[k].a == i ? model.edges[k].b : model.edges[k].a;
        if (std::find(nbrs.begin(), nbrs.end(), other) == nbrs.end()) nbrs.push_back(other);
      }
      SpinFactor f;
      for (std::size_t n : nbrs) f.spins.push_back(static_cast<std::size_t>(spin[n]));
      for (std::size_t asg = 0; asg < (std::size_t{1} << nbrs.size()); ++asg) {
        Rational sum = 0;
        for (int tau = 0; tau < 2; ++tau) {
          Rational p = 1;
          for (std::size_t k : incident[i]) {
            const SpinEdge& e = model.edges[k];
            const std::size_t other = e.a == i ? e.b : e.a;
            const std::size_t pos = static_cast<std::size_t>(std::find(nbrs.begin(), nbrs.end(), other) - nbrs.begin());
            const int s = static_cast<int>((asg >> (nbrs.size() - 1 - pos)) & 1u);
            p *= e.a == i ? e.weight[2 * tau + s] : e.weight[2 * s + tau];
          }
          sum += p;
        }
        if (sum < 0) throw NumericalFailure("decimate: negative decimated weight");
        f.table.push_back(static_cast<double>(sum));
      }
      out.factors.push_back(std::move(f));
    } else if (node.kind == NodeKind::auxiliary) {
      const SpinEdge& e = model.edges[incident[i].at(0)];
      const std::size_t s = e.a == i ? e.b : e.a;
      const int chi = bit(*node.fixed);
      SpinFactor f{{static_cast<std::size_t>(spin[s])}, {}};
      for (int v = 0; v < 2; ++v) f.table.push_back(static_cast<double>(e.a == i ? e.weight[2 * chi + v] : e.weight[2 * v + chi]));
      out.terminal_factor[static_cast<std::size_t>(node.qudit)] = static_cast<std::ptrdiff_t>(out.factors.size());
      out.factors.push_back(std::move(f));
    }
  }
  return out;
}

double dephased_entropy_infinite_q(std::size_t size, std::size_t total, double q) {
  require(size <= total && total > 0, "dephased_entropy_infinite_q: region larger than the lattice");
  require(q > 1.0, "dephased_entropy_infinite_q: q must exceed 1");
  const double maximal = static_cast<double>(size) * std::log2(q);
  if (size < total) return maximal;
  return maximal - (1.0 - std::numbers::egamma) / std::numbers::ln2;
}

DephasedInfiniteQ dephased_cmi_infinite_q(std::size_t a, std::size_t b, std::size_t c, double q) {
  require(a > 0 && c > 0, "dephased_cmi_infinite_q: A and C must be non-empty");
  const std::size_t n = a + b + c;
  DephasedInfiniteQ out;
  out.closed_form = (1.0 - std::numbers::egamma) / std::numbers::ln2;
  // log2(k!) / (k - 1) at k = 1 + h is linear in h near 0; Richardson removes it.
  auto ratio = [](double h) { return std::lgamma(2.0 + h) / (h * std::numbers::ln2); };
  const double h = 1e-3;
  out.extrapolated = 2.0 * ratio(h / 2.0) - ratio(h);
  out.cmi = dephased_entropy_infinite_q(a + b, n, q) + dephased_entropy_infinite_q(b + c, n, q) -
            dephased_entropy_infinite_q(b, n, q) - dephased_entropy_infinite_q(n, n, q);
  return out;
}

}  // namespace shallow2d
