// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "shallow2d/effective1d.hpp"
#include "shallow2d/errors.hpp"
#include "shallow2d/patching.hpp"
#include "shallow2d/sebd.hpp"
#include "shallow2d/statevector.hpp"
#include "shallow2d/statmech.hpp"

namespace py = pybind11;
using namespace shallow2d;

namespace {

FamilySpec spec_of(const std::string& family, int q) {
  FamilySpec spec;
  spec.family = family;
  spec.q = q;
  return spec;
}

TruncationPolicy policy_of(double eps, std::optional<std::size_t> max_bond) {
  TruncationPolicy p;
  p.eps = eps;
  p.max_bond = max_bond;
  return p;
}

py::array_t<int> to_array(const Outcome& x) { return py::array_t<int>(static_cast<py::ssize_t>(x.size()), x.data()); }

py::object fraction(const Rational& r) {
  return py::module_::import("fractions")
      .attr("Fraction")(py::int_(py::str(numerator(r).str())), py::int_(py::str(denominator(r).str())));
}

py::dict coupling_dict(const CouplingSet& set) {
  py::dict d;
  for (const auto& [k, v] : set.values) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sampling and analysis of shallow 2D random quantum circuits";

  py::register_exception<ResourceCapExceeded>(m, "ResourceCapExceeded", PyExc_MemoryError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "sample",
      [](const std::string& family, int rows, int cols, int q, std::uint64_t seed, std::uint64_t sample_seed, double eps,
         std::optional<std::size_t> max_bond) {
        SebdOptions opts;
        opts.policy = policy_of(eps, max_bond);
        const SebdSample s = sebd_sample(family_instance(spec_of(family, q), rows, cols, seed), opts, sample_seed);
        py::dict d;
        d["failed"] = s.failed;
        d["outcome"] = to_array(s.outcome);
        d["log_probability"] = s.log_probability;
        d["max_bond"] = s.max_bond;
        d["lambda"] = s.log.lambda();
        return d;
      },
      py::arg("family") = "brickwork", py::arg("rows") = 4, py::arg("cols") = 4, py::arg("q") = 2,
      py::arg("seed") = 1, py::arg("sample_seed") = 2, py::arg("eps") = 0.0, py::arg("max_bond") = py::none(),
      "One SEBD sample of a random instance; outcome in row-major site order.");

  m.def(
      "probability",
      [](const std::string& family, int rows, int cols, const std::vector<int>& outcome, int q, std::uint64_t seed,
         double eps, std::optional<std::size_t> max_bond) {
        return sebd_probability(family_instance(spec_of(family, q), rows, cols, seed), policy_of(eps, max_bond), outcome)
            .probability;
      },
      py::arg("family"), py::arg("rows"), py::arg("cols"), py::arg("outcome"), py::arg("q") = 2, py::arg("seed") = 1,
      py::arg("eps") = 0.0, py::arg("max_bond") = py::none(), "SEBD probability of a full outcome string.");

  m.def(
      "exact_distribution",
      [](const std::string& family, int rows, int cols, int q, std::uint64_t seed) {
        const auto p = exact_distribution(family_instance(spec_of(family, q), rows, cols, seed)).probabilities;
        return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
      },
      py::arg("family"), py::arg("rows"), py::arg("cols"), py::arg("q") = 2, py::arg("seed") = 1,
      "Statevector output distribution indexed by outcome (site 0 most significant).");

  m.def(
      "sebd_total_variation",
      [](const std::string& family, int rows, int cols, int q, std::uint64_t seed, double eps,
         std::optional<std::size_t> max_bond) {
        const CircuitInstance inst = family_instance(spec_of(family, q), rows, cols, seed);
        return sampler_total_variation(sebd_distribution(inst, policy_of(eps, max_bond)), exact_distribution(inst));
      },
      py::arg("family"), py::arg("rows"), py::arg("cols"), py::arg("q") = 2, py::arg("seed") = 1, py::arg("eps") = 0.0,
      py::arg("max_bond") = py::none(), "TV distance between the SEBD sampler and the statevector oracle.");

  m.def(
      "entanglement_scan",
      [](const std::vector<int>& sizes, int trials, const std::string& family, int q, double eps,
         std::optional<std::size_t> max_bond, std::uint64_t seed, int workers) {
        ScanConfig c;
        c.spec = spec_of(family, q);
        c.sizes = sizes;
        c.trials = trials;
        c.policy = policy_of(eps, max_bond);
        c.seed = seed;
        c.workers = workers;
        py::list out;
        for (const ScanSummary& s : entanglement_scan(c).summary) {
          py::dict d;
          d["size"] = s.size;
          d["instances"] = s.instances;
          d["failures"] = s.failures;
          d["mean_renyi_one"] = s.mean_renyi_one;
          d["stderr_renyi_one"] = s.stderr_renyi_one;
          d["mean_max_bond"] = s.mean_max_bond;
          out.append(d);
        }
        return out;
      },
      py::arg("sizes"), py::arg("trials") = 10, py::arg("family") = "brickwork", py::arg("q") = 2,
      py::arg("eps") = 0.0, py::arg("max_bond") = py::none(), py::arg("seed") = 1, py::arg("workers") = 1);

  m.def(
      "toy_model_spectrum",
      [](std::size_t n, double theta, int steps, std::uint64_t seed) {
        RandomStream rng(seed);
        const auto s = toy_model_run(n, theta, steps, rng).steps.back().schmidt;
        return py::array_t<double>(static_cast<py::ssize_t>(s.size()), s.data());
      },
      py::arg("n"), py::arg("theta") = 0.7853981633974483, py::arg("steps") = 100, py::arg("seed") = 1,
      "Final half-chain Schmidt values of the EPR toy dynamics.");

  m.def(
      "spectrum_fit",
      [](const std::vector<double>& spectrum, std::size_t i_min) {
        const SpectrumFit f = spectrum_fit(spectrum, i_min);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["r_squared"] = f.r_squared;
        d["points"] = f.points;
        return d;
      },
      py::arg("spectrum"), py::arg("i_min"), "Least squares of ln lambda_i against ln^2 i.");

  m.def(
      "patch_sample",
      [](const std::string& family, int rows, int cols, int l, int q, std::uint64_t seed, std::uint64_t sample_seed,
         bool allow_short) {
        const CircuitInstance inst = family_instance(spec_of(family, q), rows, cols, seed);
        PlanOptions po;
        po.allow_short_lengthscale = allow_short;
        const PatchPlan plan = plan_patches(inst.layout, l, po);
        PatchOracle oracle(inst);
        RandomStream rng(sample_seed);
        return to_array(recovery_stitch(oracle, plan, rng));
      },
      py::arg("family"), py::arg("rows"), py::arg("cols"), py::arg("l"), py::arg("q") = 2, py::arg("seed") = 1,
      py::arg("sample_seed") = 2, py::arg("allow_short") = false);

  m.def(
      "cmi_decay_scan",
      [](int rows, int cols, const std::vector<int>& separations, std::size_t instances, std::uint64_t seed,
         std::size_t samples, int workers) {
        CmiScanConfig c;
        c.rows = rows;
        c.cols = cols;
        c.separations = separations;
        c.instances = instances;
        c.seed = seed;
        c.samples = samples;
        c.workers = workers;
        py::list out;
        for (const CmiRow& r : cmi_decay_scan(c).rows) {
          py::dict d;
          d["separation"] = r.separation;
          d["cmi_mean"] = r.cmi_mean;
          d["cmi_stderr"] = r.cmi_stderr;
          d["exact"] = r.exact;
          out.append(d);
        }
        return out;
      },
      py::arg("rows") = 4, py::arg("cols") = 10, py::arg("separations") = std::vector<int>{1, 2, 3, 4, 5, 6},
      py::arg("instances") = 20, py::arg("seed") = 1, py::arg("samples") = 200, py::arg("workers") = 1,
      "Column CMI I(A:C|B) in bits against separation on brickwork strips.");

  m.def(
      "weingarten_k2", [](const std::string& perm, int q) {
        require(perm == "e" || perm == "swap", "perm must be 'e' or 'swap'");
        return fraction(weingarten_k2(perm == "e" ? Perm2::e : Perm2::swap, q));
      },
      py::arg("perm"), py::arg("q"), "Weingarten weight of S_2 at dimension q^2, as a Fraction.");
  m.def("brickwork_couplings", [](double q) { return coupling_dict(brickwork_couplings(q)); }, py::arg("q"));
  m.def("weak_measurement_couplings", [](double q) { return coupling_dict(weak_measurement_couplings(q)); },
        py::arg("q"));
  m.def("triangular_critical_q", [] { return triangular_critical_q(); });
  m.def(
      "dephased_cmi_infinite_q",
      [](std::size_t a, std::size_t b, std::size_t c) {
        const DephasedInfiniteQ d = dephased_cmi_infinite_q(a, b, c);
        py::dict out;
        out["closed_form"] = d.closed_form;
        out["extrapolated"] = d.extrapolated;
        out["cmi"] = d.cmi;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("c"));
  m.def(
      "quasi_entropy_scan",
      [](const std::vector<int>& sizes, int q, bool dephased, int width_offset, std::uint64_t seed) {
        QuasiEntropyScanConfig c;
        c.spec.q = q;
        c.sizes = sizes;
        c.dephased = dephased;
        c.width_offset = width_offset;
        c.mc.seed = seed;
        py::list out;
        for (const QuasiEntropyRow& r : quasi_entropy_scan(c)) {
          py::dict d;
          d["size"] = r.size;
          d["s2"] = r.estimate.s2;
          d["stderr_s2"] = r.estimate.stderr_s2;
          d["exact"] = r.estimate.exact;
          out.append(d);
        }
        return out;
      },
      py::arg("sizes"), py::arg("q") = 2, py::arg("dephased") = false, py::arg("width_offset") = 2,
      py::arg("seed") = 1, "k = 2 quasi-entropy of brickwork strips against strip height.");
}
