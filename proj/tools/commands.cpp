// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string_view>

#include "shallow2d/effective1d.hpp"
#include "shallow2d/errors.hpp"
#include "shallow2d/patching.hpp"
#include "shallow2d/statevector.hpp"
#include "shallow2d/statmech.hpp"

namespace shallow2d::cli {

namespace {

using Row = nlohmann::ordered_json;

// Rows of one table. Every row starts with the seed and the config hash.
class RowWriter {
 public:
  RowWriter(std::ostream& out, const ExperimentConfig& config, bool csv)
      : out_(out), config_(config), hash_(config_hash(config)), csv_(csv) {}

  void write(const Row& fields) {
    if (!wrote_banner_) banner();
    Row row{{"seed", config_.seed}, {"config_hash", hash_}};
    for (const auto& [k, v] : fields.items()) row[k] = v;
    if (!csv_) {
      out_ << row.dump() << '\n';
      return;
    }
    if (!wrote_header_) {
      bool first = true;
      for (const auto& [k, v] : row.items()) {
        out_ << (first ? "" : ",") << k;
        first = false;
      }
      out_ << '\n';
      wrote_header_ = true;
    }
    bool first = true;
    for (const auto& [k, v] : row.items()) {
      out_ << (first ? "" : ",");
      if (v.is_string()) {
        out_ << v.get<std::string>();
      } else if (v.is_boolean()) {
        out_ << (v.get<bool>() ? 1 : 0);
      } else if (!v.is_null()) {
        out_ << v.dump();
      }
      first = false;
    }
    out_ << '\n';
  }

 private:
  // Written with the first row, so a run that fails early emits nothing.
  void banner() {
    if (csv_) {
      out_ << "# shallow2d " << kVersion << " config_hash=" << hash_ << '\n';
    } else {
      Row header{{"shallow2d", kVersion}, {"config_hash", hash_}, {"config", to_json(config_)}};
      header["config"].erase("output");
      header["config"].erase("workers");
      out_ << header.dump() << '\n';
    }
    wrote_banner_ = true;
  }

  std::ostream& out_;
  const ExperimentConfig& config_;
  std::string hash_;
  bool csv_;
  bool wrote_banner_ = false;
  bool wrote_header_ = false;
};

std::string outcome_string(const Outcome& x) {
  std::string s;
  for (int v : x) s += static_cast<char>(v < 10 ? '0' + v : 'a' + v - 10);
  return s;
}

Outcome parse_outcome(const std::string& s, int q) {
  Outcome x;
  for (char ch : s) {
    int v = -1;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    if (ch >= 'a' && ch <= 'z') v = ch - 'a' + 10;
    require(v >= 0 && v < q, "prob: outcome digit out of range");
    x.push_back(v);
  }
  return x;
}

Row json_or_null(bool present, double value) { return present ? Row(value) : Row(nullptr); }

int cmd_sample(const ExperimentConfig& c, RowWriter& w) {
  SebdOptions opts;
  opts.policy = c.policy();
  const auto samples = parallel_map<SebdSample>(static_cast<std::size_t>(c.trials), c.workers, [&](std::size_t t) {
    const CircuitInstance inst = family_instance(c.family_spec(), c.rows, c.cols, derive_seed(c.seed, 2 * t));
    return sebd_sample(inst, opts, derive_seed(c.seed, 2 * t + 1));
  });
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const SebdSample& s = samples[t];
    w.write({{"trial", t},
             {"failed", s.failed},
             {"outcome", outcome_string(s.outcome)},
             {"log_probability", json_or_null(!s.failed, s.log_probability)},
             {"max_bond", s.max_bond},
             {"lambda", s.log.lambda()},
             {"eps_total", s.log.eps_total()}});
  }
  return 0;
}

int cmd_prob(const ExperimentConfig& c, RowWriter& w) {
  const CircuitInstance inst = family_instance(c.family_spec(), c.rows, c.cols, derive_seed(c.seed, 0));
  const Outcome x = parse_outcome(c.outcome, c.q);
  require(x.size() == inst.layout.n_sites(), "prob: outcome length must equal rows * cols");
  const SebdProbability p = sebd_probability(inst, c.policy(), x);
  const bool small = static_cast<double>(x.size()) * std::log2(c.q) <= 20.0;
  const double oracle = small ? exact_distribution(inst).probability(x) : 0.0;
  w.write({{"outcome", c.outcome},
           {"failed", p.failed},
           {"probability", p.probability},
           {"log_probability", json_or_null(p.probability > 0.0, p.log_probability)},
           {"oracle_probability", json_or_null(small, oracle)},
           {"max_bond", p.max_bond}});
  return 0;
}

int cmd_entanglement_scan(const ExperimentConfig& c, RowWriter& w) {
  require(!c.sizes.empty(), "entanglement-scan: --sizes is required");
  ScanConfig sc;
  sc.spec = c.family_spec();
  sc.sizes = c.sizes;
  sc.trials = c.trials;
  sc.policy = c.policy();
  sc.seed = c.seed;
  sc.workers = c.workers;
  for (const ScanSummary& s : entanglement_scan(sc).summary)
    w.write({{"size", s.size},
             {"instances", s.instances},
             {"failures", s.failures},
             {"mean_renyi_half", s.mean_renyi_half},
             {"mean_renyi_one", s.mean_renyi_one},
             {"stderr_renyi_one", s.stderr_renyi_one},
             {"mean_renyi_two", s.mean_renyi_two},
             {"mean_max_bond", s.mean_max_bond}});
  return 0;
}

std::vector<DynamicsTrace> toy_traces(const ExperimentConfig& c) {
  const int steps = c.steps > 0 ? c.steps : c.n;
  return toy_model_ensemble(static_cast<std::size_t>(c.n), c.theta, steps, static_cast<std::size_t>(c.trials), c.seed,
                            c.workers);
}

int cmd_toy_model(const ExperimentConfig& c, RowWriter& w) {
  const auto traces = toy_traces(c);
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const TraceStep& last = traces[t].steps.back();
    w.write({{"trajectory", t},
             {"n", c.n},
             {"step", last.step},
             {"entropy", last.entropy},
             {"schmidt_count", last.schmidt.size()},
             {"tail_weight", last.tail_weight},
             {"lambda_max", last.schmidt.empty() ? 0.0 : last.schmidt.front()}});
  }
  return 0;
}

int cmd_spectrum_fit(const ExperimentConfig& c, RowWriter& w) {
  const auto traces = toy_traces(c);
  const std::size_t i_star = default_i_star(static_cast<std::size_t>(c.n));
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const SpectrumFit fit = spectrum_fit(traces[t].steps.back().schmidt, i_star);
    w.write({{"trajectory", t},
             {"i_min", i_star},
             {"slope", fit.slope},
             {"intercept", fit.intercept},
             {"r_squared", fit.r_squared},
             {"points", fit.points}});
  }
  return 0;
}

int cmd_patch_sample(const ExperimentConfig& c, RowWriter& w) {
  const CircuitInstance inst = family_instance(c.family_spec(), c.rows, c.cols, derive_seed(c.seed, 0));
  const int l = c.l > 0 ? c.l : 2 * inst.layout.depth() + 1;
  PlanOptions po;
  po.allow_short_lengthscale = c.allow_short;
  const PatchPlan plan = plan_patches(inst.layout, l, po);
  PatchOracle oracle(inst);
  for (int t = 0; t < c.trials; ++t) {
    RandomStream rng(derive_seed(c.seed, static_cast<std::uint64_t>(t) + 1));
    const Outcome x = recovery_stitch(oracle, plan, rng);
    w.write({{"trial", t},
             {"l", l},
             {"patches", plan.patches.size()},
             {"stitches", plan.stitches.size()},
             {"outcome", outcome_string(x)}});
  }
  return 0;
}

int cmd_cmi_scan(const ExperimentConfig& c, RowWriter& w) {
  CmiScanConfig sc;
  sc.spec = c.family_spec();
  sc.rows = c.rows;
  sc.cols = c.cols;
  sc.separations = c.separations;
  sc.instances = static_cast<std::size_t>(c.trials);
  sc.seed = c.seed;
  sc.workers = c.workers;
  sc.samples = static_cast<std::size_t>(c.samples);
  for (const CmiRow& r : cmi_decay_scan(sc).rows)
    w.write({{"separation", r.separation},
             {"cmi_mean", r.cmi_mean},
             {"cmi_stderr", r.cmi_stderr},
             {"n_instances", r.instances},
             {"exact", r.exact}});
  return 0;
}

int cmd_statmech_couplings(const ExperimentConfig& c, RowWriter& w) {
  CouplingSet set;
  if (c.family == "brickwork") {
    set = brickwork_couplings(c.q);
    set.values.emplace_back("J_square", square_ising_critical_coupling());
  } else if (c.family == "triangular") {
    set = weak_measurement_couplings(c.q);
    set.values.emplace_back("criterion", triangular_criterion(c.q));
    set.values.emplace_back("q_c", triangular_critical_q());
  } else {
    throw InvalidArgument("statmech-couplings: --arch must be brickwork or triangular");
  }
  for (const auto& [name, value] : set.values) w.write({{"q", c.q}, {"coupling", name}, {"value", value}});
  return 0;
}

int cmd_statmech_z2(const ExperimentConfig& c, RowWriter& w) {
  if (!c.sizes.empty()) {
    QuasiEntropyScanConfig sc;
    sc.spec = c.family_spec();
    sc.sizes = c.sizes;
    sc.width_offset = c.width_offset;
    sc.dephased = c.dephased;
    sc.mc.seed = c.seed;
    sc.mc.workers = c.workers;
    for (const QuasiEntropyRow& r : quasi_entropy_scan(sc))
      w.write({{"size", r.size},
               {"s2", r.estimate.s2},
               {"stderr_s2", r.estimate.stderr_s2},
               {"max_r_hat", r.estimate.max_r_hat},
               {"converged", r.estimate.converged},
               {"exact", r.estimate.exact}});
    return 0;
  }
  const CircuitLayout layout = family_layout(c.family_spec(), c.rows, c.cols);
  const int measured = c.measured_cols >= 0 ? c.measured_cols : c.cols - 1;
  require(measured < c.cols, "statmech-z2: measured_cols must leave an unmeasured column");
  SpinBoundary b;
  b.dephased = c.dephased;
  for (int r = 0; r < c.rows; ++r)
    for (int col = 0; col < measured; ++col) b.measured.push_back({r, col});
  for (int r = 0; r < c.rows / 2; ++r) b.twisted.push_back({r, c.cols - 1});
  SpinBoundary empty = b;
  empty.twisted.clear();

  Row row{{"rows", c.rows}, {"cols", c.cols}, {"measured_cols", measured}};
  const SpinModel model = build_spin_model(layout, b);
  row["free_spins"] = model.free_spins();
  try {
    const Rational za = partition_function_exact(model);
    const Rational z0 = partition_function_exact(build_spin_model(layout, empty));
    row["z_empty"] = static_cast<double>(z0);
    row["z_twisted"] = static_cast<double>(za);
    row["s2"] = -std::log2(static_cast<double>(za / z0));
    row["method"] = "enumeration";
  } catch (const ResourceCapExceeded&) {
    McOptions mc;
    mc.seed = c.seed;
    mc.workers = c.workers;
    const QuasiEntropyEstimate e = quasi_entropy_mc(layout, b, mc);
    row["z_empty"] = nullptr;
    row["z_twisted"] = nullptr;
    row["s2"] = e.s2;
    row["method"] = "metropolis";
  }
  const bool sampled = c.trials > 1 && layout.n_sites() * std::log2(c.q) <= 20.0;
  const CircuitAverage avg = sampled ? circuit_average_z2(layout, b, static_cast<std::size_t>(c.trials), c.seed, c.workers)
                                     : CircuitAverage{};
  row["z_empty_circuit"] = json_or_null(sampled, avg.z_empty);
  row["z_empty_circuit_stderr"] = json_or_null(sampled, avg.z_empty_stderr);
  row["z_twisted_circuit"] = json_or_null(sampled, avg.z_twisted);
  row["z_twisted_circuit_stderr"] = json_or_null(sampled, avg.z_twisted_stderr);
  w.write(row);
  return 0;
}

int cmd_validate(const ExperimentConfig& c, RowWriter& w) {
  const std::string path = c.corpus.empty() ? std::string(SHALLOW2D_DATA_DIR) + "/validate_corpus.json" : c.corpus;
  std::ifstream in(path);
  require(static_cast<bool>(in), "validate: cannot open corpus " + path);
  nlohmann::json corpus;
  try {
    corpus = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("validate: " + path + ": " + e.what());
  }
  bool all_pass = true;
  auto report = [&](const std::string& check, const std::string& name, double value, double tolerance, bool pass) {
    all_pass = all_pass && pass;
    w.write({{"check", check}, {"case", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}});
  };

  for (const auto& entry : corpus.at("circuits")) {
    FamilySpec spec;
    spec.family = entry.at("family").get<std::string>();
    spec.q = entry.value("q", 2);
    const int rows = entry.at("rows").get<int>(), cols = entry.at("cols").get<int>();
    const CircuitInstance inst = family_instance(spec, rows, cols, entry.value("seed", std::uint64_t{1}));
    const std::string name = spec.family + "_" + std::to_string(rows) + "x" + std::to_string(cols);
    const OutputDistribution exact = exact_distribution(inst);
    const double tv = sampler_total_variation(sebd_distribution(inst, TruncationPolicy{}), exact);
    report("sebd_exact_tv", name, tv, 1e-8, tv <= 1e-8);
    if (spec.family == "chr") {
      const double tv_chr = total_variation(chr_effective_distribution(inst).probabilities, exact.probabilities);
      report("chr_effective_tv", name, tv_chr, 1e-8, tv_chr <= 1e-8);
    }
  }

  const auto& sm = corpus.at("statmech");
  const std::size_t instances = sm.value("instances", std::size_t{4000});
  std::uint64_t seed = c.seed;
  for (int q : sm.at("q").get<std::vector<int>>()) {
    const auto layouts = small_layouts(q, sm.value("max_gates", std::size_t{3}));
    double worst_norm = 0.0, worst_sigma = 0.0;
    for (const CircuitLayout& layout : layouts) {
      worst_norm = std::max(worst_norm, std::abs(static_cast<double>(partition_function_exact(build_spin_model(layout, {}))) - 1.0));
      const SpinBoundary b{{{0, 0}}, {{1, 1}}, false};
      const double za = static_cast<double>(partition_function_exact(build_spin_model(layout, b)));
      const CircuitAverage avg = circuit_average_z2(layout, b, instances, seed++, c.workers);
      worst_sigma = std::max(worst_sigma, std::abs(za - avg.z_twisted) / avg.z_twisted_stderr);
    }
    const std::string name = "q" + std::to_string(q) + "_layouts" + std::to_string(layouts.size());
    report("statmech_unitary_norm", name, worst_norm, 0.0, worst_norm == 0.0);
    report("statmech_two_oracle_sigma", name, worst_sigma, 4.0, worst_sigma <= 4.0);
  }
  return all_pass ? 0 : 1;
}

using Handler = int (*)(const ExperimentConfig&, RowWriter&);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
  bool csv_default;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"sample", "draw SEBD samples, one per trial instance", cmd_sample, false},
      {"prob", "SEBD probability of --outcome", cmd_prob, false},
      {"entanglement-scan", "half-chain entropies of the SEBD sweep against lattice size", cmd_entanglement_scan, true},
      {"toy-model", "EPR toy dynamics trajectories", cmd_toy_model, true},
      {"spectrum-fit", "fit ln lambda against ln^2 i on toy spectra", cmd_spectrum_fit, true},
      {"patch-sample", "sample by patching and recovery-map stitching", cmd_patch_sample, false},
      {"cmi-scan", "column conditional mutual information against separation", cmd_cmi_scan, true},
      {"statmech-couplings", "spin-model couplings (--arch brickwork|triangular)", cmd_statmech_couplings, true},
      {"statmech-z2", "k = 2 partition functions and quasi-entropy", cmd_statmech_z2, true},
      {"validate", "oracle-equivalence checks on the bundled corpus", cmd_validate, true},
  };
  return list;
}

void add_options(CLI::App* app, ExperimentConfig& c, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config file; flags override it");
  app->add_option("--arch,--family", c.family, "architecture family");
  app->add_option("--rows,--L1", c.rows);
  app->add_option("--cols,--L2", c.cols);
  app->add_option("--q", c.q, "local dimension");
  app->add_option("--r", c.r);
  app->add_option("--v", c.v);
  app->add_option("--eps", c.eps, "truncation budget per bond");
  app->add_option("--max-bond", c.max_bond, "bond cap, 0 for none");
  app->add_option("--trials", c.trials);
  app->add_option("--seed", c.seed);
  app->add_option("--output,-o", c.output, "output path, - for stdout");
  app->add_option("--format", c.format, "jsonl or csv");
  app->add_option("--sizes", c.sizes)->delimiter(',');
  app->add_option("--outcome", c.outcome);
  app->add_option("--n", c.n);
  app->add_option("--theta", c.theta);
  app->add_option("--steps", c.steps);
  app->add_option("--l", c.l, "patch lengthscale, 0 for 2 depth + 1");
  app->add_flag("--allow-short", c.allow_short);
  app->add_option("--separations", c.separations)->delimiter(',');
  app->add_option("--samples", c.samples);
  app->add_option("--measured-cols", c.measured_cols);
  app->add_flag("--dephased", c.dephased);
  app->add_option("--width-offset", c.width_offset);
  app->add_option("--corpus", c.corpus);
  app->add_option("--workers", c.workers, "worker threads (default SHALLOW2D_WORKERS or 1)");
}

// Value of --config in argv, if any.
std::string find_config_path(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.starts_with("--config=")) return std::string(a.substr(9));
  }
  return {};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Command& c : commands()) out.push_back(c.name);
    return out;
  }();
  return names;
}

int run_command(const ExperimentConfig& config, std::ostream& out) {
  validate(config);
  for (const Command& cmd : commands()) {
    if (config.subcommand != cmd.name) continue;
    const bool csv = config.format.empty() ? cmd.csv_default : config.format == "csv";
    RowWriter writer(out, config, csv);
    return cmd.handler(config, writer);
  }
  throw InvalidArgument("unknown subcommand '" + config.subcommand + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config;
    const std::string file = find_config_path(argc, argv);
    if (!file.empty()) config = load_config_file(file);
    if (const char* env = std::getenv("SHALLOW2D_WORKERS")) {
      try {
        config.workers = std::stoi(env);
      } catch (const std::exception&) {
        throw InvalidArgument("SHALLOW2D_WORKERS must be an integer");
      }
    }

    CLI::App app{"Sampling and analysis of shallow 2D random quantum circuits"};
    app.set_version_flag("--version", std::string("shallow2d ") + kVersion);
    app.require_subcommand(0, 1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file naming the subcommand");
    for (const Command& cmd : commands()) add_options(app.add_subcommand(cmd.name, cmd.help), config, config_path);
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }
    if (app.get_subcommands().empty()) {
      if (config.subcommand.empty()) {
        err << app.help();
        return 2;
      }
    } else {
      config.subcommand = app.get_subcommands().front()->get_name();
    }

    if (config.output == "-") return run_command(config, out);
    std::ofstream file_out(config.output);
    require(static_cast<bool>(file_out), "cannot open output " + config.output);
    return run_command(config, file_out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceCapExceeded& e) {
    err << "resource cap: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace shallow2d::cli
