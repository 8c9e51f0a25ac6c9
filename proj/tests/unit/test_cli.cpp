#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "shallow2d/errors.hpp"

using namespace shallow2d;
using namespace shallow2d::cli;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "shallow2d");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string run(ExperimentConfig c) {
  std::ostringstream out;
  run_command(c, out);
  return out.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("config hash ignores output and workers") {
  ExperimentConfig a;
  a.subcommand = "sample";
  ExperimentConfig b = a;
  b.workers = 4;
  b.output = "/tmp/elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config JSON round trip and validation") {
  ExperimentConfig a;
  a.subcommand = "cmi-scan";
  a.sizes = {3, 5};
  a.eps = 1e-6;
  a.max_bond = 16;
  ExperimentConfig b;
  apply_json(b, nlohmann::json::parse(to_json(a).dump()));
  CHECK(to_json(a) == to_json(b));
  CHECK(b.policy().max_bond == std::size_t{16});
  CHECK_THROWS_AS(apply_json(b, nlohmann::json::parse(R"({"colour": 1})")), InvalidArgument);
  CHECK_THROWS_AS(apply_json(b, nlohmann::json::parse(R"({"rows": "four"})")), InvalidArgument);
  b.format = "xml";
  CHECK_THROWS_AS(validate(b), InvalidArgument);
}

TEST_CASE("outputs are identical across worker counts") {
  for (const char* sub : {"sample", "cmi-scan", "entanglement-scan"}) {
    ExperimentConfig c;
    c.subcommand = sub;
    c.rows = 2;
    c.cols = 5;
    c.trials = 3;
    c.sizes = {4, 5};
    c.separations = {1, 2};
    const std::string one = run(c);
    c.workers = 3;
    CHECK(run(c) == one);
  }
}

TEST_CASE("output schemas") {
  struct Golden {
    std::vector<std::string> args;
    std::string columns;
  };
  const std::vector<Golden> golden{
      {{"statmech-couplings", "--q", "2"}, "seed,config_hash,q,coupling,value"},
      {{"entanglement-scan", "--sizes", "3"}, "seed,config_hash,size,instances,failures,mean_renyi_half,mean_renyi_one,"
                                              "stderr_renyi_one,mean_renyi_two,mean_max_bond"},
      {{"toy-model", "--n", "8"}, "seed,config_hash,trajectory,n,step,entropy,schmidt_count,tail_weight,lambda_max"},
      {{"spectrum-fit", "--n", "20"}, "seed,config_hash,trajectory,i_min,slope,intercept,r_squared,points"},
      {{"cmi-scan", "--rows", "2", "--cols", "3", "--separations", "1"},
       "seed,config_hash,separation,cmi_mean,cmi_stderr,n_instances,exact"},
      {{"statmech-z2", "--sizes", "4"}, "seed,config_hash,size,s2,stderr_s2,max_r_hat,converged,exact"},
      {{"statmech-z2", "--rows", "2", "--cols", "2"},
       "seed,config_hash,rows,cols,measured_cols,free_spins,z_empty,z_twisted,s2,method,z_empty_circuit,"
       "z_empty_circuit_stderr,z_twisted_circuit,z_twisted_circuit_stderr"},
      {{"sample", "--rows", "2", "--cols", "2", "--format", "csv"},
       "seed,config_hash,trial,failed,outcome,log_probability,max_bond,lambda,eps_total"},
      {{"prob", "--rows", "2", "--cols", "2", "--outcome", "0110", "--format", "csv"},
       "seed,config_hash,outcome,failed,probability,log_probability,oracle_probability,max_bond"},
      {{"patch-sample", "--rows", "2", "--cols", "2", "--l", "2", "--allow-short", "--format", "csv"},
       "seed,config_hash,trial,l,patches,stitches,outcome"},
  };
  for (const Golden& g : golden) {
    const Result r = invoke(g.args);
    INFO(g.args.front());
    CHECK(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() >= 3);
    CHECK(ls[0].rfind("# shallow2d 0.1.0 config_hash=", 0) == 0);
    CHECK(ls[1] == g.columns);
  }
  const auto js = lines(invoke({"sample", "--rows", "2", "--cols", "2"}).out);
  REQUIRE(js.size() == 2);
  const auto header = nlohmann::json::parse(js[0]);
  const auto row = nlohmann::json::parse(js[1]);
  CHECK(header["config"]["subcommand"] == "sample");
  CHECK(row["config_hash"] == header["config_hash"]);
  CHECK(row["seed"] == 1);
}

TEST_CASE("coupling values") {
  const Result r = invoke({"statmech-couplings", "--arch", "brickwork", "--q", "2"});
  CHECK(r.out.find(",J_vert,0.1115") != std::string::npos);
  CHECK(r.out.find(",J_horiz,0.3190") != std::string::npos);
  const Result t = invoke({"statmech-couplings", "--arch", "triangular", "--q", "3"});
  CHECK(t.out.find(",q_c,3.249") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(invoke({"no-such-command"}).code == 2);
  CHECK(invoke({"sample", "--rows", "0"}).code == 2);
  CHECK(invoke({"sample", "--family", "hexagonal"}).code == 2);
  const Result bad = invoke({"prob", "--rows", "1", "--cols", "2", "--outcome", "012"});
  CHECK(bad.code == 2);
  CHECK(bad.out.empty());
  CHECK(invoke({"patch-sample", "--rows", "8", "--cols", "8", "--l", "9"}).code == 3);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"--version"}).out.find("0.1.0") != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
  const std::string path = "test_cli_config.json";
  {
    std::ofstream f(path);
    f << R"({"subcommand": "statmech-couplings", "family": "brickwork", "q": 4})";
  }
  const Result from_file = invoke({"--config", path});
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find(",4,J_horiz,0.5003") != std::string::npos);
  const Result overridden = invoke({"statmech-couplings", "--config", path, "--q", "2"});
  CHECK(overridden.out.find(",2,J_horiz,0.3190") != std::string::npos);
  std::remove(path.c_str());
}
