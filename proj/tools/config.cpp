// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include "config.hpp"

#include <cstdio>
#include <fstream>

#include "shallow2d/errors.hpp"

namespace shallow2d::cli {

FamilySpec ExperimentConfig::family_spec() const {
  FamilySpec spec;
  spec.family = family;
  spec.q = q;
  spec.r = r;
  spec.v = v;
  return spec;
}

TruncationPolicy ExperimentConfig::policy() const {
  TruncationPolicy p;
  p.eps = eps;
  if (max_bond > 0) p.max_bond = max_bond;
  return p;
}

namespace {

nlohmann::ordered_json hashed_fields(const ExperimentConfig& c) {
  return {{"subcommand", c.subcommand},
          {"family", c.family},
          {"rows", c.rows},
          {"cols", c.cols},
          {"q", c.q},
          {"r", c.r},
          {"v", c.v},
          {"eps", c.eps},
          {"max_bond", c.max_bond},
          {"trials", c.trials},
          {"seed", c.seed},
          {"format", c.format},
          {"sizes", c.sizes},
          {"outcome", c.outcome},
          {"n", c.n},
          {"theta", c.theta},
          {"steps", c.steps},
          {"l", c.l},
          {"allow_short", c.allow_short},
          {"separations", c.separations},
          {"samples", c.samples},
          {"measured_cols", c.measured_cols},
          {"dephased", c.dephased},
          {"width_offset", c.width_offset},
          {"corpus", c.corpus}};
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j = hashed_fields(config);
  j["output"] = config.output;
  j["workers"] = config.workers;
  return j;
}

void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  require(j.is_object(), "config: top level must be a JSON object");
  const nlohmann::ordered_json known = to_json(c);
  for (const auto& [key, value] : j.items())
    require(known.contains(key), "config: unknown key '" + key + "'");
  try {
    take(j, "subcommand", c.subcommand);
    take(j, "family", c.family);
    take(j, "rows", c.rows);
    take(j, "cols", c.cols);
    take(j, "q", c.q);
    take(j, "r", c.r);
    take(j, "v", c.v);
    take(j, "eps", c.eps);
    take(j, "max_bond", c.max_bond);
    take(j, "trials", c.trials);
    take(j, "seed", c.seed);
    take(j, "format", c.format);
    take(j, "sizes", c.sizes);
    take(j, "outcome", c.outcome);
    take(j, "n", c.n);
    take(j, "theta", c.theta);
    take(j, "steps", c.steps);
    take(j, "l", c.l);
    take(j, "allow_short", c.allow_short);
    take(j, "separations", c.separations);
    take(j, "samples", c.samples);
    take(j, "measured_cols", c.measured_cols);
    take(j, "dephased", c.dephased);
    take(j, "width_offset", c.width_offset);
    take(j, "corpus", c.corpus);
    take(j, "output", c.output);
    take(j, "workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config: " + path + ": " + e.what());
  }
  ExperimentConfig c;
  apply_json(c, j);
  return c;
}

void validate(const ExperimentConfig& c) {
  require(c.rows >= 1 && c.cols >= 1, "config: rows and cols must be positive");
  require(c.q >= 2, "config: q must be at least 2");
  require(c.trials >= 1, "config: trials must be positive");
  require(c.eps >= 0.0, "config: eps must be non-negative");
  require(c.format.empty() || c.format == "jsonl" || c.format == "csv", "config: format must be jsonl or csv");
  require(c.workers >= 1, "config: workers must be positive");
  require(c.n >= 2 && c.steps >= 0 && c.samples >= 1, "config: n, steps and samples out of range");
  for (int s : c.sizes) require(s >= 1, "config: sizes must be positive");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(hashed_fields(config).dump())));
  return buf;
}

}  // namespace shallow2d::cli
