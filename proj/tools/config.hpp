// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "shallow2d/mps.hpp"
#include "shallow2d/sebd.hpp"

namespace shallow2d::cli {

// Every field except `output` and `workers` enters the config hash, so the
// hash identifies the data a run produces.
struct ExperimentConfig {
  std::string subcommand;
  std::string family = "brickwork";
  int rows = 4;
  int cols = 4;
  int q = 2;
  int r = 1;
  int v = 1;
  double eps = 0.0;
  std::size_t max_bond = 0;  // 0 = unbounded
  int trials = 1;
  std::uint64_t seed = 1;
  std::string format;  // jsonl | csv; empty picks the subcommand default
  std::vector<int> sizes;
  std::string outcome;
  int n = 20;
  double theta = 0.7853981633974483;
  int steps = 0;  // 0 = n
  int l = 0;      // 0 = 2 * depth + 1
  bool allow_short = false;
  std::vector<int> separations{1, 2, 3, 4, 5, 6};
  int samples = 200;
  int measured_cols = -1;  // -1 = all but the last column
  bool dephased = false;
  int width_offset = 2;
  std::string corpus;

  std::string output = "-";
  int workers = 1;

  FamilySpec family_spec() const;
  TruncationPolicy policy() const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& config);
// Overwrites the fields present in `j`; unknown keys are rejected.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);
// Validates ranges and the format name; throws InvalidArgument.
void validate(const ExperimentConfig& config);

// 64-bit FNV-1a of the canonical JSON of the hashed fields, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace shallow2d::cli
