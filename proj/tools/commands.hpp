// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace shallow2d::cli {

inline constexpr const char* kVersion = SHALLOW2D_VERSION;

const std::vector<std::string>& subcommands();

// Runs one subcommand and writes its rows to `out`. Returns 0, or 1 when a
// `validate` check fails; library errors propagate.
int run_command(const ExperimentConfig& config, std::ostream& out);

// Full command line: parsing, --config, SHALLOW2D_WORKERS, exit codes
// (2 invalid configuration, 3 resource cap, 1 other failures).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shallow2d::cli
