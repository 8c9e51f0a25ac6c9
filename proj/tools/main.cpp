// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return shallow2d::cli::run_cli(argc, argv, std::cout, std::cerr); }
