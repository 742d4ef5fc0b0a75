// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace alignkit {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Entry point of the `alignkit` tool. `args` excludes the program name.
///
/// Subcommands: featurize, train-reward, train-multi, eval, bench, validate.
/// Settings resolve as defaults, then the --config file, then flags.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alignkit
