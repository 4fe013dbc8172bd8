// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lidlab::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kIoError = 1, kInvalid = 2 };

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one `lidlab` invocation; `args` excludes the program name.
/// Subcommands: fixture, ingest, split, train, detect, evaluate, embed, tsne,
/// report. Each successful run that writes files also writes
/// `<out>.manifest.json`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lidlab::cli
