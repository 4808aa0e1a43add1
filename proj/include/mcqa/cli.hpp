#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcqa::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kData = 2,
    kNumeric = 3,
};

/// Runs one subcommand (demo | train | eval | fuse-learn | stats | transfer | validate).
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mcqa::cli
