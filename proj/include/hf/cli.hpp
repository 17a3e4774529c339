#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hf::cli {

/// Runs one subcommand. args excludes the program name. Exit codes: 0 on
/// success, 1 when the computation finished but the checked claim is false,
/// 2 on usage or computation errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace hf::cli
