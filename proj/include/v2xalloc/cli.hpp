#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace v2x {

/// Entry point for the `v2xalloc` tool. `args` excludes the program name.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace v2x
