#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace iotsense {

/// Entry point of the `iotsense` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on usage errors and 2 on data errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iotsense
