#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace xguard::cli {

// Runs one invocation; args excludes the program name. Returns 0, 1 or 2.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xguard::cli
