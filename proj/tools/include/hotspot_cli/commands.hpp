#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hotspot::cli {

// Parses argv and runs one of fit, tune, simulate, bootstrap, weights, report.
// Diagnostics go to `err`; returns the process exit status (0 on success).
// Files a failed command had already written are removed.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hotspot::cli
