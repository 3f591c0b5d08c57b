#pragma once

#include <string>
#include <vector>

namespace bridgewatch {

/// Exit codes: 0 success, 1 usage error, 2 input or validation error,
/// 3 internal error. Diagnostics go to stderr.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace bridgewatch
