#pragma once

#include <string>
#include <vector>

namespace rpg {

// Dispatches one CLI invocation (argv without the program name).
// Exit codes: 0 success, 1 usage error, 2 validation findings,
// 3 pipeline/provider failure.
int run_command(const std::vector<std::string>& args);

}  // namespace rpg
