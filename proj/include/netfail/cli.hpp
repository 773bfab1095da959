#pragma once

#include <string>
#include <vector>

namespace netfail {

inline constexpr const char* kVersion = "0.1.0";

// Entry point behind the netfail binary. args excludes the program name.
// Exit status: 0 success, 2 validation/usage error, 3 not-certified
// verdict under --require-certified.
int run_command(const std::vector<std::string>& args);

}  // namespace netfail
