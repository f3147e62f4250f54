#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace refsearch {

/// Exit codes: 0 success, 1 operational failure, 2 user error.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Entry point of the `refsearch` command; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The query, then a caret line under the offending span.
std::string caret_diagnostic(const std::string& query, std::size_t offset, std::size_t length);

}  // namespace refsearch
