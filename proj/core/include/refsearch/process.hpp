#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace refsearch {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs `program` with `args`, capturing both output streams. Standard input
/// is closed. `env` entries are added to the inherited environment. Throws
/// std::runtime_error when the program cannot be started.
ProcessResult run_process(const std::string& program, const std::vector<std::string>& args,
                          const std::map<std::string, std::string>& env = {},
                          const std::filesystem::path& cwd = {});

/// `/bin/sh -c command`.
ProcessResult run_shell(const std::string& command);

/// Single-quotes `text` for /bin/sh.
std::string shell_quote(const std::string& text);

}  // namespace refsearch
