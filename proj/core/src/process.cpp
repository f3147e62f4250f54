#include "refsearch/process.hpp"

#include <boost/asio/io_context.hpp>
#include <boost/process.hpp>
#include <future>
#include <stdexcept>

namespace refsearch {

namespace bp = boost::process;

ProcessResult run_process(const std::string& program, const std::vector<std::string>& args,
                          const std::map<std::string, std::string>& env, const std::filesystem::path& cwd) {
  boost::filesystem::path exe = program;
  if (program.find('/') == std::string::npos) {
    exe = bp::search_path(program);
    if (exe.empty()) throw std::runtime_error("program not found: " + program);
  }
  bp::environment child_env = boost::this_process::environment();
  for (const auto& [key, value] : env) child_env[key] = value;

  boost::asio::io_context io;
  std::future<std::string> out;
  std::future<std::string> err;
  ProcessResult result;
  try {
    bp::child child(exe, bp::args(args), bp::std_in.close(), bp::std_out > out, bp::std_err > err, child_env,
                    bp::start_dir(cwd.empty() ? std::filesystem::current_path().string() : cwd.string()), io);
    io.run();
    child.wait();
    result.exit_code = child.exit_code();
  } catch (const bp::process_error& e) {
    throw std::runtime_error("cannot run " + program + ": " + e.what());
  }
  result.out = out.get();
  result.err = err.get();
  return result;
}

ProcessResult run_shell(const std::string& command) { return run_process("/bin/sh", {"-c", command}); }

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace refsearch
