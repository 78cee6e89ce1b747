// SPDX-License-Identifier: Apache-2.0
//
// Runs the rmc executable through the shell inside a scratch directory.
#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace rmc::testing {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

class CliSandbox {
 public:
  explicit CliSandbox(const std::string& name)
      : dir_(std::filesystem::temp_directory_path() /
             ("rmc-" + name + "-" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~CliSandbox() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  CliSandbox(const CliSandbox&) = delete;
  CliSandbox& operator=(const CliSandbox&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path operator/(const std::string& file) const { return dir_ / file; }

  /// `args` is appended verbatim; quote arguments with shell_quote.
  CliResult run(const std::string& args, const std::string& env = "") const {
    const auto out = dir_ / ".stdout", err = dir_ / ".stderr";
    const std::string cmd = "cd " + shell_quote(dir_.string()) + " && " + env + " " +
                            shell_quote(RMC_CLI_PATH) + " " + args + " > " +
                            shell_quote(out.string()) + " 2> " +
                            shell_quote(err.string());
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace rmc::testing
