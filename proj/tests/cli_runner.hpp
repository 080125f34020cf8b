#pragma once

// Runs the command-line tool as a child process and captures its output.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace cli {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string quote(const std::string& arg) {
  std::string q = "'";
  for (char c : arg) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  return q + "'";
}

class Sandbox {
 public:
  explicit Sandbox(const std::string& tag) {
    root_ = fs::temp_directory_path() / ("pxa_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Sandbox() { fs::remove_all(root_); }
  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;

  std::string path(const std::string& name) const { return (root_ / name).string(); }

  Result run(std::initializer_list<std::string> args) const {
    return run(std::vector<std::string>(args));
  }

  Result run(const std::vector<std::string>& args) const {
    std::string cmd = quote(PXA_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    const fs::path out = root_ / ".stdout", err = root_ / ".stderr";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
  }

  // Data files only; the captured stdout/stderr are removed after each run.
  std::size_t file_count() const {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(root_)) n += e.is_regular_file() ? 1 : 0;
    return n;
  }

 private:
  fs::path root_;
};

}  // namespace cli
