#pragma once

#include <stdexcept>
#include <string>

namespace pxa {

// Mirrors the process exit codes used by the CLI and the C API status codes.
enum class ErrorKind {
  invalid_input = 2,  // malformed arguments, files, or violated preconditions
  numeric = 3,        // degenerate geometry, behind-camera, ill-conditioned fits
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::invalid_input, what);
}

[[noreturn]] inline void throw_numeric(const std::string& what) {
  throw Error(ErrorKind::numeric, what);
}

}  // namespace pxa
