#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cspr {

/// Broad failure category. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,  ///< bad parameter or configuration
  Dimension,        ///< shape mismatch between inputs
  Format,           ///< malformed or missing input file
  Degenerate,       ///< degenerate data (too few samples, empty class, ties)
  Singular,         ///< numerically singular denominator
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace cspr
