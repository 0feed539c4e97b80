#include "cspr/error.hpp"

namespace cspr {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Format: return "format";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Singular: return "singular";
  }
  return "unknown";
}

}  // namespace cspr
