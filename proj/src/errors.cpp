#include "klsens/errors.hpp"

namespace klsens {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::bias: return "bias";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::regime: return "regime";
    case ErrorKind::numeric_range: return "numeric-range";
    case ErrorKind::budget: return "budget";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& msg)
    : std::runtime_error(msg), kind_(kind) {}

int Error::exit_code() const noexcept {
  switch (kind_) {
    case ErrorKind::validation:
    case ErrorKind::bias:
      return 2;
    case ErrorKind::degeneracy:
    case ErrorKind::regime:
    case ErrorKind::numeric_range:
      return 3;
    case ErrorKind::budget:
      return 4;
  }
  return 1;
}

void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace klsens
