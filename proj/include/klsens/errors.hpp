#pragma once

#include <stdexcept>
#include <string>

namespace klsens {

enum class ErrorKind {
  validation,     // malformed input, bad arguments, schema violations
  bias,           // configuration would make an estimator biased
  degeneracy,     // a model assumption is violated (e.g. constant cost)
  regime,         // a solver left its guaranteed-convergence regime
  numeric_range,  // overflow or irrecoverable loss of precision
  budget          // enumeration or sampling budget exceeded
};

const char* to_string(ErrorKind k);

/// Runtime failure carrying a machine-readable kind.
///
/// The command line tool maps kinds to exit codes: input problems
/// (validation, bias) exit 2, analysis regime problems (degeneracy, regime,
/// numeric_range) exit 3, budget violations exit 4.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg);
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept;

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg);

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace klsens
