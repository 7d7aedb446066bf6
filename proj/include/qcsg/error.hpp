#pragma once

#include <stdexcept>
#include <string>

namespace qcsg {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  Structural,    // malformed tree or primitive set
  Input,         // unreadable or malformed file
  Parameter,     // invalid numeric parameter
  Infeasible,    // a universe element no candidate covers
  Unsatisfiable, // no exact cover exists
  UnsupportedOracle,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 0 success, 2 infeasible/unsatisfiable, 3 input/parse error, 4 parameter error.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
    case ErrorKind::Unsatisfiable:
      return 2;
    case ErrorKind::Parameter:
      return 4;
    case ErrorKind::Structural:
    case ErrorKind::Input:
    case ErrorKind::UnsupportedOracle:
      return 3;
  }
  return 1;
}

}  // namespace qcsg
