#pragma once

#include <stdexcept>
#include <string>

namespace drlqg {

enum class ErrorKind {
  kInvalidInput,
  kNotPsd,
  kSingularMatrix,
  kDimensionMismatch,
  kNoConvergence,
  kIo,
  kParse,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kNotPsd: return "not positive semidefinite";
    case ErrorKind::kSingularMatrix: return "singular matrix";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kNoConvergence: return "no convergence";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kParse: return "parse error";
  }
  return "unknown";
}

#define DRLQG_THROW_UNLESS(cond, kind, msg)            \
  do {                                                 \
    if (!(cond)) throw ::drlqg::Error((kind), (msg));  \
  } while (false)

}  // namespace drlqg
