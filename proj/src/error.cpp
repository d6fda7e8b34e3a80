#include "captive/error.hpp"

namespace captive {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
      return "config";
    case ErrorKind::domain:
      return "domain";
    case ErrorKind::state:
      return "state";
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::numerical:
      return "numerical";
    case ErrorKind::statistical:
      return "statistical";
    case ErrorKind::usage:
      return "usage";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace captive
