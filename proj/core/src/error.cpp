// SPDX-License-Identifier: Apache-2.0
#include "lidlab/error.hpp"

namespace lidlab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io: return "io error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::config: return "configuration error";
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::version: return "version error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace lidlab
