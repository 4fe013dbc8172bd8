// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lidlab {

/// Broad failure classes. The command-line tool maps `io` to exit code 1 and
/// every other kind to exit code 2.
enum class ErrorKind {
  io,
  schema,
  empty_input,
  config,
  dimension,
  parse,
  numeric,
  version,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace lidlab
