// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lidlab::csv {

using Row = std::vector<std::string>;

/// RFC-4180 record reader. Quoted fields may span lines; `""` inside a quoted
/// field is an escaped quote. Accepts both LF and CRLF record terminators.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws a parse error on an
  /// unterminated quoted field.
  std::optional<Row> next();

  /// 1-based physical line on which the most recently returned record began.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace lidlab::csv
