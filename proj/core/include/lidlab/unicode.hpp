// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lidlab {

/// Canonical composition (NFC), full lowercasing, control-character removal,
/// whitespace collapsing and trimming. Total: malformed UTF-8 sequences are
/// replaced with U+FFFD before normalization.
std::string normalize_text(std::string_view raw);

/// Splits UTF-8 text into one string per code point.
std::vector<std::string> split_code_points(std::string_view utf8);

}  // namespace lidlab
