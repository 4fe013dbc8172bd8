// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lidlab {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Whole-string decimal parse; throws parse error on trailing garbage.
double parse_double(std::string_view text);

/// Base64 of the little-endian IEEE-754 bytes, for bit-exact persistence.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view base64);

}  // namespace lidlab
