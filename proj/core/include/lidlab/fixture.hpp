// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lidlab/corpus.hpp"

namespace lidlab {

/// Seeded generator for a desk-scale labeled corpus over up to 17 languages
/// in 8 scripts (Latin, Cyrillic, Greek, Arabic, Devanagari, Malayalam, Tamil,
/// Kannada). Sentences are Zipf-weighted draws from per-language word lists,
/// with occasional script-neutral loanwords and numerals mixed in.
struct FixtureSpec {
  std::size_t languages = 17;
  std::size_t docs_per_language = 200;
  std::uint64_t seed = 42;
  std::size_t min_words = 2;
  std::size_t max_words = 12;
  double loanword_rate = 0.08;
};

/// Codes of every language the generator knows, in label order.
std::vector<std::string> fixture_languages();

/// Documents are interleaved (one per language in turn) and normalized, so
/// the result is already a valid Corpus. Throws config error when
/// `spec.languages` is outside [2, 17] or the word bounds are inverted.
Corpus generate_fixture(const FixtureSpec& spec);

}  // namespace lidlab
