// SPDX-License-Identifier: Apache-2.0
#include "lidlab/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "lidlab/error.hpp"

namespace lidlab {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || instance == nullptr) {
    fail(ErrorKind::config, std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  }
  return *instance;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  icu::UnicodeString text =
      icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));

  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString composed = nfc().normalize(text, status);
  if (U_FAILURE(status)) composed = text;
  composed.toLower(icu::Locale::getRoot());

  // Lowercasing can produce decomposed sequences (e.g. U+0130), so compose again.
  status = U_ZERO_ERROR;
  icu::UnicodeString lowered = nfc().normalize(composed, status);
  if (U_FAILURE(status)) lowered = composed;

  icu::UnicodeString cleaned;
  bool pending_space = false;
  for (int32_t i = 0; i < lowered.length();) {
    const UChar32 cp = lowered.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      pending_space = !cleaned.isEmpty();
      continue;
    }
    if (u_charType(cp) == U_CONTROL_CHAR) continue;
    if (pending_space) {
      cleaned.append(static_cast<UChar>(u' '));
      pending_space = false;
    }
    cleaned.append(cp);
  }

  std::string out;
  cleaned.toUTF8String(out);
  return out;
}

std::vector<std::string> split_code_points(std::string_view utf8) {
  std::vector<std::string> out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) {
      out.emplace_back("\xEF\xBF\xBD");
    } else {
      out.emplace_back(utf8.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
  }
  return out;
}

}  // namespace lidlab
