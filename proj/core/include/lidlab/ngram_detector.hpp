// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lidlab/corpus.hpp"
#include "lidlab/metrics.hpp"

namespace lidlab::ngram {

inline constexpr std::size_t kDefaultMaxN = 3;
inline constexpr std::size_t kDefaultCap = 300;

/// Rank-ordered character n-gram profile. `entries()[r]` is the n-gram of
/// rank r: descending frequency, ties in ascending code-point order.
class Profile {
 public:
  Profile() = default;
  /// Throws config error if `entries` has duplicates or more than `cap` items.
  Profile(std::vector<std::string> entries, std::size_t n_max, std::size_t cap);

  const std::vector<std::string>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t cap() const noexcept { return cap_; }

  /// Rank of `gram`, or `cap()` (the out-of-place penalty) when absent.
  std::size_t rank_or_penalty(const std::string& gram) const;

  friend bool operator==(const Profile& a, const Profile& b) {
    return a.entries_ == b.entries_ && a.n_max_ == b.n_max_ && a.cap_ == b.cap_;
  }

 private:
  std::vector<std::string> entries_;
  std::size_t n_max_ = kDefaultMaxN;
  std::size_t cap_ = kDefaultCap;
  std::unordered_map<std::string, std::size_t> ranks_;
};

/// Counts n-grams of length 1..n_max over each text padded with one "_" at
/// both ends and keeps the `cap` most frequent. Throws config error for
/// n_max or cap of 0 and empty_input when every text is empty.
Profile build_profile(const std::vector<std::string>& texts, std::size_t n_max, std::size_t cap);

/// Sum over doc entries of |rank_doc - rank_lang|; n-grams missing from
/// `lang` cost `lang.cap`.
std::size_t out_of_place_distance(const Profile& doc, const Profile& lang);

struct DetectorModel {
  LabelMap labels;
  std::vector<Profile> profiles;  // indexed by label
  std::size_t n_max = kDefaultMaxN;
  std::size_t cap = kDefaultCap;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

struct Detection {
  LanguageId language;
  std::size_t distance;
};

/// One profile per language from every training document of that language.
/// Throws empty_input if some language in the label map has no documents.
DetectorModel train_detector(const Corpus& train, std::size_t n_max = kDefaultMaxN,
                             std::size_t cap = kDefaultCap);

/// Nearest language profile by out-of-place distance, ties to the lowest
/// index. `text` is normalized first; empty text throws empty_input.
Detection detect(std::string_view text, const DetectorModel& model);
Detection detect_profile(const Profile& doc, const DetectorModel& model);

/// Runs detect over a test corpus labeled against `model.labels`.
MetricsReport evaluate_detector(const DetectorModel& model, const Corpus& test);

/// JSON form: {"n_max", "cap", "profiles": {code: [ngram, ...]}} with ranks
/// implicit in array order.
std::string to_json(const DetectorModel& model);
DetectorModel detector_from_json(std::string_view json);

}  // namespace lidlab::ngram
