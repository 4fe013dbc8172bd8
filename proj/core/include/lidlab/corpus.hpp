// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace lidlab {

struct LanguageId {
  std::string code;
  std::size_t index = 0;

  friend bool operator==(const LanguageId&, const LanguageId&) = default;
};

/// Bijection between language codes and contiguous indices, assigned in
/// ascending lexicographic (byte) order of the codes.
class LabelMap {
 public:
  LabelMap() = default;
  /// Duplicates are removed; order of `codes` is irrelevant.
  explicit LabelMap(std::vector<std::string> codes);

  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }
  const std::string& code(std::size_t index) const { return codes_.at(index); }
  const std::vector<std::string>& codes() const noexcept { return codes_; }
  std::optional<std::size_t> find(const std::string& code) const;
  LanguageId at(std::size_t index) const { return {codes_.at(index), index}; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::vector<std::string> codes_;
};

struct Document {
  std::string text;   // normalized, non-empty
  std::size_t label;  // index into the owning corpus' LabelMap

  friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
  std::vector<Document> documents;
  LabelMap labels;

  std::size_t size() const noexcept { return documents.size(); }
  bool empty() const noexcept { return documents.empty(); }
  LanguageId language(const Document& doc) const { return labels.at(doc.label); }
  /// Per-class document counts, indexed by label.
  std::vector<std::size_t> class_counts() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> languages;

  std::string to_json() const;
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

/// Reads a headered CSV with "text" and "language" columns (case-insensitive).
/// Texts are normalized; rows whose text normalizes to empty are skipped and
/// counted. Throws schema error for missing columns and empty_input when the
/// file has no header or no surviving rows.
LoadResult load_csv(const std::filesystem::path& path);
LoadResult read_csv(std::istream& in);

/// Writes `Text,Language` rows. load_csv(write_csv(c)) reproduces c exactly.
void write_csv(const Corpus& corpus, std::ostream& out);
void write_csv(const Corpus& corpus, const std::filesystem::path& path);

/// Re-indexes a corpus against another label map, e.g. a test file against
/// the label map a model was trained with. Throws schema error naming the
/// first code that `target` does not contain.
Corpus relabel(const Corpus& corpus, const LabelMap& target);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  bool stratified = true;
};

struct Split {
  Corpus train;
  Corpus test;
};

/// Per class: floor(train_fraction * n) documents go to train, clamped to
/// [1, n-1] when n >= 2. Members are picked by a seeded shuffle; each split
/// keeps source order and the source label map. With `stratified == false`
/// the rule is applied once to the whole corpus.
Split stratified_split(const Corpus& corpus, const SplitSpec& spec);

/// The selection rule behind stratified_split over bare labels: element i is
/// true when item i goes to the train side.
std::vector<bool> split_mask(const std::vector<std::size_t>& labels, std::size_t classes, const SplitSpec& spec);

}  // namespace lidlab
