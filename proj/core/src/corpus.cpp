// SPDX-License-Identifier: Apache-2.0
#include "lidlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "lidlab/csv.hpp"
#include "lidlab/error.hpp"
#include "lidlab/unicode.hpp"

namespace lidlab {

LabelMap::LabelMap(std::vector<std::string> codes) : codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
}

std::optional<std::size_t> LabelMap::find(const std::string& code) const {
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
  if (it == codes_.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - codes_.begin());
}

std::vector<std::size_t> Corpus::class_counts() const {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (const auto& doc : documents) ++counts.at(doc.label);
  return counts;
}

std::string LoadReport::to_json() const {
  nlohmann::ordered_json j;
  j["rows_read"] = rows_read;
  j["rows_kept"] = rows_kept;
  j["rows_skipped"] = rows_skipped;
  j["languages"] = languages;
  return j.dump(2);
}

namespace {

std::string lower_ascii(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool blank_record(const csv::Row& row) {
  return std::all_of(row.begin(), row.end(), [](const std::string& f) { return f.empty(); });
}

}  // namespace

LoadResult read_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  while (header && blank_record(*header)) header = reader.next();
  if (!header) fail(ErrorKind::empty_input, "corpus file is empty");

  std::optional<std::size_t> text_col;
  std::optional<std::size_t> lang_col;
  for (std::size_t i = 0; i < header->size(); ++i) {
    std::string name = lower_ascii(trim((*header)[i]));
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name = name.substr(3);
    if (name == "text" && !text_col) text_col = i;
    if (name == "language" && !lang_col) lang_col = i;
  }
  if (!text_col) fail(ErrorKind::schema, "missing column \"Text\"");
  if (!lang_col) fail(ErrorKind::schema, "missing column \"Language\"");

  struct Raw {
    std::string text;
    std::string code;
  };
  std::vector<Raw> kept;
  LoadReport report;
  const std::size_t needed = std::max(*text_col, *lang_col) + 1;
  while (auto row = reader.next()) {
    if (blank_record(*row)) continue;
    ++report.rows_read;
    if (row->size() < needed) {
      fail(ErrorKind::schema, "record on line " + std::to_string(reader.line()) + " has " +
                                  std::to_string(row->size()) + " fields, expected at least " +
                                  std::to_string(needed));
    }
    std::string text = normalize_text((*row)[*text_col]);
    std::string code = trim((*row)[*lang_col]);
    if (text.empty() || code.empty()) {
      ++report.rows_skipped;
      continue;
    }
    kept.push_back({std::move(text), std::move(code)});
  }
  if (kept.empty()) fail(ErrorKind::empty_input, "corpus contains no usable rows");

  std::vector<std::string> codes;
  codes.reserve(kept.size());
  for (const auto& r : kept) codes.push_back(r.code);
  LoadResult result;
  result.corpus.labels = LabelMap(std::move(codes));
  result.corpus.documents.reserve(kept.size());
  for (auto& r : kept) {
    result.corpus.documents.push_back({std::move(r.text), *result.corpus.labels.find(r.code)});
  }
  report.rows_kept = result.corpus.size();
  report.languages = result.corpus.labels.codes();
  result.report = std::move(report);
  return result;
}

LoadResult load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return read_csv(in);
}

void write_csv(const Corpus& corpus, std::ostream& out) {
  csv::write_row(out, {"Text", "Language"});
  for (const auto& doc : corpus.documents) {
    csv::write_row(out, {doc.text, corpus.labels.code(doc.label)});
  }
}

void write_csv(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  write_csv(corpus, out);
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

Corpus relabel(const Corpus& corpus, const LabelMap& target) {
  Corpus out;
  out.labels = target;
  out.documents.reserve(corpus.size());
  for (const auto& doc : corpus.documents) {
    const auto& code = corpus.labels.code(doc.label);
    const auto index = target.find(code);
    if (!index) fail(ErrorKind::schema, "language \"" + code + "\" is not in the model's label map");
    out.documents.push_back({doc.text, *index});
  }
  return out;
}

std::vector<bool> split_mask(const std::vector<std::size_t>& labels, std::size_t classes, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    fail(ErrorKind::config, "train_fraction must lie in (0, 1), got " + std::to_string(spec.train_fraction));
  }
  std::vector<std::vector<std::size_t>> groups;
  if (spec.stratified) {
    groups.resize(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) groups.at(labels[i]).push_back(i);
  } else {
    groups.emplace_back(labels.size());
    std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<bool> to_train(labels.size(), false);
  for (auto& members : groups) {
    const std::size_t n = members.size();
    if (n == 0) continue;
    auto k = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    k = n >= 2 ? std::clamp<std::size_t>(k, 1, n - 1) : 1;
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < k; ++j) to_train[members[j]] = true;
  }
  return to_train;
}

Split stratified_split(const Corpus& corpus, const SplitSpec& spec) {
  if (corpus.empty()) fail(ErrorKind::empty_input, "cannot split an empty corpus");
  std::vector<std::size_t> labels;
  labels.reserve(corpus.size());
  for (const auto& doc : corpus.documents) labels.push_back(doc.label);
  const std::vector<bool> to_train = split_mask(labels, corpus.labels.size(), spec);

  Split split;
  split.train.labels = corpus.labels;
  split.test.labels = corpus.labels;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (to_train[i] ? split.train : split.test).documents.push_back(corpus.documents[i]);
  }
  return split;
}

}  // namespace lidlab
