// SPDX-License-Identifier: Apache-2.0
#include "lidlab/ngram_detector.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

#include "lidlab/error.hpp"
#include "lidlab/unicode.hpp"

namespace lidlab::ngram {

Profile::Profile(std::vector<std::string> entries, std::size_t n_max, std::size_t cap)
    : entries_(std::move(entries)), n_max_(n_max), cap_(cap) {
  if (entries_.size() > cap_) fail(ErrorKind::config, "profile has more entries than its cap");
  ranks_.reserve(entries_.size());
  for (std::size_t r = 0; r < entries_.size(); ++r) {
    if (!ranks_.emplace(entries_[r], r).second) {
      fail(ErrorKind::config, "duplicate n-gram \"" + entries_[r] + "\" in profile");
    }
  }
}

std::size_t Profile::rank_or_penalty(const std::string& gram) const {
  const auto it = ranks_.find(gram);
  return it == ranks_.end() ? cap_ : it->second;
}

Profile build_profile(const std::vector<std::string>& texts, std::size_t n_max, std::size_t cap) {
  if (n_max < 1 || cap < 1) fail(ErrorKind::config, "n_max and cap must both be at least 1");

  std::unordered_map<std::string, std::size_t> counts;
  bool any = false;
  for (const auto& text : texts) {
    if (text.empty()) continue;
    any = true;
    std::vector<std::string> chars = split_code_points(text);
    chars.insert(chars.begin(), "_");
    chars.emplace_back("_");
    for (std::size_t start = 0; start < chars.size(); ++start) {
      std::string gram;
      for (std::size_t n = 1; n <= n_max && start + n <= chars.size(); ++n) {
        gram += chars[start + n - 1];
        ++counts[gram];
      }
    }
  }
  if (!any) fail(ErrorKind::empty_input, "cannot build an n-gram profile from empty text");

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  const std::size_t keep = std::min(cap, ranked.size());
  const auto order = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), order);

  std::vector<std::string> entries;
  entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) entries.push_back(std::move(ranked[i].first));
  return Profile(std::move(entries), n_max, cap);
}

std::size_t out_of_place_distance(const Profile& doc, const Profile& lang) {
  std::size_t distance = 0;
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const std::size_t other = lang.rank_or_penalty(doc.entries()[r]);
    if (other == lang.cap()) {
      distance += lang.cap();
    } else {
      distance += r > other ? r - other : other - r;
    }
  }
  return distance;
}

DetectorModel train_detector(const Corpus& train, std::size_t n_max, std::size_t cap) {
  std::vector<std::vector<std::string>> texts(train.labels.size());
  for (const auto& doc : train.documents) texts.at(doc.label).push_back(doc.text);

  DetectorModel model;
  model.labels = train.labels;
  model.n_max = n_max;
  model.cap = cap;
  for (std::size_t l = 0; l < texts.size(); ++l) {
    if (texts[l].empty()) {
      fail(ErrorKind::empty_input, "no training documents for language \"" + train.labels.code(l) + "\"");
    }
    model.profiles.push_back(build_profile(texts[l], n_max, cap));
  }
  return model;
}

Detection detect_profile(const Profile& doc, const DetectorModel& model) {
  if (model.profiles.empty()) fail(ErrorKind::config, "detector model has no language profiles");
  std::size_t best = 0;
  std::size_t best_distance = out_of_place_distance(doc, model.profiles[0]);
  for (std::size_t l = 1; l < model.profiles.size(); ++l) {
    const std::size_t d = out_of_place_distance(doc, model.profiles[l]);
    if (d < best_distance) {
      best = l;
      best_distance = d;
    }
  }
  return {model.labels.at(best), best_distance};
}

Detection detect(std::string_view text, const DetectorModel& model) {
  const std::string normalized = normalize_text(text);
  if (normalized.empty()) fail(ErrorKind::empty_input, "cannot detect the language of empty text");
  return detect_profile(build_profile({normalized}, model.n_max, model.cap), model);
}

MetricsReport evaluate_detector(const DetectorModel& model, const Corpus& test) {
  if (test.empty()) fail(ErrorKind::empty_input, "cannot evaluate on an empty test corpus");
  if (test.labels != model.labels) fail(ErrorKind::schema, "test corpus is not labeled against the model's label map");
  std::vector<std::size_t> truths;
  std::vector<std::size_t> preds;
  for (const auto& doc : test.documents) {
    truths.push_back(doc.label);
    preds.push_back(detect(doc.text, model).language.index);
  }
  return summarize(confusion(truths, preds, model.labels.size()), model.labels.codes());
}

std::string to_json(const DetectorModel& model) {
  nlohmann::ordered_json j;
  j["n_max"] = model.n_max;
  j["cap"] = model.cap;
  auto& profiles = j["profiles"] = nlohmann::ordered_json::object();
  for (std::size_t l = 0; l < model.profiles.size(); ++l) {
    profiles[model.labels.code(l)] = model.profiles[l].entries();
  }
  return j.dump();
}

DetectorModel detector_from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    DetectorModel model;
    model.n_max = j.at("n_max").get<std::size_t>();
    model.cap = j.at("cap").get<std::size_t>();
    std::vector<std::string> codes;
    for (const auto& [code, _] : j.at("profiles").items()) codes.push_back(code);
    model.labels = LabelMap(codes);
    for (const auto& code : model.labels.codes()) {
      model.profiles.emplace_back(j.at("profiles").at(code).get<std::vector<std::string>>(), model.n_max,
                                  model.cap);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed detector model: ") + e.what());
  }
}

}  // namespace lidlab::ngram
