#include <doctest.h>

#include <map>
#include <random>

#include "lidlab/error.hpp"
#include "lidlab/fixture.hpp"
#include "lidlab/ngram_detector.hpp"
#include "lidlab/unicode.hpp"

using namespace lidlab;
using ngram::build_profile;
using ngram::Profile;

namespace {

using Entries = std::vector<std::string>;

// Reference out-of-place distance from plain rank lookups.
std::size_t brute_distance(const Entries& doc, const Entries& lang, std::size_t cap) {
  std::size_t total = 0;
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const auto it = std::find(lang.begin(), lang.end(), doc[r]);
    if (it == lang.end()) {
      total += cap;
    } else {
      const auto other = static_cast<std::size_t>(it - lang.begin());
      total += r > other ? r - other : other - r;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("profile of a tiny text by hand") {
  CHECK(build_profile({"aa"}, 1, 300).entries() == Entries{"_", "a"});
  CHECK(build_profile({"aa"}, 3, 300).entries() == Entries{"_", "a", "_a", "_aa", "a_", "aa", "aa_"});
  CHECK(build_profile({"b"}, 2, 300).entries() == Entries{"_", "_b", "b", "b_"});
  CHECK(build_profile({"aa"}, 3, 2).entries() == Entries{"_", "a"});
}

TEST_CASE("profiles count code points, not bytes") {
  const auto p = build_profile({"\xce\xb1\xce\xb2"}, 2, 300);  // alpha beta
  CHECK(p.size() == 3 + 3);
  CHECK(p.rank_or_penalty("\xce\xb1\xce\xb2") < 300);
}

TEST_CASE("empty input and bad parameters") {
  CHECK_THROWS_AS(build_profile({"", ""}, 3, 300), Error);
  CHECK_THROWS_AS(build_profile({"a"}, 0, 300), Error);
}

TEST_CASE("out_of_place_distance matches a brute-force oracle") {
  std::mt19937_64 rng(11);
  const std::string letters = "abcde ";
  for (int trial = 0; trial < 50; ++trial) {
    auto random_text = [&] {
      std::string s;
      for (std::size_t i = 0, n = 1 + rng() % 30; i < n; ++i) s += letters[rng() % letters.size()];
      return s;
    };
    const std::size_t cap = 5 + rng() % 40;
    const auto doc = build_profile({random_text()}, 3, cap);
    const auto lang = build_profile({random_text(), random_text()}, 3, cap);
    CHECK(ngram::out_of_place_distance(doc, lang) == brute_distance(doc.entries(), lang.entries(), cap));
    CHECK(ngram::out_of_place_distance(doc, doc) == 0);
  }
}

TEST_CASE("duplicating every text leaves the profile unchanged") {
  const Entries texts{"the cat sat", "on the mat", "a hat"};
  Entries doubled = texts;
  doubled.insert(doubled.end(), texts.begin(), texts.end());
  CHECK(build_profile(texts, 3, 50) == build_profile(doubled, 3, 50));
}

TEST_CASE("detect picks the nearest profile, ties to the lowest index") {
  Corpus c;
  c.labels = LabelMap({"xx", "yy"});
  c.documents = {{"aaaa aaa", 0}, {"bbbb bbb", 1}};
  const auto model = ngram::train_detector(c, 3, 300);
  CHECK(ngram::detect("aaa", model).language.code == "xx");
  CHECK(ngram::detect("BBB", model).language.code == "yy");
  // The two profiles are mirror images, so an unrelated text is equidistant.
  const auto d = ngram::detect("zzz", model);
  CHECK(d.language.index == 0);
  CHECK_THROWS_AS(ngram::detect(" \t", model), Error);
}

TEST_CASE("detector JSON round trip") {
  const Corpus c = generate_fixture({.languages = 4, .docs_per_language = 30});
  const auto model = ngram::train_detector(c, 3, 100);
  const auto back = ngram::detector_from_json(ngram::to_json(model));
  CHECK(back == model);
  for (const auto& doc : c.documents) {
    CHECK(ngram::detect(doc.text, back).distance == ngram::detect(doc.text, model).distance);
  }
  CHECK_THROWS_AS(ngram::detector_from_json("{\"n_max\":3}"), Error);
}

TEST_CASE("a detector trained on the fixture recognises held-in text") {
  const Corpus c = generate_fixture({.languages = 17, .docs_per_language = 40});
  const auto model = ngram::train_detector(c);
  const auto report = ngram::evaluate_detector(model, c);
  CHECK(report.accuracy > 0.9);
}
