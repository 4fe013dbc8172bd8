// SPDX-License-Identifier: Apache-2.0
#include "lidlab/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lidlab/codec.hpp"
#include "lidlab/error.hpp"
#include "lidlab/unicode.hpp"

namespace lidlab::embed {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(' ', start), text.size());
    if (end > start) tokens.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::vector<std::size_t> ngram_buckets(std::string_view token, NgramRange range, std::size_t buckets) {
  if (buckets == 0) fail(ErrorKind::config, "bucket count must be positive");
  if (range.min < 1 || range.min > range.max) fail(ErrorKind::config, "invalid n-gram range");
  std::string padded = "<";
  padded.append(token);
  padded.push_back('>');
  const std::vector<std::string> chars = split_code_points(padded);

  std::vector<std::size_t> out;
  for (std::size_t n = range.min; n <= range.max && n <= chars.size(); ++n) {
    for (std::size_t start = 0; start + n <= chars.size(); ++start) {
      std::string gram;
      for (std::size_t k = 0; k < n; ++k) gram += chars[start + k];
      out.push_back(static_cast<std::size_t>(fnv1a64(gram) % buckets));
    }
  }
  out.push_back(static_cast<std::size_t>(fnv1a64(padded) % buckets));
  return out;
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(std::size_t dim, std::size_t buckets, NgramRange range, std::uint64_t seed)
    : dim_(dim), buckets_(buckets), range_(range), seed_(seed) {
  if (dim_ < 1 || buckets_ < 1) fail(ErrorKind::config, "embedding table needs dim >= 1 and buckets >= 1");
  if (range_.min < 1 || range_.min > range_.max) fail(ErrorKind::config, "invalid n-gram range");
}

EmbeddingTable EmbeddingTable::from_dense(std::size_t dim, std::size_t buckets, NgramRange range,
                                          std::span<const double> weights) {
  if (weights.size() != dim * buckets) fail(ErrorKind::dimension, "dense table weights must be B x D");
  EmbeddingTable table(dim, buckets, range, 0);
  for (std::size_t b = 0; b < buckets; ++b) {
    auto row = table.row_mut(b);
    std::copy_n(weights.begin() + static_cast<std::ptrdiff_t>(b * dim), dim, row.begin());
  }
  return table;
}

void EmbeddingTable::initial_row(std::size_t bucket, std::span<double> out) const {
  const double limit = 1.0 / static_cast<double>(dim_);
  std::uint64_t state = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(bucket)));
  for (auto& v : out) {
    state += kGolden;
    v = init_scale_ * limit * (2.0 * unit_uniform(splitmix64(state)) - 1.0);
  }
}

void EmbeddingTable::read_row(std::size_t bucket, std::span<double> out) const {
  if (bucket >= buckets_) fail(ErrorKind::dimension, "bucket index out of range");
  if (out.size() != dim_) fail(ErrorKind::dimension, "row buffer must have the table dimension");
  const auto it = slots_.find(bucket);
  if (it == slots_.end()) {
    initial_row(bucket, out);
  } else {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_), dim_, out.begin());
  }
}

std::vector<double> EmbeddingTable::row(std::size_t bucket) const {
  std::vector<double> out(dim_);
  read_row(bucket, out);
  return out;
}

std::span<double> EmbeddingTable::row_mut(std::size_t bucket) {
  if (bucket >= buckets_) fail(ErrorKind::dimension, "bucket index out of range");
  auto [it, inserted] = slots_.try_emplace(bucket, slots_.size());
  if (inserted) {
    values_.resize(values_.size() + dim_);
    initial_row(bucket, std::span<double>(values_).subspan(it->second * dim_, dim_));
  }
  return std::span<double>(values_).subspan(it->second * dim_, dim_);
}

void EmbeddingTable::scale(double factor) {
  init_scale_ *= factor;
  for (auto& v : values_) v *= factor;
}

std::vector<std::size_t> EmbeddingTable::stored_rows() const {
  std::vector<std::size_t> rows;
  rows.reserve(slots_.size());
  for (const auto& [bucket, _] : slots_) rows.push_back(bucket);
  std::sort(rows.begin(), rows.end());
  return rows;
}

bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
  if (a.dim_ != b.dim_ || a.buckets_ != b.buckets_ || !(a.range_ == b.range_) || a.seed_ != b.seed_ ||
      a.init_scale_ != b.init_scale_) {
    return false;
  }
  std::set<std::size_t> keys;
  for (const auto& [k, _] : a.slots_) keys.insert(k);
  for (const auto& [k, _] : b.slots_) keys.insert(k);
  return std::all_of(keys.begin(), keys.end(), [&](std::size_t k) { return a.row(k) == b.row(k); });
}

std::string EmbeddingTable::to_json() const {
  nlohmann::ordered_json j;
  j["dim"] = dim_;
  j["buckets"] = buckets_;
  j["n_range"] = {range_.min, range_.max};
  j["seed"] = seed_;
  j["init_scale"] = encode_doubles(std::span<const double>(&init_scale_, 1));
  auto& rows = j["rows"] = nlohmann::ordered_json::object();
  for (std::size_t bucket : stored_rows()) {
    rows[std::to_string(bucket)] =
        encode_doubles(std::span<const double>(values_).subspan(slots_.at(bucket) * dim_, dim_));
  }
  return j.dump();
}

EmbeddingTable EmbeddingTable::from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    const auto range = j.at("n_range").get<std::vector<std::size_t>>();
    if (range.size() != 2) fail(ErrorKind::parse, "n_range must have two entries");
    EmbeddingTable table(j.at("dim").get<std::size_t>(), j.at("buckets").get<std::size_t>(), {range[0], range[1]},
                         j.at("seed").get<std::uint64_t>());
    const auto scale = decode_doubles(j.at("init_scale").get<std::string>());
    if (scale.size() != 1) fail(ErrorKind::parse, "init_scale must hold one value");
    table.init_scale_ = scale[0];
    std::map<std::size_t, std::vector<double>> rows;
    for (const auto& [key, value] : j.at("rows").items()) {
      auto decoded = decode_doubles(value.get<std::string>());
      if (decoded.size() != table.dim_) fail(ErrorKind::dimension, "table row " + key + " has the wrong width");
      rows.emplace(static_cast<std::size_t>(std::stoull(key)), std::move(decoded));
    }
    for (const auto& [bucket, values] : rows) {
      auto row = table.row_mut(bucket);
      std::copy(values.begin(), values.end(), row.begin());
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed embedding table: ") + e.what());
  } catch (const std::logic_error& e) {
    fail(ErrorKind::parse, std::string("malformed embedding table: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Document vectors

TokenBuckets document_buckets(std::string_view text, const EmbeddingTable& table) {
  TokenBuckets out;
  for (const auto& token : tokenize(text)) out.push_back(ngram_buckets(token, table.range(), table.buckets()));
  return out;
}

void token_vector(const std::vector<std::size_t>& buckets, const EmbeddingTable& table, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (buckets.empty()) return;
  std::vector<double> row(table.dim());
  for (std::size_t b : buckets) {
    table.read_row(b, row);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(buckets.size());
  for (auto& v : out) v *= inv;
}

SentenceVector embed_document(std::string_view text, const EmbeddingTable& table) {
  SentenceVector result;
  result.source = SentenceVector::Source::hashed;
  result.values.assign(table.dim(), 0.0);
  const TokenBuckets tokens = document_buckets(text, table);
  if (tokens.empty()) return result;
  std::vector<double> token(table.dim());
  for (const auto& buckets : tokens) {
    token_vector(buckets, table, token);
    for (std::size_t d = 0; d < token.size(); ++d) result.values[d] += token[d];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (auto& v : result.values) v *= inv;
  return result;
}

nn::Matrix embed_corpus(const Corpus& corpus, const EmbeddingTable& table) {
  nn::Matrix out(corpus.size(), table.dim());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto v = embed_document(corpus.documents[i].text, table);
    std::copy(v.values.begin(), v.values.end(), out.row(i).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// External embeddings

nn::Matrix parse_external_embeddings(std::istream& in) {
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pending_blank = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      ++pending_blank;
      continue;
    }
    if (pending_blank) {
      fail(ErrorKind::parse, "blank line " + std::to_string(line_no - pending_blank) + " inside embedding file");
    }
    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      ++fields;
      try {
        values.push_back(parse_double(std::string_view(line).substr(start, end - start)));
      } catch (const Error&) {
        fail(ErrorKind::parse, "non-numeric field at line " + std::to_string(line_no) + ", column " +
                                   std::to_string(fields));
      }
      if (end == line.size()) break;
      start = end + 1;
    }
    if (rows == 0) {
      width = fields;
    } else if (fields != width) {
      fail(ErrorKind::dimension, "line " + std::to_string(line_no) + " has " + std::to_string(fields) +
                                     " values, expected " + std::to_string(width));
    }
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::empty_input, "embedding file has no rows; dimension is undefined");
  return nn::Matrix(rows, width, std::move(values));
}

nn::Matrix load_external_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return parse_external_embeddings(in);
}

void write_embeddings(const nn::Matrix& m, std::ostream& out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
}

nn::Matrix random_projection_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) fail(ErrorKind::config, "projection dimension must be positive");
  std::unordered_map<std::string, std::vector<double>> directions;
  const auto direction = [&](const std::string& gram) -> const std::vector<double>& {
    auto [it, inserted] = directions.try_emplace(gram);
    if (inserted) {
      nn::Rng rng(seed ^ fnv1a64(gram));
      std::normal_distribution<double> normal(0.0, 1.0);
      it->second.resize(dim);
      for (auto& v : it->second) v = normal(rng);
    }
    return it->second;
  };

  nn::Matrix out(corpus.size(), dim);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::vector<std::string> chars = split_code_points(corpus.documents[i].text);
    chars.insert(chars.begin(), "_");
    chars.emplace_back("_");
    std::map<std::string, double> counts;
    for (std::size_t start = 0; start < chars.size(); ++start) {
      std::string gram;
      for (std::size_t n = 1; n <= 3 && start + n <= chars.size(); ++n) {
        gram += chars[start + n - 1];
        counts[gram] += 1.0;
      }
    }
    auto row = out.row(i);
    for (const auto& [gram, count] : counts) {
      const auto& dir = direction(gram);
      for (std::size_t d = 0; d < dim; ++d) row[d] += count * dir[d];
    }
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& v : row) v /= norm;
    }
  }
  return out;
}

}  // namespace lidlab::embed
