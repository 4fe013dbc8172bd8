// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lidlab/corpus.hpp"
#include "lidlab/nn.hpp"

namespace lidlab::embed {

inline constexpr std::size_t kDefaultBuckets = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultDim = 16;

struct NgramRange {
  std::size_t min = 3;
  std::size_t max = 6;

  friend bool operator==(const NgramRange&, const NgramRange&) = default;
};

using TokenSequence = std::vector<std::string>;

/// Splits normalized text on single spaces; empty text gives no tokens.
TokenSequence tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Bucket indices for the character n-grams of "<token>" with lengths in
/// `range`, followed by the whole padded token. Duplicates are kept.
std::vector<std::size_t> ngram_buckets(std::string_view token, NgramRange range, std::size_t buckets);

/// B x D hashed subword embedding table. Rows that were never written hold
/// their seeded initial value, generated on demand from (seed, row): uniform
/// in [-1/D, 1/D] times `init_scale`. Only written rows are stored, so a
/// 2^20-bucket table costs memory proportional to the rows training touched.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, std::size_t buckets, NgramRange range, std::uint64_t seed);
  /// Fully explicit table; `weights` is row-major B x D.
  static EmbeddingTable from_dense(std::size_t dim, std::size_t buckets, NgramRange range,
                                   std::span<const double> weights);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t buckets() const noexcept { return buckets_; }
  NgramRange range() const noexcept { return range_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double init_scale() const noexcept { return init_scale_; }

  /// Copies row `bucket` into `out` (size D).
  void read_row(std::size_t bucket, std::span<double> out) const;
  std::vector<double> row(std::size_t bucket) const;
  /// Mutable row, materialized from its initial value on first access.
  std::span<double> row_mut(std::size_t bucket);

  /// Multiplies every weight, stored or generated, by `factor`.
  void scale(double factor);

  /// Stored rows in ascending bucket order.
  std::vector<std::size_t> stored_rows() const;
  std::size_t stored_count() const noexcept { return slots_.size(); }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b);

  /// JSON container {dim, buckets, n_range, seed, init_scale, rows: {bucket:
  /// base64}}; bit-exact for every weight.
  std::string to_json() const;
  static EmbeddingTable from_json(std::string_view json);

 private:
  void initial_row(std::size_t bucket, std::span<double> out) const;

  std::size_t dim_ = 0;
  std::size_t buckets_ = 0;
  NgramRange range_;
  std::uint64_t seed_ = 0;
  double init_scale_ = 1.0;
  std::unordered_map<std::size_t, std::size_t> slots_;
  std::vector<double> values_;
};

struct SentenceVector {
  enum class Source { hashed, external };
  std::vector<double> values;
  Source source = Source::hashed;
};

/// Per-token bucket lists for a document; the unit the classifiers consume.
using TokenBuckets = std::vector<std::vector<std::size_t>>;
TokenBuckets document_buckets(std::string_view text, const EmbeddingTable& table);

/// Mean of the token's bucket rows, written into `out`.
void token_vector(const std::vector<std::size_t>& buckets, const EmbeddingTable& table, std::span<double> out);

/// Mean over tokens of the per-token mean of bucket rows; zero vector for a
/// document without tokens.
SentenceVector embed_document(std::string_view text, const EmbeddingTable& table);
nn::Matrix embed_corpus(const Corpus& corpus, const EmbeddingTable& table);

/// Headerless CSV of reals, one row per document. Width is taken from the
/// first row and enforced; errors cite line (and column for bad numbers).
nn::Matrix load_external_embeddings(const std::filesystem::path& path);
nn::Matrix parse_external_embeddings(std::istream& in);
void write_embeddings(const nn::Matrix& m, std::ostream& out);

/// Stand-in for precomputed sentence embeddings: character 1..3-gram counts
/// projected through a seeded Gaussian random matrix and L2-normalized.
nn::Matrix random_projection_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed);

}  // namespace lidlab::embed
