// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lidlab {

/// L x L counts; rows are true labels, columns predicted labels.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const noexcept { return classes_; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_.at(truth * classes_ + pred); }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_.at(truth * classes_ + pred); }
  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t column_sum(std::size_t pred) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Throws input (dimension) error on length mismatch or an index >= classes.
ConfusionMatrix confusion(const std::vector<std::size_t>& truths, const std::vector<std::size_t>& preds,
                          std::size_t classes);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Support-weighted averages plus per-class breakdown.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Precision is 0 for an empty predicted column, recall 0 for zero support,
/// F1 0 when p + r = 0. Throws empty_input for an all-zero matrix. `labels`
/// names the per-class rows; indices are used when it is empty.
MetricsReport summarize(const ConfusionMatrix& cm, const std::vector<std::string>& labels = {});

/// Report JSON: {accuracy, precision, recall, f1, per_class: [...]}, plus any
/// `extra` members (already JSON-encoded object text) merged at top level.
std::string report_to_json(const MetricsReport& report, std::string_view extra_object = {});
MetricsReport report_from_json(std::string_view json);

/// CSV with a header row and first column of label codes.
std::string confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels);

/// One evaluated configuration, a row of the comparative table.
struct TableRow {
  std::string classifier;
  std::string embedding;   // "-" for rule-based detectors
  std::optional<std::size_t> dim;
  MetricsReport report;
};

/// Fixed row order: rule-based rows first (by name), then MLP, LSTM, CNN,
/// any other classifier by name; within a classifier, Hashed before
/// External, then by dimension.
void sort_table(std::vector<TableRow>& rows);

/// Columns: Classifier, Embedding Type, Embedding Dimension, Accuracy,
/// Precision, Recall, F1-Score. CSV values are written at full precision.
std::string table_to_csv(const std::vector<TableRow>& rows);
/// Aligned plain text with values rounded to 5 decimals.
std::string table_to_text(const std::vector<TableRow>& rows);
std::vector<TableRow> table_from_csv(std::string_view csv);

}  // namespace lidlab
