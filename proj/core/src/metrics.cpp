// SPDX-License-Identifier: Apache-2.0
#include "lidlab/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lidlab/codec.hpp"
#include "lidlab/csv.hpp"
#include "lidlab/error.hpp"

namespace lidlab {

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t sum = 0;
  for (std::size_t p = 0; p < classes_; ++p) sum += at(truth, p);
  return sum;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t pred) const {
  std::uint64_t sum = 0;
  for (std::size_t t = 0; t < classes_; ++t) sum += at(t, pred);
  return sum;
}

ConfusionMatrix confusion(const std::vector<std::size_t>& truths, const std::vector<std::size_t>& preds,
                          std::size_t classes) {
  if (truths.size() != preds.size()) {
    fail(ErrorKind::dimension, "confusion: " + std::to_string(truths.size()) + " truths vs " +
                                   std::to_string(preds.size()) + " predictions");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] >= classes || preds[i] >= classes) {
      fail(ErrorKind::dimension, "confusion: label index out of range at position " + std::to_string(i));
    }
    ++cm.at(truths[i], preds[i]);
  }
  return cm;
}

MetricsReport summarize(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  const std::uint64_t total = cm.total();
  if (total == 0) fail(ErrorKind::empty_input, "cannot summarize an empty confusion matrix");
  if (!labels.empty() && labels.size() != cm.classes()) {
    fail(ErrorKind::dimension, "summarize: label count does not match matrix size");
  }

  MetricsReport report;
  std::uint64_t correct = 0;
  const auto n = static_cast<double>(total);
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t support = cm.row_sum(c);
    const std::uint64_t predicted = cm.column_sum(c);
    correct += tp;

    ClassMetrics m;
    m.label = labels.empty() ? std::to_string(c) : labels[c];
    m.support = support;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;

    const double weight = static_cast<double>(support) / n;
    report.precision += weight * m.precision;
    report.f1 += weight * m.f1;
    report.per_class.push_back(std::move(m));
  }
  report.accuracy = static_cast<double>(correct) / n;
  // Support-weighted recall: sum_c (n_c / N)(tp_c / n_c) reduces to trace / N.
  report.recall = static_cast<double>(correct) / n;
  return report;
}

std::string report_to_json(const MetricsReport& report, std::string_view extra_object) {
  nlohmann::ordered_json j;
  if (!extra_object.empty()) {
    j = nlohmann::ordered_json::parse(extra_object);
    if (!j.is_object()) fail(ErrorKind::parse, "report extras must be a JSON object");
  }
  j["accuracy"] = report.accuracy;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  auto& rows = j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& m : report.per_class) {
    rows.push_back({{"label", m.label},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"support", m.support}});
  }
  return j.dump(2);
}

MetricsReport report_from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    MetricsReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    if (j.contains("per_class")) {
      for (const auto& row : j.at("per_class")) {
        r.per_class.push_back({row.at("label").get<std::string>(), row.at("precision").get<double>(),
                               row.at("recall").get<double>(), row.at("f1").get<double>(),
                               row.at("support").get<std::uint64_t>()});
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed metrics report: ") + e.what());
  }
}

std::string confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  if (labels.size() != cm.classes()) fail(ErrorKind::dimension, "confusion_to_csv: label count mismatch");
  std::ostringstream out;
  csv::Row header{"true\\pred"};
  header.insert(header.end(), labels.begin(), labels.end());
  csv::write_row(out, header);
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    csv::Row row{labels[t]};
    for (std::size_t p = 0; p < cm.classes(); ++p) row.push_back(std::to_string(cm.at(t, p)));
    csv::write_row(out, row);
  }
  return out.str();
}

namespace {

int classifier_rank(const TableRow& row) {
  if (row.embedding == "-") return 0;
  if (row.classifier == "MLP") return 1;
  if (row.classifier == "LSTM") return 2;
  if (row.classifier == "CNN") return 3;
  return 4;
}

int embedding_rank(const std::string& embedding) {
  if (embedding == "-") return 0;
  if (embedding == "Hashed") return 1;
  if (embedding == "External") return 2;
  return 3;
}

const std::vector<std::string>& table_header() {
  static const std::vector<std::string> header = {
      "Classifier", "Embedding Type", "Embedding Dimension", "Accuracy", "Precision", "Recall", "F1-Score"};
  return header;
}

std::string dim_text(const TableRow& row) { return row.dim ? std::to_string(*row.dim) : "-"; }

}  // namespace

void sort_table(std::vector<TableRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    const auto key = [](const TableRow& r) {
      return std::make_tuple(classifier_rank(r), r.classifier, embedding_rank(r.embedding), r.embedding,
                             r.dim.value_or(0));
    };
    return key(a) < key(b);
  });
}

std::string table_to_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  csv::write_row(out, table_header());
  for (const auto& r : rows) {
    csv::write_row(out, {r.classifier, r.embedding, dim_text(r), format_double(r.report.accuracy),
                         format_double(r.report.precision), format_double(r.report.recall),
                         format_double(r.report.f1)});
  }
  return out.str();
}

std::string table_to_text(const std::vector<TableRow>& rows) {
  std::vector<std::vector<std::string>> cells{table_header()};
  for (const auto& r : rows) {
    std::vector<std::string> line{r.classifier, r.embedding, dim_text(r)};
    for (double v : {r.report.accuracy, r.report.precision, r.report.recall, r.report.f1}) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(5) << v;
      line.push_back(s.str());
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(table_header().size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) out << "  ";
      if (c < 3) {
        out << std::left << std::setw(static_cast<int>(widths[c])) << line[c];
      } else {
        out << std::right << std::setw(static_cast<int>(widths[c])) << line[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::vector<TableRow> table_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || *header != table_header()) fail(ErrorKind::schema, "comparative table header mismatch");
  std::vector<TableRow> rows;
  while (auto line = reader.next()) {
    if (line->size() != table_header().size()) {
      fail(ErrorKind::schema, "comparative table row on line " + std::to_string(reader.line()) +
                                  " has the wrong number of fields");
    }
    TableRow r;
    r.classifier = (*line)[0];
    r.embedding = (*line)[1];
    if ((*line)[2] != "-") r.dim = static_cast<std::size_t>(parse_double((*line)[2]));
    r.report.accuracy = parse_double((*line)[3]);
    r.report.precision = parse_double((*line)[4]);
    r.report.recall = parse_double((*line)[5]);
    r.report.f1 = parse_double((*line)[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace lidlab
