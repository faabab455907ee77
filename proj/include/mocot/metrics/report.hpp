#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mocot::metrics {

/// Exact-match fraction after label normalization. Throws
/// std::invalid_argument on empty or misaligned input.
double accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& golds);

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"accuracy", "cas", "usr", "usr_unpadded", "bleu4", "rouge_l"};
  return names;
}

/// Per-sample result. A configured metric with no value is excluded from its
/// mean; `notes` records why.
struct EvalRow {
  std::string id;
  std::string prediction;
  std::string gold;
  std::optional<double> correct;
  std::optional<double> cas;
  std::optional<double> usr;
  std::optional<double> usr_unpadded;
  std::optional<double> bleu4;
  std::optional<double> rouge_l;
  std::string failure_tag = "none";
  std::string tag_source = "unassigned";
  std::vector<std::string> notes;

  std::optional<double> metric(const std::string& name) const;
};

struct MetricSummary {
  std::optional<double> mean;
  std::size_t aggregated = 0;
  std::size_t excluded = 0;
};

struct EvalReport {
  std::vector<std::string> metrics;
  std::vector<EvalRow> rows;
  std::map<std::string, MetricSummary> summaries;
};

/// Means over rows carrying each metric. Throws std::invalid_argument for no
/// rows, an unknown metric, or when every configured metric is excluded on
/// every row.
EvalReport aggregate(std::vector<EvalRow> rows, std::vector<std::string> metrics);

nlohmann::json to_json(const EvalRow& row);
nlohmann::json to_json(const EvalReport& report);

/// Rebuilds a report and checks that the stored aggregates match the rows.
/// Throws std::runtime_error on mismatch.
EvalReport report_from_json(const nlohmann::json& value);

/// Columns: id,prediction,gold,correct,cas,usr,usr_unpadded,bleu4,rouge_l,failure_tag.
/// Missing values are empty cells.
std::string to_csv(const EvalReport& report);

/// Aligned-column table of rows followed by the aggregate block.
std::string to_text(const EvalReport& report);

/// Fixed six-decimal rendering shared by the CSV and text outputs.
std::string format_metric(std::optional<double> value);

}  // namespace mocot::metrics
