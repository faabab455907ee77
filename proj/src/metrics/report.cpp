#include "mocot/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mocot::metrics {

using json = nlohmann::json;

namespace {

std::string normalize_label(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != '.') {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

json optional_number(std::optional<double> value) { return value ? json(*value) : json(); }

std::optional<double> read_optional(const json& row, const char* field) {
  if (!row.contains(field) || row[field].is_null()) return std::nullopt;
  return row[field].get<double>();
}

std::string csv_cell(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string single_line(const std::string& raw) {
  std::string out = raw;
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

}  // namespace

double accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size()) throw std::invalid_argument("predictions and golds differ in length");
  if (predictions.empty()) throw std::invalid_argument("accuracy of an empty list");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (normalize_label(predictions[i]) == normalize_label(golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::optional<double> EvalRow::metric(const std::string& name) const {
  if (name == "accuracy") return correct;
  if (name == "cas") return cas;
  if (name == "usr") return usr;
  if (name == "usr_unpadded") return usr_unpadded;
  if (name == "bleu4") return bleu4;
  if (name == "rouge_l") return rouge_l;
  throw std::invalid_argument("unknown metric: " + name);
}

EvalReport aggregate(std::vector<EvalRow> rows, std::vector<std::string> metrics) {
  if (rows.empty()) throw std::invalid_argument("cannot aggregate zero rows");
  EvalReport report;
  report.metrics = std::move(metrics);
  report.rows = std::move(rows);
  bool any = false;
  for (const auto& name : report.metrics) {
    if (std::find(metric_names().begin(), metric_names().end(), name) == metric_names().end()) {
      throw std::invalid_argument("unknown metric: " + name);
    }
    MetricSummary summary;
    double sum = 0.0;
    for (const auto& row : report.rows) {
      if (const auto value = row.metric(name)) {
        sum += *value;
        ++summary.aggregated;
      } else {
        ++summary.excluded;
      }
    }
    if (summary.aggregated > 0) {
      summary.mean = sum / static_cast<double>(summary.aggregated);
      any = true;
    }
    report.summaries[name] = summary;
  }
  if (!any && !report.metrics.empty()) throw std::invalid_argument("every row is excluded from every metric");
  return report;
}

json to_json(const EvalRow& row) {
  return {{"id", row.id},
          {"prediction", row.prediction},
          {"gold", row.gold},
          {"correct", optional_number(row.correct)},
          {"cas", optional_number(row.cas)},
          {"usr", optional_number(row.usr)},
          {"usr_unpadded", optional_number(row.usr_unpadded)},
          {"bleu4", optional_number(row.bleu4)},
          {"rouge_l", optional_number(row.rouge_l)},
          {"failure_tag", row.failure_tag},
          {"tag_source", row.tag_source},
          {"notes", row.notes}};
}

json to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) rows.push_back(to_json(row));
  json aggregates = json::object();
  for (const auto& name : report.metrics) {
    const auto& summary = report.summaries.at(name);
    aggregates[name] = {{"mean", optional_number(summary.mean)},
                        {"aggregated", summary.aggregated},
                        {"excluded", summary.excluded}};
  }
  return {{"metrics", report.metrics}, {"rows", std::move(rows)}, {"aggregates", std::move(aggregates)}};
}

EvalReport report_from_json(const json& value) {
  std::vector<EvalRow> rows;
  for (const auto& item : value.at("rows")) {
    EvalRow row;
    row.id = item.at("id").get<std::string>();
    row.prediction = item.value("prediction", "");
    row.gold = item.value("gold", "");
    row.correct = read_optional(item, "correct");
    row.cas = read_optional(item, "cas");
    row.usr = read_optional(item, "usr");
    row.usr_unpadded = read_optional(item, "usr_unpadded");
    row.bleu4 = read_optional(item, "bleu4");
    row.rouge_l = read_optional(item, "rouge_l");
    row.failure_tag = item.value("failure_tag", "none");
    row.tag_source = item.value("tag_source", "unassigned");
    row.notes = item.value("notes", std::vector<std::string>{});
    rows.push_back(std::move(row));
  }
  auto report = aggregate(std::move(rows), value.at("metrics").get<std::vector<std::string>>());
  const auto& stored = value.at("aggregates");
  for (const auto& name : report.metrics) {
    const auto& summary = report.summaries.at(name);
    const auto& entry = stored.at(name);
    const auto mean = read_optional(entry, "mean");
    const bool mean_ok = mean.has_value() == summary.mean.has_value() &&
                         (!mean || std::abs(*mean - *summary.mean) <= 1e-12);
    if (!mean_ok || entry.at("aggregated").get<std::size_t>() != summary.aggregated ||
        entry.at("excluded").get<std::size_t>() != summary.excluded) {
      throw std::runtime_error("stored aggregate for " + name + " does not match its rows");
    }
  }
  return report;
}

std::string format_metric(std::optional<double> value) {
  if (!value) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6f", *value);
  return buffer;
}

std::string to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "id,prediction,gold,correct,cas,usr,usr_unpadded,bleu4,rouge_l,failure_tag\n";
  for (const auto& row : report.rows) {
    out << csv_cell(row.id) << ',' << csv_cell(row.prediction) << ',' << csv_cell(row.gold) << ','
        << format_metric(row.correct) << ',' << format_metric(row.cas) << ',' << format_metric(row.usr) << ','
        << format_metric(row.usr_unpadded) << ',' << format_metric(row.bleu4) << ',' << format_metric(row.rouge_l)
        << ',' << csv_cell(row.failure_tag) << '\n';
  }
  return out.str();
}

std::string to_text(const EvalReport& report) {
  std::vector<std::string> header = {"id", "prediction", "gold"};
  for (const auto& name : report.metrics) header.push_back(name);
  header.push_back("failure_tag");

  std::vector<std::vector<std::string>> table = {header};
  for (const auto& row : report.rows) {
    std::vector<std::string> cells = {single_line(row.id), single_line(row.prediction), single_line(row.gold)};
    for (const auto& name : report.metrics) {
      const auto value = row.metric(name);
      cells.push_back(value ? format_metric(value) : "-");
    }
    cells.push_back(row.failure_tag);
    table.push_back(std::move(cells));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& cells : table) {
    for (std::size_t i = 0; i < cells.size(); ++i) widths[i] = std::max(widths[i], cells[i].size());
  }

  std::ostringstream out;
  for (const auto& cells : table) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << cells[i];
      if (i + 1 < cells.size()) out << std::string(widths[i] - cells[i].size() + 2, ' ');
    }
    out << '\n';
  }
  out << "\naggregate      mean      aggregated  excluded\n";
  for (const auto& name : report.metrics) {
    const auto& summary = report.summaries.at(name);
    const std::string mean = summary.mean ? format_metric(summary.mean) : "-";
    char line[128];
    std::snprintf(line, sizeof line, "%-14s %-9s %-11zu %zu\n", name.c_str(), mean.c_str(), summary.aggregated,
                  summary.excluded);
    out << line;
  }
  return out.str();
}

}  // namespace mocot::metrics
