#include <algorithm>
#include <fstream>
#include <map>

#include "mocot/harness/experiment.hpp"

namespace mocot::harness {

using nlohmann::json;

TagSummary attach_failure_tags(RunArtifacts& artifacts, const std::filesystem::path& annotations) {
  std::ifstream in(annotations);
  if (!in) throw std::invalid_argument("cannot open annotation file: " + annotations.string());

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < artifacts.report.rows.size(); ++i) index.emplace(artifacts.report.rows[i].id, i);

  const auto& tags = failure_tags();
  TagSummary summary;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "annotation line " + std::to_string(number) + ": ";
    json value;
    try {
      value = json::parse(line);
    } catch (const json::parse_error&) {
      throw std::invalid_argument(where + "not valid JSON");
    }
    if (!value.is_object() || !value.contains("id") || !value["id"].is_string() || !value.contains("tag") ||
        !value["tag"].is_string()) {
      throw std::invalid_argument(where + "expected {\"id\": string, \"tag\": string}");
    }
    const auto id = value["id"].get<std::string>();
    const auto tag = value["tag"].get<std::string>();
    const auto row = index.find(id);
    if (row == index.end()) throw std::invalid_argument(where + "unknown sample id '" + id + "'");
    if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
      throw std::invalid_argument(where + "unknown tag '" + tag + "'");
    }
    if (!seen.emplace(id, number).second) throw std::invalid_argument(where + "sample '" + id + "' tagged twice");

    auto& target = artifacts.report.rows[row->second];
    target.failure_tag = tag;
    target.tag_source = "human-annotation-file";
    if (target.correct && *target.correct == 1.0 && tag != "none") {
      summary.warnings.push_back("sample '" + id + "' is correct but tagged " + tag);
    }
  }

  for (const auto& row : artifacts.report.rows) {
    if (!row.correct || *row.correct != 0.0) continue;
    ++summary.incorrect;
    ++summary.counts[row.failure_tag];
  }
  artifacts.tags = summary;
  return summary;
}

}  // namespace mocot::harness
