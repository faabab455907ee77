#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"
#include "mocot/backend/transcript.hpp"
#include "mocot/harness/config.hpp"
#include "mocot/metrics/report.hpp"

namespace mocot::harness {

/// Per-instance result: the MoCoT trace or direct output, judge records and
/// the error that aborted the instance, if any.
struct SampleRecord {
  std::string id;
  nlohmann::json output;
  std::optional<std::string> error;
  std::optional<metrics::CasRecord> cas;
  std::optional<metrics::UsrRecord> usr;
  backend::Transcript transcript;
};

nlohmann::json to_json(const SampleRecord& record);

struct TagSummary {
  std::map<std::string, std::size_t> counts;  // among incorrect predictions
  std::size_t incorrect = 0;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const TagSummary& summary);

struct RunArtifacts {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<SampleRecord> samples;
  metrics::EvalReport report;
  std::optional<TagSummary> tags;
};

/// Supplies the judge backend on first use only.
using JudgeProvider = std::function<backend::ChatBackend&()>;

/// Runs the configured method over `instances` on up to config.parallelism
/// workers. Instance failures are recorded and excluded; config errors throw.
RunArtifacts run_experiment(const RunConfig& config, const std::vector<pipeline::CVQAInstance>& instances,
                            backend::ChatBackend& model, const JudgeProvider& judge = {});

/// Loads config.dataset first.
RunArtifacts run_experiment(const RunConfig& config, backend::ChatBackend& model, const JudgeProvider& judge = {});

enum class ReportFormat { json, csv, text };

ReportFormat report_format_from_string(std::string_view name);

/// report.json / report.csv / report.txt under `dir`. Returns the written
/// paths. Throws std::runtime_error when the directory is not writable.
std::vector<std::filesystem::path> emit_report(const RunArtifacts& artifacts, const std::set<ReportFormat>& formats,
                                               const std::filesystem::path& dir);

/// Reports plus config.json, samples.jsonl and transcripts.jsonl.
std::vector<std::filesystem::path> write_artifacts(const RunArtifacts& artifacts, const std::set<ReportFormat>& formats,
                                                   const std::filesystem::path& dir);

inline const std::vector<std::string>& failure_tags() {
  static const std::vector<std::string> tags = {"satirical-target-confusion", "symbolic-misalignment",
                                                "salient-cue-omission", "other", "none"};
  return tags;
}

/// Joins annotation JSONL rows {id, tag} onto the report rows. Unknown ids or
/// tags throw std::invalid_argument; tags on correct rows produce warnings.
TagSummary attach_failure_tags(RunArtifacts& artifacts, const std::filesystem::path& annotations);

}  // namespace mocot::harness
