#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "mocot/backend/errors.hpp"
#include "mocot/backend/mock_backend.hpp"
#include "mocot/harness/config.hpp"
#include "mocot/harness/dataset.hpp"
#include "mocot/harness/experiment.hpp"
#include "support/scripted.hpp"

using namespace mocot;
using namespace mocot::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fixture(const std::string& name) { return testing_support::data_path("fixtures/" + name); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream out;
  out << in.rdbuf();
  return out.str();
}

std::shared_ptr<backend::BackendRouter> fixture_router() {
  auto router = std::make_shared<backend::BackendRouter>();
  router->add(backend::BackendConfig::Kind::scripted_mock,
              backend::load_mock_script(fixture("pipeline/script.json")));
  return router;
}

JudgeProvider provider(backend::ChatBackend& judge) {
  return [&]() -> backend::ChatBackend& { return judge; };
}

std::size_t pipeline_calls(const SampleRecord& sample) {
  static const std::set<std::string> stages = {"planner", "executor", "meta", "checker"};
  std::size_t n = 0;
  for (const auto& entry : sample.transcript) n += stages.count(entry.stage);
  return n;
}

std::vector<pipeline::CVQAInstance> ten() {
  return load_dataset({"ten", fixture("harness/ten.jsonl"), DatasetFormat::mcq_jsonl, Split::evaluation});
}

}  // namespace

TEST(Dataset, LoadsTenRows) {
  const auto instances = ten();
  ASSERT_EQ(instances.size(), 10u);
  EXPECT_EQ(instances.front().id, "h-01");
  EXPECT_EQ(instances.back().options.size(), 4u);
}

TEST(Dataset, MissingQuestionNamesTheRow) {
  try {
    load_dataset({"bad", fixture("harness/missing_question.jsonl"), DatasetFormat::mcq_jsonl, Split::evaluation});
    FAIL() << "expected a DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.row(), 7u);
    EXPECT_NE(std::string(e.what()).find("question"), std::string::npos) << e.what();
  }
}

TEST(Dataset, MissingFileIsFileLevelError) {
  try {
    load_dataset({"none", fixture("harness/absent.jsonl"), DatasetFormat::mcq_jsonl, Split::evaluation});
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.row(), 0u);
  }
}

TEST(Dataset, ImageSources) {
  const auto dir = fixture("pipeline");
  const auto local = parse_instance(
      json::parse(R"({"id":"x","image":"panel.png","question":"q","options":[{"label":"A","text":"a"},
                   {"label":"B","text":"b"}],"gold":"b"})"),
      DatasetFormat::mcq_jsonl, dir);
  EXPECT_EQ(local.gold, "B");
  EXPECT_THROW(parse_instance(json::parse(R"({"id":"x","image":"nope.png","question":"q",
                                "options":[{"label":"A","text":"a"},{"label":"B","text":"b"}],"gold":"A"})"),
                              DatasetFormat::mcq_jsonl, dir),
               std::exception);
}

TEST(Split, DeterministicAndPartitioning) {
  const auto instances = ten();
  const auto a = split_dataset(instances, 0.8, 42);
  const auto b = split_dataset(instances, 0.8, 42);
  ASSERT_EQ(a.first.size(), 8u);
  ASSERT_EQ(a.second.size(), 2u);
  std::vector<std::string> ids_a, ids_b;
  for (const auto& i : a.first) ids_a.push_back(i.id);
  for (const auto& i : b.first) ids_b.push_back(i.id);
  EXPECT_EQ(ids_a, ids_b);
  std::set<std::string> all;
  for (const auto& i : a.first) all.insert(i.id);
  for (const auto& i : a.second) all.insert(i.id);
  EXPECT_EQ(all.size(), 10u);
  const auto other = split_dataset(instances, 0.8, 43);
  std::vector<std::string> ids_other;
  for (const auto& i : other.first) ids_other.push_back(i.id);
  EXPECT_NE(ids_a, ids_other);
}

TEST(Split, Nested) {
  const auto parts = nested_split(ten(), 0.8, 0.75, 5);
  EXPECT_EQ(parts.evaluation.size(), 2u);
  EXPECT_EQ(parts.train.size(), 6u);
  EXPECT_EQ(parts.validation.size(), 2u);
  EXPECT_THROW(split_dataset(ten(), 1.5, 1), std::invalid_argument);
}

TEST(Config, RejectsUnknownKeysAndInvalidCombinations) {
  auto raw = json::parse(slurp(fixture("pipeline/mocot.json")));
  raw["surprise"] = 1;
  EXPECT_THROW(run_config_from_json(raw, fixture("pipeline")), std::invalid_argument);

  auto no_judge = json::parse(slurp(fixture("pipeline/mocot.json")));
  no_judge.erase("judge");
  EXPECT_THROW(validate(run_config_from_json(no_judge, fixture("pipeline"))), std::invalid_argument);

  auto bad_metric = json::parse(slurp(fixture("pipeline/direct-cot.json")));
  bad_metric["metrics"] = {"accuracy", "perplexity"};
  EXPECT_THROW(validate(run_config_from_json(bad_metric, fixture("pipeline"))), std::invalid_argument);

  auto zero = json::parse(slurp(fixture("pipeline/direct-cot.json")));
  zero["parallelism"] = 0;
  EXPECT_THROW(validate(run_config_from_json(zero, fixture("pipeline"))), std::invalid_argument);
}

TEST(Config, RoundTrip) {
  const auto config = load_run_config(fixture("pipeline/mocot.json"));
  EXPECT_EQ(config.method, Method::mocot);
  EXPECT_EQ(config.stages.max_verify_retries, 3);
  EXPECT_EQ(config.seed, 11u);
  EXPECT_EQ(config.dataset.path, fixture("pipeline/dataset.jsonl"));
  const auto again = run_config_from_json(to_json(config), fixture("pipeline"));
  EXPECT_EQ(to_json(again), to_json(config));
}

TEST(Experiment, MocotFixturesMatchHandCounts) {
  const auto config = load_run_config(fixture("pipeline/mocot.json"));
  auto router = fixture_router();
  const auto artifacts = run_experiment(config, *router, provider(*router));
  ASSERT_EQ(artifacts.report.rows.size(), 5u);
  const auto& s = artifacts.report.summaries;
  EXPECT_NEAR(*s.at("accuracy").mean, 0.6, 1e-12);
  EXPECT_NEAR(*s.at("cas").mean, 0.8, 1e-12);
  EXPECT_NEAR(*s.at("usr").mean, 0.24, 1e-12);
  EXPECT_NEAR(*s.at("usr_unpadded").mean, (0.0 + 0.4 + 1.0 / 3 + 0.4 + 0.2) / 5, 1e-12);
  const std::vector<std::size_t> calls = {5, 8, 11, 6, 4};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_FALSE(artifacts.samples[i].error.has_value());
    EXPECT_EQ(pipeline_calls(artifacts.samples[i]), calls[i]) << artifacts.samples[i].id;
  }
}

TEST(Experiment, DirectNoCotMakesOneCallPerInstance) {
  const auto config = load_run_config(fixture("pipeline/direct-no-cot.json"));
  auto router = fixture_router();
  const auto artifacts = run_experiment(config, *router);
  ASSERT_EQ(artifacts.samples.size(), 5u);
  for (const auto& sample : artifacts.samples) EXPECT_EQ(sample.transcript.size(), 1u) << sample.id;
  EXPECT_NEAR(*artifacts.report.summaries.at("accuracy").mean, 0.8, 1e-12);
}

TEST(Experiment, UnusedJudgeIsNeverContacted) {
  auto config = load_run_config(fixture("pipeline/mocot.json"));
  config.metrics = {"accuracy"};
  auto router = fixture_router();
  int asked = 0;
  const JudgeProvider unreachable = [&]() -> backend::ChatBackend& {
    ++asked;
    throw backend::NetworkError("judge endpoint unreachable");
  };
  const auto artifacts = run_experiment(config, *router, unreachable);
  EXPECT_EQ(asked, 0);
  EXPECT_NEAR(*artifacts.report.summaries.at("accuracy").mean, 0.6, 1e-12);
}

TEST(Experiment, InstanceFailureIsRecordedNotFatal) {
  const auto config = load_run_config(fixture("pipeline/direct-no-cot.json"));
  int calls = 0;
  testing_support::FnBackend flaky([&](const std::vector<backend::ChatMessage>&) {
    if (++calls == 2) throw backend::HttpStatusError(400, "planted failure");
    return backend::ChatResponse{R"({"answer": ["B"]})", {}, {}};
  });
  const auto artifacts = run_experiment(config, flaky);
  ASSERT_EQ(artifacts.samples.size(), 5u);
  std::size_t failed = 0;
  for (const auto& sample : artifacts.samples) failed += sample.error ? 1 : 0;
  EXPECT_EQ(failed, 1u);
  EXPECT_EQ(artifacts.report.summaries.at("accuracy").aggregated, 4u);
}

TEST(Report, EmitFormatsAgreeAndAreIdempotent) {
  const auto config = load_run_config(fixture("pipeline/mocot.json"));
  auto router = fixture_router();
  const auto artifacts = run_experiment(config, *router, provider(*router));
  const auto dir = testing_support::temp_dir("harness-emit");

  const auto written = emit_report(artifacts, {ReportFormat::json, ReportFormat::text}, dir);
  EXPECT_EQ(written.size(), 2u);
  const auto report = json::parse(slurp(dir / "report.json"));
  const auto text = slurp(dir / "report.txt");
  for (const auto& name : config.metrics) {
    const auto mean = report.at("aggregates").at(name).at("mean").get<double>();
    EXPECT_NE(text.find(metrics::format_metric(mean)), std::string::npos) << name;
    EXPECT_DOUBLE_EQ(mean, *artifacts.report.summaries.at(name).mean);
  }

  emit_report(artifacts, {ReportFormat::csv}, dir);
  const auto csv = slurp(dir / "report.csv");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), artifacts.samples.size() + 1);

  const auto first = slurp(dir / "report.json");
  emit_report(artifacts, {ReportFormat::json, ReportFormat::csv, ReportFormat::text}, dir);
  EXPECT_EQ(slurp(dir / "report.json"), first);
  EXPECT_EQ(slurp(dir / "report.csv"), csv);
  EXPECT_EQ(slurp(dir / "report.txt"), text);
}

TEST(Report, UnwritableDirectoryThrows) {
  const auto config = load_run_config(fixture("pipeline/direct-no-cot.json"));
  auto router = fixture_router();
  const auto artifacts = run_experiment(config, *router);
  const auto dir = testing_support::temp_dir("harness-unwritable");
  std::ofstream(dir / "plain-file") << "x";
  EXPECT_THROW(emit_report(artifacts, {ReportFormat::json}, dir / "plain-file" / "out"), std::runtime_error);
}

TEST(Report, ArtifactsAreReproducibleAcrossRunsAndParallelism) {
  auto config = load_run_config(fixture("pipeline/mocot.json"));
  std::vector<std::pair<std::string, std::string>> outputs;
  for (int parallelism : {1, 1, 3}) {
    config.parallelism = parallelism;
    auto router = fixture_router();
    const auto artifacts = run_experiment(config, *router, provider(*router));
    const auto dir = testing_support::temp_dir("harness-repro-" + std::to_string(outputs.size()));
    write_artifacts(artifacts, {ReportFormat::json}, dir);
    outputs.emplace_back(slurp(dir / "samples.jsonl"), slurp(dir / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "config.json"));
    EXPECT_TRUE(fs::exists(dir / "transcripts.jsonl"));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_EQ(outputs[0], outputs[2]);
}

namespace {

RunArtifacts five_wrong_one_right() {
  RunArtifacts artifacts;
  std::vector<metrics::EvalRow> rows;
  for (int i = 1; i <= 6; ++i) {
    metrics::EvalRow row;
    row.id = "s" + std::to_string(i);
    row.prediction = "A";
    row.gold = i == 6 ? "A" : "B";
    row.correct = i == 6 ? 1.0 : 0.0;
    rows.push_back(row);
  }
  artifacts.report = metrics::aggregate(rows, {"accuracy"});
  return artifacts;
}

fs::path annotations(const std::string& name, const std::string& body) {
  const auto path = testing_support::temp_dir("harness-tags") / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(FailureTags, CountsAmongIncorrectRows) {
  auto artifacts = five_wrong_one_right();
  const auto summary = attach_failure_tags(
      artifacts, annotations("two.jsonl",
                             "{\"id\":\"s1\",\"tag\":\"symbolic-misalignment\"}\n"
                             "{\"id\":\"s3\",\"tag\":\"symbolic-misalignment\"}\n"));
  EXPECT_EQ(summary.incorrect, 5u);
  EXPECT_EQ(summary.counts.at("symbolic-misalignment"), 2u);
  EXPECT_EQ(summary.counts.at("none"), 3u);
  EXPECT_TRUE(summary.warnings.empty());
  EXPECT_EQ(artifacts.report.rows[0].tag_source, "human-annotation-file");
}

TEST(FailureTags, CorrectRowWarns) {
  auto artifacts = five_wrong_one_right();
  const auto summary =
      attach_failure_tags(artifacts, annotations("correct.jsonl", "{\"id\":\"s6\",\"tag\":\"other\"}\n"));
  ASSERT_EQ(summary.warnings.size(), 1u);
  EXPECT_NE(summary.warnings[0].find("s6"), std::string::npos);
}

TEST(FailureTags, EmptyFileLeavesDefaults) {
  auto artifacts = five_wrong_one_right();
  const auto summary = attach_failure_tags(artifacts, annotations("empty.jsonl", ""));
  EXPECT_EQ(summary.counts.at("none"), 5u);
  for (const auto& row : artifacts.report.rows) {
    EXPECT_EQ(row.failure_tag, "none");
    EXPECT_EQ(row.tag_source, "unassigned");
  }
}

TEST(FailureTags, BadAnnotationsRejected) {
  auto artifacts = five_wrong_one_right();
  EXPECT_THROW(attach_failure_tags(artifacts, annotations("unknown-id.jsonl", "{\"id\":\"s9\",\"tag\":\"other\"}\n")),
               std::invalid_argument);
  EXPECT_THROW(attach_failure_tags(artifacts, annotations("unknown-tag.jsonl", "{\"id\":\"s1\",\"tag\":\"meh\"}\n")),
               std::invalid_argument);
  EXPECT_THROW(attach_failure_tags(artifacts, annotations("twice.jsonl",
                                                          "{\"id\":\"s1\",\"tag\":\"other\"}\n"
                                                          "{\"id\":\"s1\",\"tag\":\"none\"}\n")),
               std::invalid_argument);
}
