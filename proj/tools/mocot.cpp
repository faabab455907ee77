// mocot: command-line entry point for experiments, reward scoring, the toy
// GRPO trainer, the bound-check suite and fixture recording.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/http_backend.hpp"
#include "mocot/backend/mock_backend.hpp"
#include "mocot/grpo/toy_task.hpp"
#include "mocot/harness/config.hpp"
#include "mocot/harness/experiment.hpp"
#include "mocot/reward/vera.hpp"
#include "mocot/theory/suite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mocot;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::shared_ptr<backend::BackendRouter> make_router(const std::string& mock_script) {
  auto router = std::make_shared<backend::BackendRouter>();
  router->add(backend::BackendConfig::Kind::http_openai_compatible, std::make_shared<backend::HttpBackend>());
  if (!mock_script.empty()) {
    router->add(backend::BackendConfig::Kind::scripted_mock, backend::load_mock_script(mock_script));
  }
  return router;
}

std::set<harness::ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::set<harness::ReportFormat> formats;
  for (const auto& name : names) formats.insert(harness::report_format_from_string(name));
  return formats;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---- run -------------------------------------------------------------------

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::string out;
  std::string mock_script;
  std::vector<std::string> formats = {"json", "csv", "text"};
  std::string annotations;
};

harness::RunConfig resolved_config(const RunOptions& options) {
  auto config = harness::load_run_config(options.config);
  if (options.seed) config.seed = *options.seed;
  if (options.parallelism) config.parallelism = *options.parallelism;
  if (!options.out.empty()) config.output_dir = options.out;
  harness::validate(config);
  return config;
}

int cmd_run(const RunOptions& options) {
  const auto config = resolved_config(options);
  auto router = make_router(options.mock_script);
  auto artifacts = harness::run_experiment(config, *router, [&]() -> backend::ChatBackend& { return *router; });
  if (!options.annotations.empty()) {
    const auto tags = harness::attach_failure_tags(artifacts, options.annotations);
    for (const auto& warning : tags.warnings) std::cerr << "warning: " << warning << "\n";
  }
  for (const auto& path : harness::write_artifacts(artifacts, parse_formats(options.formats), config.output_dir)) {
    std::cerr << "wrote " << path.string() << "\n";
  }
  std::cout << metrics::to_text(artifacts.report);
  std::size_t failed = 0;
  for (const auto& sample : artifacts.samples) failed += sample.error ? 1 : 0;
  if (failed > 0) std::cerr << failed << " of " << artifacts.samples.size() << " instances failed\n";
  return 0;
}

// ---- fixtures ----------------------------------------------------------------

int cmd_fixtures_record(const RunOptions& options, const std::string& script_out) {
  auto config = resolved_config(options);
  auto live = make_router("");
  auto recorder = std::make_shared<backend::RecordingBackend>(live);
  backend::BackendRouter router;
  router.add(backend::BackendConfig::Kind::http_openai_compatible, recorder);
  const auto artifacts =
      harness::run_experiment(config, router, [&]() -> backend::ChatBackend& { return router; });
  recorder->write(script_out);
  std::cerr << "recorded " << recorder->entries().size() << " exchanges to " << script_out << "\n";
  for (const auto& sample : artifacts.samples) {
    if (sample.error) std::cerr << "instance " << sample.id << " failed: " << *sample.error << "\n";
  }
  return 0;
}

int cmd_fixtures_verify(const RunOptions& options, const std::vector<std::string>& configs) {
  if (options.mock_script.empty()) throw UsageError("fixtures verify needs --mock-script");
  auto mock = backend::load_mock_script(options.mock_script);
  backend::BackendRouter router;
  router.add(backend::BackendConfig::Kind::scripted_mock, mock);
  router.add(backend::BackendConfig::Kind::http_openai_compatible, mock);
  // One script may serve several configs; keys count as used across all of them.
  int problems = 0;
  std::size_t instances = 0;
  for (const auto& path : configs) {
    RunOptions single = options;
    single.config = path;
    const auto config = resolved_config(single);
    const auto artifacts =
        harness::run_experiment(config, router, [&]() -> backend::ChatBackend& { return router; });
    instances += artifacts.samples.size();
    for (const auto& sample : artifacts.samples) {
      if (sample.error) {
        std::cout << "FAIL " << path << " " << sample.id << ": " << *sample.error << "\n";
        ++problems;
      }
    }
  }
  for (const auto& key : mock->unused_keys()) {
    std::cout << "UNUSED " << key << "\n";
    ++problems;
  }
  std::cout << (problems == 0 ? "fixtures ok" : "fixtures stale") << " (" << configs.size() << " configs, "
            << instances << " instances, " << mock->size() << " keys)\n";
  return problems == 0 ? 0 : 1;
}

// ---- reward ------------------------------------------------------------------

struct RewardOptions {
  std::string input;
  std::string config;
  std::string mock_script;
  std::string out;
};

std::vector<pipeline::AnswerOption> row_options(const json& row) {
  std::vector<pipeline::AnswerOption> options;
  if (row.contains("options")) {
    for (const auto& option : row["options"]) {
      options.push_back({parse::normalize_option_label(option.at("label").get<std::string>(), parse::letter_labels(26)),
                         option.at("text").get<std::string>()});
    }
  } else {
    for (const auto& label : parse::letter_labels(4)) options.push_back({label, "option " + label.str()});
  }
  return options;
}

int cmd_reward(const RewardOptions& options) {
  reward::VeraWeights weights;
  backend::BackendConfig checker_config;
  backend::RetryPolicy retry;
  std::shared_ptr<backend::ChatBackend> checker = std::make_shared<grpo::RuleCheckerBackend>();
  if (!options.config.empty()) {
    const auto doc = read_json(options.config);
    if (doc.contains("weights")) {
      const auto& w = doc["weights"];
      weights = {w.value("format", weights.format), w.value("accuracy", weights.accuracy),
                 w.value("reasoning", weights.reasoning), w.value("logic", weights.logic)};
    }
    if (doc.contains("ablate")) {
      weights = reward::ablate(weights, reward::vera_component_from_string(doc["ablate"].get<std::string>()));
    }
    if (doc.contains("checker")) {
      checker_config = harness::backend_config_from_json(doc["checker"]);
      checker = make_router(options.mock_script);
    }
  }
  reward::validate(weights);

  std::ifstream in(options.input);
  if (!in) throw UsageError("cannot open " + options.input);
  std::ofstream file;
  if (!options.out.empty()) {
    file.open(options.out, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + options.out);
  }
  std::ostream& out = options.out.empty() ? std::cout : file;

  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto row = json::parse(line);
    const auto id = row.value("output_id", std::to_string(number));
    const auto mode = reward::reward_mode_from_string(row.value("mode", "mcq"));
    const reward::ReferenceRecord reference{row.at("gold").get<std::string>(), row.value("reasoning", "")};
    const auto answer_options = row_options(row);
    std::vector<parse::OptionLabel> labels;
    for (const auto& option : answer_options) labels.push_back(option.label);

    const reward::LogicFn logic = [&](const std::string& reasoning, const std::string& predicted) {
      if (mode == reward::RewardMode::open_ended_template) {
        return reward::LogicResult{reward::open_ended_logic(reasoning, predicted), std::nullopt};
      }
      return reward::reward_logic(reasoning, parse::OptionLabel(predicted.front()), answer_options, *checker,
                                  checker_config, retry);
    };
    const auto scored =
        reward::score_output(row.at("output").get<std::string>(), reference, mode, weights, logic, labels);
    auto record = reward::to_json(id, scored.breakdown);
    if (scored.logic_failure) record["logic_failure"] = *scored.logic_failure;
    out << record.dump() << "\n";
  }
  return 0;
}

// ---- grpo-sim ----------------------------------------------------------------

struct GrpoOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "grpo-out";
  bool control = false;
};

int cmd_grpo(const GrpoOptions& options) {
  grpo::GrpoConfig config;
  if (!options.config.empty()) config = grpo::grpo_config_from_json(read_json(options.config));
  if (options.seed) config.seed = *options.seed;
  grpo::validate(config);

  const auto task = grpo::ToyTask::standard();
  grpo::RuleCheckerBackend checker;
  const auto rewards = options.control ? grpo::constant_reward_table(task, 0.0)
                                       : grpo::vera_reward_table(task, reward::VeraWeights{}, checker, {});
  const auto log = grpo::train_toy(task, config, rewards);

  const fs::path dir(options.out);
  write_text(dir / "curve.csv", grpo::golden_curve_csv(log));
  std::string advantages;
  for (const auto& record : log.advantages) advantages += grpo::to_json(record).dump() + "\n";
  write_text(dir / "advantages.jsonl", advantages);
  const json summary = {{"config", grpo::to_json(config)},
                        {"control", options.control},
                        {"initial_gold_probability", log.initial_gold_probability},
                        {"final_gold_probability", log.final_gold_probability},
                        {"final_kl", log.rows.empty() ? 0.0 : log.rows.back().kl}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "P(gold well-formed) per prompt:";
  for (std::size_t p = 0; p < task.prompt_ids.size(); ++p) {
    std::printf(" %s %.4f -> %.4f", task.prompt_ids[p].c_str(), log.initial_gold_probability[p],
                log.final_gold_probability[p]);
  }
  std::cout << "\nwrote " << (dir / "curve.csv").string() << "\n";
  return 0;
}

// ---- theory ------------------------------------------------------------------

struct TheoryOptions {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 2024;
  int parallelism = 1;
  std::string out;
  std::vector<std::string> formats = {"json", "text"};
};

int cmd_theory(const TheoryOptions& options) {
  const theory::SuiteConfig config{options.trials, options.seed, options.parallelism};
  const auto rows = theory::run_bound_suite(config);
  const auto text = theory::to_text(rows);
  std::cout << text;
  if (!options.out.empty()) {
    const fs::path dir(options.out);
    for (const auto format : parse_formats(options.formats)) {
      if (format == harness::ReportFormat::json) {
        write_text(dir / "theory_report.json", theory::to_json(rows, config).dump(2) + "\n");
      } else if (format == harness::ReportFormat::text) {
        write_text(dir / "theory_report.txt", text);
      } else {
        throw UsageError("theory reports come as json or text");
      }
    }
  }
  return theory::all_satisfied(rows) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MoCoT comic VQA toolkit"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
  run_cmd->add_option("--config", run.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_option("--parallelism", run.parallelism, "Worker count");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--mock-script", run.mock_script, "Fixture script for scripted-mock backends");
  run_cmd->add_option("--format", run.formats, "Report formats: json, csv, text")->delimiter(',');
  run_cmd->add_option("--annotations", run.annotations, "Failure-tag annotation JSONL {id, tag}");

  RunOptions fixtures;
  std::string script_out;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Record or verify mock scripts");
  fixtures_cmd->require_subcommand(1);
  auto* record_cmd = fixtures_cmd->add_subcommand("record", "Run against live endpoints and save a mock script");
  record_cmd->add_option("--config", fixtures.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  record_cmd->add_option("--out", script_out, "Mock script to write")->required();
  record_cmd->add_option("--seed", fixtures.seed, "Override the config seed");
  record_cmd->add_option("--parallelism", fixtures.parallelism, "Worker count");
  auto* verify_cmd = fixtures_cmd->add_subcommand("verify", "Replay a mock script and report stale entries");
  std::vector<std::string> verify_configs;
  verify_cmd->add_option("--config", verify_configs, "Run configs (JSON), replayed in order")
      ->required()
      ->check(CLI::ExistingFile);
  verify_cmd->add_option("--mock-script", fixtures.mock_script, "Mock script")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--seed", fixtures.seed, "Override the config seed");

  RewardOptions reward_options;
  auto* reward_cmd = app.add_subcommand("reward", "Score a JSONL batch of model outputs with VERA");
  reward_cmd->add_option("--input", reward_options.input, "JSONL {output_id, output, gold, reasoning, mode, options}")
      ->required()
      ->check(CLI::ExistingFile);
  reward_cmd->add_option("--config", reward_options.config, "JSON {weights, ablate, checker}");
  reward_cmd->add_option("--mock-script", reward_options.mock_script, "Fixture script for the checker");
  reward_cmd->add_option("--out", reward_options.out, "Output JSONL (default stdout)");

  GrpoOptions grpo_options;
  auto* grpo_cmd = app.add_subcommand("grpo-sim", "Train the toy GRPO policy");
  grpo_cmd->add_option("--config", grpo_options.config, "GRPO config (JSON)");
  grpo_cmd->add_option("--seed", grpo_options.seed, "Sampling seed");
  grpo_cmd->add_option("--out", grpo_options.out, "Output directory");
  grpo_cmd->add_flag("--control", grpo_options.control, "Zero-reward control run");

  TheoryOptions theory_options;
  auto* theory_cmd = app.add_subcommand("theory", "Run the bound-check suite");
  theory_cmd->add_option("--trials", theory_options.trials, "Monte-Carlo trials per check");
  theory_cmd->add_option("--seed", theory_options.seed, "Base seed");
  theory_cmd->add_option("--parallelism", theory_options.parallelism, "Worker threads");
  theory_cmd->add_option("--out", theory_options.out, "Output directory");
  theory_cmd->add_option("--format", theory_options.formats, "json, text")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*record_cmd) return cmd_fixtures_record(fixtures, script_out);
    if (*verify_cmd) return cmd_fixtures_verify(fixtures, verify_configs);
    if (*reward_cmd) return cmd_reward(reward_options);
    if (*grpo_cmd) return cmd_grpo(grpo_options);
    if (*theory_cmd) return cmd_theory(theory_options);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
