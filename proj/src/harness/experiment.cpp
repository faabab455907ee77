#include "mocot/harness/experiment.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "mocot/metrics/text_metrics.hpp"
#include "mocot/pipeline/pipeline.hpp"
#include "mocot/theory/stats.hpp"

namespace mocot::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using pipeline::CVQAInstance;

json to_json(const SampleRecord& record) {
  json out = {{"id", record.id}, {"output", record.output}};
  if (record.error) out["error"] = *record.error;
  if (record.cas) out["cas"] = metrics::to_json(*record.cas);
  if (record.usr) out["usr"] = metrics::to_json(*record.usr);
  return out;
}

json to_json(const TagSummary& summary) {
  json counts = json::object();
  for (const auto& [tag, count] : summary.counts) counts[tag] = count;
  return {{"incorrect", summary.incorrect}, {"counts", counts}, {"warnings", summary.warnings}};
}

namespace {

pipeline::DirectVariant direct_variant(Method method) {
  switch (method) {
    case Method::direct_no_cot:
      return pipeline::DirectVariant::no_cot;
    case Method::direct_cot:
      return pipeline::DirectVariant::cot;
    default:
      return pipeline::DirectVariant::grpo_tagged;
  }
}

bool wanted(const RunConfig& config, const char* metric) {
  return std::find(config.metrics.begin(), config.metrics.end(), metric) != config.metrics.end();
}

/// Hands out the judge on first use; a failing provider aborts the run.
class LazyJudge {
 public:
  LazyJudge(const RunConfig& config, const JudgeProvider& provider) : config_(config), provider_(provider) {}

  metrics::Judge get() {
    std::lock_guard lock(mutex_);
    if (!backend_) {
      if (!provider_) throw std::invalid_argument("judge metrics requested but no judge backend was provided");
      backend_ = &provider_();
    }
    return {backend_, *config_.judge, config_.retry, &config_.prompt_library()};
  }

 private:
  const RunConfig& config_;
  const JudgeProvider& provider_;
  std::mutex mutex_;
  backend::ChatBackend* backend_ = nullptr;
};

struct SetupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Outcome {
  SampleRecord record;
  metrics::EvalRow row;
};

void excluded(metrics::EvalRow& row, const std::string& metric, const std::string& reason) {
  row.notes.push_back(metric + ": " + reason);
}

Outcome run_instance(const RunConfig& config, const CVQAInstance& instance, std::size_t index,
                     backend::ChatBackend& model, LazyJudge& judge) {
  Outcome out;
  out.record.id = instance.id;
  out.row.id = instance.id;
  out.row.gold = instance.gold;
  const bool mcq = instance.mode == pipeline::AnswerMode::mcq;

  std::optional<std::string> rationale;
  try {
    if (config.method == Method::mocot) {
      const auto trace = pipeline::run_pipeline(instance, model, config.stages, &out.record.transcript);
      out.record.output = pipeline::to_json(trace);
      out.row.prediction = trace.answer.str();
      rationale = trace.fir;
    } else {
      const auto result = pipeline::run_direct(instance, model, *config.model, direct_variant(config.method),
                                               config.retry, config.prompt_library(), &out.record.transcript);
      out.record.output = {{"answer", result.answer}};
      if (result.rationale) out.record.output["rationale"] = *result.rationale;
      out.row.prediction = result.answer;
      rationale = result.rationale;
    }
  } catch (const pipeline::StageError& e) {
    out.record.error = e.stage() + ": " + e.what();
  } catch (const std::exception& e) {
    out.record.error = e.what();
  }
  if (out.record.error) {
    out.row.notes.push_back("instance failed: " + *out.record.error);
    return out;
  }

  if (wanted(config, "accuracy")) {
    if (mcq) {
      out.row.correct = metrics::accuracy({out.row.prediction}, {instance.gold});
    } else {
      excluded(out.row, "accuracy", "not defined for open-ended instances");
    }
  }
  if (wanted(config, "bleu4") || wanted(config, "rouge_l")) {
    if (mcq) {
      if (wanted(config, "bleu4")) excluded(out.row, "bleu4", "not defined for multiple-choice instances");
      if (wanted(config, "rouge_l")) excluded(out.row, "rouge_l", "not defined for multiple-choice instances");
    } else {
      if (wanted(config, "bleu4")) out.row.bleu4 = metrics::bleu4(out.row.prediction, instance.gold);
      if (wanted(config, "rouge_l")) out.row.rouge_l = metrics::rouge_l(out.row.prediction, instance.gold).f1;
    }
  }

  const auto obtain_judge = [&] {
    try {
      return judge.get();
    } catch (const std::exception& e) {
      throw SetupError(std::string("judge setup failed: ") + e.what());
    }
  };

  if (wanted(config, "cas")) {
    if (!mcq) {
      excluded(out.row, "cas", "not defined for open-ended instances");
    } else if (!rationale) {
      excluded(out.row, "cas", "method produces no rationale");
    } else {
      const auto j = obtain_judge();
      try {
        const auto record = metrics::cas(instance, parse::OptionLabel(out.row.prediction[0]), *rationale, j,
                                         config.counterfactual, theory::mix64(config.seed + index),
                                         &out.record.transcript);
        out.row.cas = record.cas ? 1.0 : 0.0;
        out.record.cas = record;
      } catch (const std::exception& e) {
        excluded(out.row, "cas", std::string("judge failed: ") + e.what());
      }
    }
  }
  if (wanted(config, "usr") || wanted(config, "usr_unpadded")) {
    if (!rationale) {
      if (wanted(config, "usr")) excluded(out.row, "usr", "method produces no rationale");
      if (wanted(config, "usr_unpadded")) excluded(out.row, "usr_unpadded", "method produces no rationale");
    } else {
      const auto j = obtain_judge();
      try {
        const auto record = metrics::usr(instance, *rationale, j, &out.record.transcript);
        if (wanted(config, "usr")) out.row.usr = record.usr;
        if (wanted(config, "usr_unpadded")) {
          out.row.usr_unpadded = record.usr_unpadded;
          if (!record.usr_unpadded) excluded(out.row, "usr_unpadded", "judge listed no claims");
        }
        out.record.usr = record;
      } catch (const std::exception& e) {
        if (wanted(config, "usr")) excluded(out.row, "usr", std::string("judge failed: ") + e.what());
        if (wanted(config, "usr_unpadded")) excluded(out.row, "usr_unpadded", std::string("judge failed: ") + e.what());
      }
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("output directory is not writable: " + dir.string() +
                             (ec ? " (" + ec.message() + ")" : ""));
  }
}

}  // namespace

RunArtifacts run_experiment(const RunConfig& config, const std::vector<CVQAInstance>& instances,
                            backend::ChatBackend& model, const JudgeProvider& judge_provider) {
  validate(config);
  if (instances.empty()) throw std::invalid_argument("no instances to run");

  LazyJudge judge(config, judge_provider);
  std::vector<Outcome> outcomes(instances.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr setup_error;
  std::mutex error_mutex;

  const auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        outcomes[i] = run_instance(config, instances[i], i, model, judge);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!setup_error) setup_error = std::current_exception();
        abort = true;
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), instances.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (setup_error) std::rethrow_exception(setup_error);

  RunArtifacts artifacts;
  artifacts.config = to_json(config);
  artifacts.seed = config.seed;
  std::vector<metrics::EvalRow> rows;
  for (auto& outcome : outcomes) {
    artifacts.samples.push_back(std::move(outcome.record));
    rows.push_back(std::move(outcome.row));
  }
  artifacts.report = metrics::aggregate(std::move(rows), config.metrics);
  return artifacts;
}

RunArtifacts run_experiment(const RunConfig& config, backend::ChatBackend& model, const JudgeProvider& judge) {
  return run_experiment(config, load_dataset(config.dataset), model, judge);
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "text" || name == "txt") return ReportFormat::text;
  throw std::invalid_argument("unknown report format: " + std::string(name));
}

std::vector<fs::path> emit_report(const RunArtifacts& artifacts, const std::set<ReportFormat>& formats,
                                  const fs::path& dir) {
  ensure_directory(dir);
  std::vector<fs::path> written;
  for (const auto format : formats) {
    fs::path path;
    std::string content;
    switch (format) {
      case ReportFormat::json:
        path = dir / "report.json";
        content = metrics::to_json(artifacts.report).dump(2) + "\n";
        break;
      case ReportFormat::csv:
        path = dir / "report.csv";
        content = metrics::to_csv(artifacts.report);
        break;
      case ReportFormat::text:
        path = dir / "report.txt";
        content = metrics::to_text(artifacts.report);
        break;
    }
    write_file(path, content);
    written.push_back(path);
  }
  return written;
}

std::vector<fs::path> write_artifacts(const RunArtifacts& artifacts, const std::set<ReportFormat>& formats,
                                      const fs::path& dir) {
  auto written = emit_report(artifacts, formats, dir);

  json config = artifacts.config;
  config["seed"] = artifacts.seed;
  write_file(dir / "config.json", config.dump(2) + "\n");
  written.push_back(dir / "config.json");

  std::string samples;
  std::string transcripts;
  for (const auto& sample : artifacts.samples) {
    samples += to_json(sample).dump() + "\n";
    for (const auto& entry : sample.transcript) {
      json line = backend::to_json(entry);
      line["id"] = sample.id;
      transcripts += line.dump() + "\n";
    }
  }
  write_file(dir / "samples.jsonl", samples);
  write_file(dir / "transcripts.jsonl", transcripts);
  written.push_back(dir / "samples.jsonl");
  written.push_back(dir / "transcripts.jsonl");

  if (artifacts.tags) {
    write_file(dir / "tags.json", to_json(*artifacts.tags).dump(2) + "\n");
    written.push_back(dir / "tags.json");
  }
  return written;
}

}  // namespace mocot::harness
