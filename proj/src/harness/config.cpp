#include "mocot/harness/config.hpp"

#include <algorithm>
#include <fstream>

#include "mocot/metrics/report.hpp"

namespace mocot::harness {

namespace fs = std::filesystem;
using nlohmann::json;

Method method_from_string(std::string_view name) {
  if (name == "direct-no-cot") return Method::direct_no_cot;
  if (name == "direct-cot") return Method::direct_cot;
  if (name == "grpo-tagged") return Method::grpo_tagged;
  if (name == "mocot") return Method::mocot;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::direct_no_cot:
      return "direct-no-cot";
    case Method::direct_cot:
      return "direct-cot";
    case Method::grpo_tagged:
      return "grpo-tagged";
    case Method::mocot:
      return "mocot";
  }
  return "mocot";
}

const pipeline::PromptLibrary& RunConfig::prompt_library() const {
  return prompts ? *prompts : pipeline::PromptLibrary::builtin();
}

namespace {

template <typename T>
T get_or(const json& object, const char* key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& object, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* name) { return key == name; });
    if (!ok) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

std::string_view kind_name(backend::BackendConfig::Kind kind) {
  return kind == backend::BackendConfig::Kind::http_openai_compatible ? "http-openai-compatible" : "scripted-mock";
}

backend::RetryPolicy retry_from_json(const json& value) {
  if (!value.is_object()) throw std::invalid_argument("retry must be an object");
  reject_unknown(value, {"max_attempts", "base_delay_ms", "multiplier", "timeout_ms"}, "retry");
  backend::RetryPolicy policy;
  policy.max_attempts = get_or(value, "max_attempts", policy.max_attempts);
  policy.base_delay = std::chrono::milliseconds(get_or<long>(value, "base_delay_ms", policy.base_delay.count()));
  policy.backoff_multiplier = get_or(value, "multiplier", policy.backoff_multiplier);
  policy.request_timeout =
      std::chrono::milliseconds(get_or<long>(value, "timeout_ms", policy.request_timeout.count()));
  return policy;
}

json to_json(const backend::RetryPolicy& policy) {
  return {{"max_attempts", policy.max_attempts},
          {"base_delay_ms", policy.base_delay.count()},
          {"multiplier", policy.backoff_multiplier},
          {"timeout_ms", policy.request_timeout.count()}};
}

fs::path resolve(const fs::path& path, const fs::path& base_dir) {
  if (path.is_absolute() || base_dir.empty()) return path;
  return (base_dir / path).lexically_normal();
}

}  // namespace

backend::BackendConfig backend_config_from_json(const json& value) {
  if (!value.is_object()) throw std::invalid_argument("backend config must be an object");
  reject_unknown(value, {"kind", "endpoint", "model", "temperature", "max_output_tokens", "api_key_env_var"},
                 "backend config");
  backend::BackendConfig config;
  const auto kind = get_or<std::string>(value, "kind", "scripted-mock");
  if (kind == "http-openai-compatible") {
    config.kind = backend::BackendConfig::Kind::http_openai_compatible;
  } else if (kind == "scripted-mock") {
    config.kind = backend::BackendConfig::Kind::scripted_mock;
  } else {
    throw std::invalid_argument("unknown backend kind: " + kind);
  }
  config.endpoint = get_or<std::string>(value, "endpoint", "");
  config.model_name = get_or<std::string>(value, "model", "");
  config.temperature = get_or(value, "temperature", config.temperature);
  config.max_output_tokens = get_or(value, "max_output_tokens", config.max_output_tokens);
  config.api_key_env_var = get_or<std::string>(value, "api_key_env_var", "");
  try {
    backend::validate(config);
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }
  return config;
}

json to_json(const backend::BackendConfig& config) {
  return {{"kind", kind_name(config.kind)},
          {"endpoint", config.endpoint},
          {"model", config.model_name},
          {"temperature", config.temperature},
          {"max_output_tokens", config.max_output_tokens},
          {"api_key_env_var", config.api_key_env_var}};
}

RunConfig run_config_from_json(const json& value, const fs::path& base_dir) {
  if (!value.is_object()) throw std::invalid_argument("run config must be a JSON object");
  reject_unknown(value,
                 {"dataset", "method", "stages", "model", "metrics", "judge", "counterfactual", "retry",
                  "parallelism", "seed", "output_dir", "prompts_dir"},
                 "run config");
  RunConfig config;

  if (!value.contains("dataset") || !value["dataset"].is_object()) {
    throw std::invalid_argument("run config needs a dataset object");
  }
  const auto& dataset = value["dataset"];
  reject_unknown(dataset, {"name", "path", "format", "split"}, "dataset");
  config.dataset.name = get_or<std::string>(dataset, "name", "");
  const auto path = get_or<std::string>(dataset, "path", "");
  if (path.empty()) throw std::invalid_argument("dataset needs a path");
  config.dataset.path = resolve(path, base_dir);
  config.dataset.format = dataset_format_from_string(get_or<std::string>(dataset, "format", "mcq-jsonl"));
  config.dataset.split = split_from_string(get_or<std::string>(dataset, "split", "evaluation"));

  config.method = method_from_string(get_or<std::string>(value, "method", "mocot"));
  if (value.contains("retry")) config.retry = retry_from_json(value["retry"]);
  config.parallelism = get_or(value, "parallelism", config.parallelism);
  config.seed = get_or<std::uint64_t>(value, "seed", config.seed);
  config.output_dir = resolve(get_or<std::string>(value, "output_dir", "run"), base_dir);
  if (value.contains("prompts_dir")) {
    config.prompts_dir = resolve(value["prompts_dir"].get<std::string>(), base_dir);
    config.prompts = std::make_shared<pipeline::PromptLibrary>(pipeline::PromptLibrary::from_directory(*config.prompts_dir));
  }
  if (value.contains("metrics")) {
    config.metrics = get_or<std::vector<std::string>>(value, "metrics", {});
  }
  if (value.contains("judge")) config.judge = backend_config_from_json(value["judge"]);
  if (value.contains("model")) config.model = backend_config_from_json(value["model"]);
  config.counterfactual =
      metrics::counterfactual_strategy_from_string(get_or<std::string>(value, "counterfactual", "next-label"));

  if (value.contains("stages")) {
    const auto& stages = value["stages"];
    if (!stages.is_object()) throw std::invalid_argument("stages must be an object");
    reject_unknown(stages,
                   {"planner", "executor", "meta", "checker", "max_verify_retries", "planner_variant",
                    "retry_mode", "concurrent_executors"},
                   "stages");
    for (const char* stage : {"planner", "executor", "meta", "checker"}) {
      if (!stages.contains(stage)) throw std::invalid_argument(std::string("stages needs a '") + stage + "' backend");
    }
    config.stages.planner = backend_config_from_json(stages["planner"]);
    config.stages.executor = backend_config_from_json(stages["executor"]);
    config.stages.meta = backend_config_from_json(stages["meta"]);
    config.stages.checker = backend_config_from_json(stages["checker"]);
    config.stages.max_verify_retries = get_or(stages, "max_verify_retries", config.stages.max_verify_retries);
    config.stages.planner_variant =
        pipeline::planner_variant_from_string(get_or<std::string>(stages, "planner_variant", "verbatim"));
    config.stages.retry_mode =
        pipeline::retry_mode_from_string(get_or<std::string>(stages, "retry_mode", "reinvoke-meta"));
    config.stages.concurrent_executors = get_or(stages, "concurrent_executors", false);
  } else if (config.method == Method::mocot) {
    throw std::invalid_argument("method mocot needs stages for planner, executor, meta and checker");
  }
  config.stages.retry = config.retry;
  config.stages.prompts = &config.prompt_library();

  validate(config);
  return config;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
  json value;
  try {
    value = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(value, path.parent_path());
}

json to_json(const RunConfig& config) {
  json out = {{"dataset",
               {{"name", config.dataset.name},
                {"path", config.dataset.path.string()},
                {"format", to_string(config.dataset.format)},
                {"split", to_string(config.dataset.split)}}},
              {"method", to_string(config.method)},
              {"metrics", config.metrics},
              {"counterfactual", config.counterfactual == metrics::CounterfactualStrategy::next_label
                                     ? "next-label"
                                     : "seeded-random"},
              {"retry", to_json(config.retry)},
              {"parallelism", config.parallelism},
              {"seed", config.seed},
              {"output_dir", config.output_dir.string()}};
  if (config.method == Method::mocot) {
    out["stages"] = {{"planner", to_json(config.stages.planner)},
                     {"executor", to_json(config.stages.executor)},
                     {"meta", to_json(config.stages.meta)},
                     {"checker", to_json(config.stages.checker)},
                     {"max_verify_retries", config.stages.max_verify_retries},
                     {"planner_variant",
                      config.stages.planner_variant == pipeline::PlannerVariant::verbatim ? "verbatim" : "typed"},
                     {"retry_mode", config.stages.retry_mode == pipeline::RetryMode::reinvoke_meta
                                        ? "reinvoke-meta"
                                        : "adopt-correction"},
                     {"concurrent_executors", config.stages.concurrent_executors}};
  }
  if (config.model) out["model"] = to_json(*config.model);
  if (config.judge) out["judge"] = to_json(*config.judge);
  if (config.prompts_dir) out["prompts_dir"] = config.prompts_dir->string();
  return out;
}

bool wants_judge(const RunConfig& config) {
  return std::any_of(config.metrics.begin(), config.metrics.end(),
                     [](const std::string& m) { return m == "cas" || m == "usr" || m == "usr_unpadded"; });
}

void validate(const RunConfig& config) {
  if (config.parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
  if (config.metrics.empty()) throw std::invalid_argument("at least one metric is required");
  const auto& known = metrics::metric_names();
  for (const auto& metric : config.metrics) {
    if (std::find(known.begin(), known.end(), metric) == known.end()) {
      throw std::invalid_argument("unknown metric: " + metric);
    }
  }
  try {
    backend::validate(config.retry);
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }
  if (config.method == Method::mocot) {
    if (config.dataset.format != DatasetFormat::mcq_jsonl) {
      throw std::invalid_argument("method mocot runs on multiple-choice datasets only");
    }
    pipeline::validate(config.stages);
  } else if (!config.model) {
    throw std::invalid_argument("direct methods need a model backend");
  }
  if (config.dataset.format == DatasetFormat::open_ended_jsonl && config.method != Method::grpo_tagged &&
      config.method != Method::mocot) {
    throw std::invalid_argument("open-ended datasets need the grpo-tagged method");
  }
  if (wants_judge(config) && !config.judge) throw std::invalid_argument("cas/usr metrics need a judge backend");
}

}  // namespace mocot::harness
