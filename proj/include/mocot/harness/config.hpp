#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/chat.hpp"
#include "mocot/harness/dataset.hpp"
#include "mocot/metrics/faithfulness.hpp"
#include "mocot/pipeline/pipeline.hpp"

namespace mocot::harness {

enum class Method { direct_no_cot, direct_cot, grpo_tagged, mocot };

Method method_from_string(std::string_view name);
std::string_view to_string(Method method);

/// One declarative run document. Secrets stay in environment variables named
/// by each backend's api_key_env_var.
struct RunConfig {
  DatasetSpec dataset;
  Method method = Method::mocot;
  pipeline::StageConfig stages;
  std::optional<backend::BackendConfig> model;  // direct methods
  std::vector<std::string> metrics = {"accuracy"};
  std::optional<backend::BackendConfig> judge;
  metrics::CounterfactualStrategy counterfactual = metrics::CounterfactualStrategy::next_label;
  backend::RetryPolicy retry;
  int parallelism = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";
  std::optional<std::filesystem::path> prompts_dir;
  std::shared_ptr<const pipeline::PromptLibrary> prompts;  // loaded from prompts_dir, else builtin

  const pipeline::PromptLibrary& prompt_library() const;
};

backend::BackendConfig backend_config_from_json(const nlohmann::json& value);
nlohmann::json to_json(const backend::BackendConfig& config);

/// Relative dataset and prompt paths resolve against `base_dir`. Throws
/// std::invalid_argument for an invalid document.
RunConfig run_config_from_json(const nlohmann::json& value, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

/// Throws std::invalid_argument.
void validate(const RunConfig& config);

bool wants_judge(const RunConfig& config);

}  // namespace mocot::harness
