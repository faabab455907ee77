#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"
#include "mocot/backend/transcript.hpp"
#include "mocot/parse/option_label.hpp"
#include "mocot/pipeline/instance.hpp"
#include "mocot/pipeline/prompts.hpp"

namespace mocot::reward {

enum class RewardMode { mcq_tagged, open_ended_template };

RewardMode reward_mode_from_string(std::string_view name);

enum class VeraComponent { format, accuracy, reasoning, logic };

VeraComponent vera_component_from_string(std::string_view name);

struct VeraWeights {
  double format = 0.05;
  double accuracy = 0.6;
  double reasoning = 0.2;
  double logic = 0.15;

  double sum() const { return format + accuracy + reasoning + logic; }
};

/// Throws std::invalid_argument on a negative weight or a zero sum.
void validate(const VeraWeights& weights);

/// Drops one term and rescales the rest proportionally so the sum is kept.
VeraWeights ablate(const VeraWeights& weights, VeraComponent removed);

/// Reference side of one training sample: gold option label (or reference
/// text for open-ended samples) and the reference reasoning.
struct ReferenceRecord {
  std::string gold;
  std::string reasoning;
};

struct Components {
  double format = 0.0;
  double accuracy = 0.0;
  double reasoning_raw = 0.0;
  double logic = 0.0;
};

struct RewardBreakdown {
  double r_format = 0.0;
  double r_accuracy = 0.0;
  double r_reasoning_raw = 0.0;
  double r_reasoning_effective = 0.0;
  double r_logic = 0.0;
  bool mask_applied = false;
  double total = 0.0;
};

inline constexpr double kOpenEndedAccuracyThreshold = 0.3;

/// 1 iff the output is exactly one REASONING and one ANSWER span and the body
/// fits the mode: a single option label, or the CUES/INTENT template free of
/// forbidden words.
double reward_format(std::string_view output, RewardMode mode);

/// mcq: normalized labels equal. Open-ended: ROUGE-L F1 against the reference
/// text reaches kOpenEndedAccuracyThreshold.
double reward_accuracy(std::string_view predicted, const ReferenceRecord& reference, RewardMode mode,
                       const std::vector<parse::OptionLabel>& options = parse::letter_labels(26));

struct ReasoningReward {
  double raw = 0.0;
  double effective = 0.0;
};

/// ROUGE-L F1 against the reference reasoning, zeroed when r_accuracy is 0.
ReasoningReward reward_reasoning(std::string_view generated, const ReferenceRecord& reference, double r_accuracy);

struct LogicResult {
  double value = 0.0;
  std::optional<std::string> failure;  // checker output that did not parse
};

/// Checker call over the rationale: 1 iff consistent and matched = predicted.
/// Unparseable checker output scores 0 with the failure recorded; backend
/// errors propagate.
LogicResult reward_logic(const std::string& rationale, parse::OptionLabel predicted,
                         const std::vector<pipeline::AnswerOption>& options, backend::ChatBackend& checker,
                         const backend::BackendConfig& config, const backend::RetryPolicy& retry = {},
                         const pipeline::PromptLibrary& prompts = pipeline::PromptLibrary::builtin(),
                         backend::Transcript* transcript = nullptr);

/// Open-ended logic rule: the ANSWER reuses at least one CUES phrase.
double open_ended_logic(std::string_view reasoning, std::string_view answer);

/// Weighted sum with the reasoning term masked when accuracy is 0. Throws
/// std::invalid_argument for components outside [0,1] or invalid weights.
RewardBreakdown vera_total(const Components& components, const VeraWeights& weights);

/// Source of r_l for score_output: (reasoning, predicted answer) -> LogicResult.
using LogicFn = std::function<LogicResult(const std::string&, const std::string&)>;

struct ScoredOutput {
  RewardBreakdown breakdown;
  std::string predicted;
  std::string reasoning;
  std::optional<std::string> logic_failure;
};

/// Full VERA scoring of one raw model output. Answer and reasoning come from
/// a lenient parse so a malformed output still earns accuracy and logic
/// credit; an output without both tags earns nothing but what it parses.
ScoredOutput score_output(std::string_view output, const ReferenceRecord& reference, RewardMode mode,
                          const VeraWeights& weights, const LogicFn& logic,
                          const std::vector<parse::OptionLabel>& options = parse::letter_labels(26));

nlohmann::json to_json(std::string_view output_id, const RewardBreakdown& breakdown);

}  // namespace mocot::reward
