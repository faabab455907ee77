#include "mocot/reward/vera.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "mocot/metrics/text_metrics.hpp"
#include "mocot/parse/cues_intent.hpp"
#include "mocot/parse/errors.hpp"
#include "mocot/parse/json_extract.hpp"
#include "mocot/parse/schemas.hpp"
#include "mocot/parse/tagged.hpp"
#include "mocot/pipeline/pipeline.hpp"

namespace mocot::reward {

RewardMode reward_mode_from_string(std::string_view name) {
  if (name == "mcq" || name == "mcq-tagged") return RewardMode::mcq_tagged;
  if (name == "open-ended" || name == "open-ended-template") return RewardMode::open_ended_template;
  throw std::invalid_argument("unknown reward mode: " + std::string(name));
}

VeraComponent vera_component_from_string(std::string_view name) {
  if (name == "format" || name == "lambda1") return VeraComponent::format;
  if (name == "accuracy" || name == "lambda2") return VeraComponent::accuracy;
  if (name == "reasoning" || name == "lambda3") return VeraComponent::reasoning;
  if (name == "logic" || name == "lambda4") return VeraComponent::logic;
  throw std::invalid_argument("unknown VERA component: " + std::string(name));
}

void validate(const VeraWeights& weights) {
  for (double w : {weights.format, weights.accuracy, weights.reasoning, weights.logic}) {
    if (!(w >= 0.0)) throw std::invalid_argument("VERA weights must be non-negative");
  }
  if (!(weights.sum() > 0.0)) throw std::invalid_argument("VERA weights must not all be zero");
}

VeraWeights ablate(const VeraWeights& weights, VeraComponent removed) {
  validate(weights);
  VeraWeights out = weights;
  double* slot = removed == VeraComponent::format     ? &out.format
                 : removed == VeraComponent::accuracy ? &out.accuracy
                 : removed == VeraComponent::reasoning ? &out.reasoning
                                                       : &out.logic;
  const double total = weights.sum();
  const double dropped = *slot;
  *slot = 0.0;
  const double rest = total - dropped;
  if (!(rest > 0.0)) throw std::invalid_argument("ablation leaves no weight");
  const double scale = total / rest;
  out.format *= scale;
  out.accuracy *= scale;
  out.reasoning *= scale;
  out.logic *= scale;
  return out;
}

double reward_format(std::string_view output, RewardMode mode) {
  try {
    const auto tagged = parse::parse_tagged_output(output, parse::TagMode::strict);
    if (mode == RewardMode::mcq_tagged) {
      const auto label = parse::normalize_option_label(tagged.answer, parse::letter_labels(26));
      // the body must be the label alone, not a sentence that mentions one
      std::string bare;
      for (char c : tagged.answer) {
        if (c != '(' && c != ')' && c != '.' && c != ' ') bare.push_back(c);
      }
      return bare.size() == 1 && std::toupper(static_cast<unsigned char>(bare[0])) == label.letter() ? 1.0 : 0.0;
    }
    const auto cues = parse::parse_cues_intent(tagged.reasoning);
    if (cues.forbidden_word_flag() || !parse::find_forbidden_words(tagged.answer).empty()) return 0.0;
    return tagged.answer.empty() ? 0.0 : 1.0;
  } catch (const parse::ParseError&) {
    return 0.0;
  }
}

double reward_accuracy(std::string_view predicted, const ReferenceRecord& reference, RewardMode mode,
                       const std::vector<parse::OptionLabel>& options) {
  if (mode == RewardMode::open_ended_template) {
    return metrics::rouge_l(predicted, reference.gold).f1 >= kOpenEndedAccuracyThreshold ? 1.0 : 0.0;
  }
  try {
    return parse::normalize_option_label(predicted, options) ==
                   parse::normalize_option_label(reference.gold, options)
               ? 1.0
               : 0.0;
  } catch (const parse::ParseError&) {
    return 0.0;
  }
}

ReasoningReward reward_reasoning(std::string_view generated, const ReferenceRecord& reference, double r_accuracy) {
  ReasoningReward out;
  out.raw = metrics::rouge_l(generated, reference.reasoning).f1;
  out.effective = r_accuracy > 0.0 ? out.raw : 0.0;
  return out;
}

LogicResult reward_logic(const std::string& rationale, parse::OptionLabel predicted,
                         const std::vector<pipeline::AnswerOption>& options, backend::ChatBackend& checker,
                         const backend::BackendConfig& config, const backend::RetryPolicy& retry,
                         const pipeline::PromptLibrary& prompts, backend::Transcript* transcript) {
  const std::vector<backend::ChatMessage> messages = {
      backend::ChatMessage::system(prompts.get("checker")),
      backend::ChatMessage::user(pipeline::checker_user_text(rationale, predicted, options))};
  const auto reply = backend::call_logged(checker, messages, config, retry, "checker-reward", transcript);
  try {
    const auto verdict = parse::parse_verdict(parse::extract_fenced_json(reply.text).value);
    return {verdict.is_consistent && verdict.matched_answer == predicted ? 1.0 : 0.0, std::nullopt};
  } catch (const parse::ParseError& error) {
    return {0.0, reply.text};
  } catch (const nlohmann::json::exception& error) {
    return {0.0, reply.text};
  }
}

double open_ended_logic(std::string_view reasoning, std::string_view answer) {
  try {
    const auto parsed = parse::parse_cues_intent(reasoning);
    std::string lowered_answer;
    for (char c : answer) lowered_answer.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (const auto& cue : parsed.cues) {
      std::string lowered;
      for (char c : cue) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      if (!lowered.empty() && lowered_answer.find(lowered) != std::string::npos) return 1.0;
    }
  } catch (const parse::ParseError&) {
  }
  return 0.0;
}

RewardBreakdown vera_total(const Components& components, const VeraWeights& weights) {
  validate(weights);
  for (double c : {components.format, components.accuracy, components.reasoning_raw, components.logic}) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("VERA components must lie in [0,1]");
  }
  RewardBreakdown out;
  out.r_format = components.format;
  out.r_accuracy = components.accuracy;
  out.r_reasoning_raw = components.reasoning_raw;
  out.mask_applied = components.accuracy == 0.0;
  out.r_reasoning_effective = out.mask_applied ? 0.0 : components.reasoning_raw;
  out.r_logic = components.logic;
  out.total = weights.format * out.r_format + weights.accuracy * out.r_accuracy +
              weights.reasoning * out.r_reasoning_effective + weights.logic * out.r_logic;
  return out;
}

ScoredOutput score_output(std::string_view output, const ReferenceRecord& reference, RewardMode mode,
                          const VeraWeights& weights, const LogicFn& logic,
                          const std::vector<parse::OptionLabel>& options) {
  ScoredOutput out;
  Components components;
  components.format = reward_format(output, mode);
  std::optional<parse::TaggedOutput> tagged;
  try {
    tagged = parse::parse_tagged_output(output, parse::TagMode::lenient);
  } catch (const parse::ParseError&) {
  }
  if (tagged) {
    out.reasoning = tagged->reasoning;
    out.predicted = tagged->answer;
    if (mode == RewardMode::mcq_tagged) {
      try {
        out.predicted = parse::normalize_option_label(tagged->answer, options).str();
      } catch (const parse::ParseError&) {
        out.predicted.clear();
      }
    }
    components.accuracy = out.predicted.empty() ? 0.0 : reward_accuracy(out.predicted, reference, mode, options);
    components.reasoning_raw = reward_reasoning(out.reasoning, reference, components.accuracy).raw;
    if (!out.predicted.empty() && logic) {
      const auto result = logic(out.reasoning, out.predicted);
      components.logic = result.value;
      out.logic_failure = result.failure;
    }
  }
  out.breakdown = vera_total(components, weights);
  return out;
}

nlohmann::json to_json(std::string_view output_id, const RewardBreakdown& breakdown) {
  return {{"output_id", output_id},
          {"r_f", breakdown.r_format},
          {"r_a", breakdown.r_accuracy},
          {"r_r_raw", breakdown.r_reasoning_raw},
          {"r_r_eff", breakdown.r_reasoning_effective},
          {"r_l", breakdown.r_logic},
          {"total", breakdown.total},
          {"mask_applied", breakdown.mask_applied}};
}

}  // namespace mocot::reward
