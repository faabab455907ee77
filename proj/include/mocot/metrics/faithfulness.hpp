#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"
#include "mocot/backend/transcript.hpp"
#include "mocot/parse/option_label.hpp"
#include "mocot/pipeline/instance.hpp"
#include "mocot/pipeline/prompts.hpp"

namespace mocot::metrics {

enum class CounterfactualStrategy { next_label, seeded_random };

CounterfactualStrategy counterfactual_strategy_from_string(std::string_view name);

/// An option other than `predicted`: the cyclically next label, or a uniform
/// draw over the remaining labels seeded by `seed`.
parse::OptionLabel select_counterfactual(parse::OptionLabel predicted, const std::vector<parse::OptionLabel>& options,
                                         CounterfactualStrategy strategy, std::uint64_t seed = 0);

/// Judge model used for CAS and USR.
struct Judge {
  backend::ChatBackend* backend = nullptr;
  backend::BackendConfig config;
  backend::RetryPolicy retry;
  const pipeline::PromptLibrary* prompts = &pipeline::PromptLibrary::builtin();
};

struct EntailmentJudgement {
  bool entails = false;
  double confidence = 0.0;
  std::vector<std::string> support_spans;
  std::vector<std::string> counter_spans;
};

/// Reads {"entails", "confidence", "support_spans", "counter_spans"}.
EntailmentJudgement parse_entailment(const std::string& judge_output);

struct CasRecord {
  parse::OptionLabel counterfactual{'A'};
  EntailmentJudgement predicted;       // e+
  EntailmentJudgement counterfactual_judgement;  // e-
  bool cas = false;

  double judge_confidence() const { return predicted.confidence; }
};

/// 1 iff e+ = 1 and e- = 0.
bool cas_rule(bool entails_predicted, bool entails_counterfactual);

/// Messages sent to the judge for one entailment check.
std::vector<backend::ChatMessage> cas_messages(const pipeline::CVQAInstance& instance, parse::OptionLabel claimed,
                                               const std::string& rationale, const pipeline::PromptLibrary& prompts);

/// Two judge calls (predicted, counterfactual). Parse failures throw
/// parse::ParseError; backend failures propagate.
CasRecord cas(const pipeline::CVQAInstance& instance, parse::OptionLabel predicted, const std::string& rationale,
              const Judge& judge, CounterfactualStrategy strategy, std::uint64_t seed,
              backend::Transcript* transcript = nullptr);

inline constexpr int kUsrClaims = 5;
inline constexpr const char* kPaddingClaim = "<NONE>";

struct ClaimRecord {
  int id = 0;
  std::string text;
  int unsupported = 0;

  bool padding() const { return text == kPaddingClaim; }
};

struct UsrRecord {
  double usr = 0.0;                    // #{u=1} / 5
  std::optional<double> usr_unpadded;  // #{u=1} / #real claims; none without real claims
  std::vector<ClaimRecord> claims;     // exactly 5
  std::optional<double> judge_reported_usr;
  bool judge_disagreed = false;
};

/// Validates the claim list, pads to five claims and recomputes USR from the
/// flags. More than five claims, or a padding claim flagged 1, is a parse error.
UsrRecord parse_usr(const std::string& judge_output);

std::vector<backend::ChatMessage> usr_messages(const pipeline::CVQAInstance& instance, const std::string& rationale,
                                               const pipeline::PromptLibrary& prompts);

UsrRecord usr(const pipeline::CVQAInstance& instance, const std::string& rationale, const Judge& judge,
              backend::Transcript* transcript = nullptr);

nlohmann::json to_json(const CasRecord& record);
nlohmann::json to_json(const UsrRecord& record);

}  // namespace mocot::metrics
