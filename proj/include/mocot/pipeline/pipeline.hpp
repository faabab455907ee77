#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"
#include "mocot/backend/transcript.hpp"
#include "mocot/parse/errors.hpp"
#include "mocot/parse/schemas.hpp"
#include "mocot/pipeline/instance.hpp"
#include "mocot/pipeline/prompts.hpp"

namespace mocot::pipeline {

enum class PlannerVariant { verbatim, typed };

/// What a rejected verdict triggers: a fresh Step-3 pass that sees the
/// checker's justification, or adopting the checker's own correction.
enum class RetryMode { reinvoke_meta, adopt_correction };

PlannerVariant planner_variant_from_string(std::string_view name);
RetryMode retry_mode_from_string(std::string_view name);

struct StageConfig {
  backend::BackendConfig planner;
  backend::BackendConfig executor;
  backend::BackendConfig meta;
  backend::BackendConfig checker;
  int max_verify_retries = 3;
  PlannerVariant planner_variant = PlannerVariant::verbatim;
  RetryMode retry_mode = RetryMode::reinvoke_meta;
  backend::RetryPolicy retry;
  bool concurrent_executors = false;
  const PromptLibrary* prompts = &PromptLibrary::builtin();
};

/// Throws std::invalid_argument.
void validate(const StageConfig& config);

/// Per-stage failure raised by run_pipeline.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message, std::string raw = {},
             std::optional<parse::ParseError::Kind> parse_kind = std::nullopt);
  const std::string& stage() const { return stage_; }
  const std::string& raw() const { return raw_; }
  std::optional<parse::ParseError::Kind> parse_kind() const { return parse_kind_; }

 private:
  std::string stage_;
  std::string raw_;
  std::optional<parse::ParseError::Kind> parse_kind_;
};

enum class Termination { checker_accepted, budget_exhausted_checker_corrected };

std::string_view to_string(Termination termination);

using SubStep = std::pair<parse::SubQuestion, parse::SubResult>;

struct MoCoTTrace {
  std::string instance_id;
  parse::Plan plan;
  std::vector<SubStep> sub_results;
  std::string dtr;
  std::string fir;
  parse::OptionLabel answer{'A'};
  std::vector<parse::CheckerVerdict> verdicts;
  int retries_used = 0;
  Termination termination = Termination::checker_accepted;
};

nlohmann::json to_json(const MoCoTTrace& trace);

// User-message text of each stage. The planner, executor and meta messages
// also carry the instance image.
std::string planner_user_text(const CVQAInstance& instance);
std::string executor_user_text(const parse::SubQuestion& sub_question);
std::string meta_user_text(const CVQAInstance& instance, const std::vector<SubStep>& sub_results,
                           const parse::CheckerVerdict* rejected);
std::string checker_user_text(const std::string& fir, parse::OptionLabel claimed,
                              const std::vector<AnswerOption>& options);

std::vector<backend::ChatMessage> planner_messages(const CVQAInstance& instance, const StageConfig& config);
std::vector<backend::ChatMessage> executor_messages(const CVQAInstance& instance, const parse::SubQuestion& sub_question,
                                                    const StageConfig& config);
std::vector<backend::ChatMessage> meta_messages(const CVQAInstance& instance, const std::vector<SubStep>& sub_results,
                                                const parse::CheckerVerdict* rejected, const StageConfig& config);
std::vector<backend::ChatMessage> checker_messages(const std::string& fir, parse::OptionLabel claimed,
                                                   const std::vector<AnswerOption>& options,
                                                   const StageConfig& config);

// Single stages. Backend errors propagate; parse failures throw
// parse::ParseError carrying the raw model text.
parse::Plan plan(const CVQAInstance& instance, backend::ChatBackend& backend, const StageConfig& config,
                 backend::Transcript* transcript = nullptr);
parse::SubResult execute(const CVQAInstance& instance, const parse::SubQuestion& sub_question,
                         backend::ChatBackend& backend, const StageConfig& config,
                         backend::Transcript* transcript = nullptr);
/// The returned answer is the normalized option label.
parse::MetaOutput meta_reason(const CVQAInstance& instance, const std::vector<SubStep>& sub_results,
                              backend::ChatBackend& backend, const StageConfig& config,
                              const parse::CheckerVerdict* rejected = nullptr,
                              backend::Transcript* transcript = nullptr);
parse::CheckerVerdict verify(const std::string& fir, parse::OptionLabel claimed,
                             const std::vector<AnswerOption>& options, backend::ChatBackend& backend,
                             const StageConfig& config, backend::Transcript* transcript = nullptr);

/// Plan, execute every sub-question, then meta-reason and verify until the
/// checker accepts or the retry budget runs out. Multiple-choice only.
/// Failures surface as StageError.
MoCoTTrace run_pipeline(const CVQAInstance& instance, backend::ChatBackend& backend, const StageConfig& config,
                        backend::Transcript* transcript = nullptr);

enum class DirectVariant { no_cot, cot, grpo_tagged };

DirectVariant direct_variant_from_string(std::string_view name);

struct DirectResult {
  std::string answer;  // option label, or free text for open-ended instances
  std::optional<std::string> rationale;
};

/// One-call baseline. Open-ended instances require grpo_tagged and use the
/// cue/intent prompt.
DirectResult run_direct(const CVQAInstance& instance, backend::ChatBackend& backend,
                        const backend::BackendConfig& config, DirectVariant variant,
                        const backend::RetryPolicy& retry = {}, const PromptLibrary& prompts = PromptLibrary::builtin(),
                        backend::Transcript* transcript = nullptr);

}  // namespace mocot::pipeline
