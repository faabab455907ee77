#pragma once

#include <string>
#include <vector>

#include "mocot/backend/backend.hpp"
#include "mocot/grpo/grpo.hpp"
#include "mocot/parse/option_label.hpp"
#include "mocot/reward/vera.hpp"

namespace mocot::grpo {

/// Synthetic multiple-choice task: each prompt has `options` labels and every
/// label can be emitted well-formed or with a stray preamble that breaks the
/// strict tag format. Template t is label t/2, malformed iff t is odd.
struct ToyTask {
  std::vector<std::string> prompt_ids;
  std::vector<parse::OptionLabel> gold;
  std::size_t options = 4;

  /// Four prompts whose gold labels are A, B, C, D.
  static ToyTask standard();

  std::size_t templates() const { return options * 2; }
  static parse::OptionLabel template_label(std::size_t t) { return parse::OptionLabel(static_cast<char>('A' + t / 2)); }
  static bool template_malformed(std::size_t t) { return t % 2 == 1; }
  static std::size_t template_of(parse::OptionLabel label, bool malformed) {
    return static_cast<std::size_t>(label.letter() - 'A') * 2 + (malformed ? 1 : 0);
  }
  std::string template_id(std::size_t t) const;
  std::string template_text(std::size_t prompt, std::size_t t) const;
  std::string reasoning(std::size_t prompt, parse::OptionLabel label) const;
  std::vector<pipeline::AnswerOption> answer_options() const;
};

/// Checker stand-in that reads "Final answer: X" and the first "option Y" in
/// the cot2 block of the checker message and answers in the checker format.
class RuleCheckerBackend : public backend::ChatBackend {
 protected:
  backend::ChatResponse do_complete(const std::vector<backend::ChatMessage>& messages,
                                    const backend::BackendConfig& config,
                                    const backend::CallOptions& options) override;
};

/// VERA total of every template, with r_l from `checker`.
RewardTable vera_reward_table(const ToyTask& task, const reward::VeraWeights& weights, backend::ChatBackend& checker,
                              const backend::BackendConfig& checker_config);

/// Every entry equal to `value`.
RewardTable constant_reward_table(const ToyTask& task, double value);

/// Outer/inner GRPO loop: per outer iteration π_ref ← π; per step π_old ← π,
/// G samples per prompt, then μ updates.
TrainingLog train_toy(const ToyTask& task, const GrpoConfig& config, const RewardTable& rewards);

}  // namespace mocot::grpo
