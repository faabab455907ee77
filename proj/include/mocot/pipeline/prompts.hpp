#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mocot::pipeline {

/// System prompts for every stage, judge and baseline, keyed by asset name
/// (planner_verbatim, planner_typed, executor, meta, checker, grpo_mcq,
/// memecap, eval_no_cot, eval_cot, judge_cas, judge_usr).
class PromptLibrary {
 public:
  /// The prompts compiled into the binary from prompts/*.txt.
  static const PromptLibrary& builtin();

  /// Reads every *.txt file of `dir`; names missing there fall back to builtin().
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  const std::string& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string, std::less<>> prompts_;
};

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompts();
}

}  // namespace mocot::pipeline
