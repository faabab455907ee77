#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/parse/option_label.hpp"

namespace mocot::parse {

enum class SubgoalType { visual, symbolic, narrative };
enum class TypeProvenance { model_declared, heuristic };

std::string_view to_string(SubgoalType type);
std::string_view to_string(TypeProvenance provenance);
/// "Visual"/"visual" etc. Throws ParseError(ill_typed_field).
SubgoalType subgoal_type_from_string(std::string_view name);

/// Keyword rule for untyped plans: symbol/metaphor/represent → Symbolic;
/// panel/story/sequence/before/after → Narrative; otherwise Visual.
SubgoalType heuristic_subgoal_type(std::string_view question);

struct SubQuestion {
  std::string text;
  SubgoalType type = SubgoalType::visual;
  TypeProvenance provenance = TypeProvenance::heuristic;

  friend bool operator==(const SubQuestion&, const SubQuestion&) = default;
};

inline constexpr std::size_t kMaxSubQuestions = 4;

struct Plan {
  std::string cot;
  std::vector<SubQuestion> sub_questions;

  friend bool operator==(const Plan&, const Plan&) = default;
};

struct SubResult {
  std::string cot;
  std::string answer;

  friend bool operator==(const SubResult&, const SubResult&) = default;
};

struct MetaOutput {
  std::string cot1;  // diagnostic rationale
  std::string cot2;  // final inference rationale
  std::string answer;

  friend bool operator==(const MetaOutput&, const MetaOutput&) = default;
};

struct CheckerVerdict {
  OptionLabel matched_answer{'A'};
  bool is_consistent = false;
  std::string justification;
  std::string corrected_cot2;

  friend bool operator==(const CheckerVerdict&, const CheckerVerdict&) = default;
};

/// {"cot", "sub_questions": [string | {"question", "type"}]}; 1..4 entries.
Plan parse_plan(const nlohmann::json& value);
SubResult parse_subresult(const nlohmann::json& value);
MetaOutput parse_meta(const nlohmann::json& value);
/// Field names as printed by the checker prompt ("Matched Answer", ...).
CheckerVerdict parse_verdict(const nlohmann::json& value);

nlohmann::json to_json(const Plan& plan);
nlohmann::json to_json(const SubResult& result);
nlohmann::json to_json(const MetaOutput& meta);
nlohmann::json to_json(const CheckerVerdict& verdict);

}  // namespace mocot::parse
