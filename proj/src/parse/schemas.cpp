#include "mocot/parse/schemas.hpp"

#include "mocot/parse/errors.hpp"
#include "text_util.hpp"

namespace mocot::parse {

using json = nlohmann::json;

std::string_view to_string(SubgoalType type) {
  switch (type) {
    case SubgoalType::visual:
      return "Visual";
    case SubgoalType::symbolic:
      return "Symbolic";
    case SubgoalType::narrative:
      return "Narrative";
  }
  return "Visual";
}

std::string_view to_string(TypeProvenance provenance) {
  return provenance == TypeProvenance::model_declared ? "model-declared" : "heuristic";
}

SubgoalType subgoal_type_from_string(std::string_view name) {
  const auto lowered = detail::lower(detail::trim(name));
  if (lowered == "visual") return SubgoalType::visual;
  if (lowered == "symbolic") return SubgoalType::symbolic;
  if (lowered == "narrative") return SubgoalType::narrative;
  throw ParseError(ParseError::Kind::ill_typed_field, "unknown subgoal type: " + std::string(name));
}

SubgoalType heuristic_subgoal_type(std::string_view question) {
  const auto lowered = detail::lower(question);
  const auto mentions = [&](std::initializer_list<std::string_view> words) {
    for (const auto word : words) {
      if (lowered.find(word) != std::string::npos) return true;
    }
    return false;
  };
  if (mentions({"symbol", "metaphor", "represent"})) return SubgoalType::symbolic;
  if (mentions({"panel", "story", "sequence", "before", "after"})) return SubgoalType::narrative;
  return SubgoalType::visual;
}

namespace {

void require_object(const json& value, std::string_view what) {
  if (!value.is_object()) {
    throw ParseError(ParseError::Kind::not_an_object, std::string(what) + " must be a JSON object", value.dump());
  }
}

std::string required_string(const json& value, const std::string& field, bool non_empty = true) {
  if (!value.contains(field)) {
    throw ParseError(ParseError::Kind::missing_field, "missing field '" + field + "'", value.dump());
  }
  const auto& item = value[field];
  if (!item.is_string()) {
    throw ParseError(ParseError::Kind::ill_typed_field, "field '" + field + "' must be a string", value.dump());
  }
  auto out = item.get<std::string>();
  if (non_empty && detail::trim(out).empty()) {
    throw ParseError(ParseError::Kind::missing_field, "field '" + field + "' is empty", value.dump());
  }
  return out;
}

std::string optional_string(const json& value, const std::string& field) {
  if (!value.contains(field) || value[field].is_null()) return {};
  if (!value[field].is_string()) {
    throw ParseError(ParseError::Kind::ill_typed_field, "field '" + field + "' must be a string", value.dump());
  }
  return value[field].get<std::string>();
}

}  // namespace

Plan parse_plan(const json& value) {
  require_object(value, "plan");
  Plan plan;
  plan.cot = required_string(value, "cot", false);
  if (!value.contains("sub_questions")) {
    throw ParseError(ParseError::Kind::missing_field, "missing field 'sub_questions'", value.dump());
  }
  const auto& list = value["sub_questions"];
  if (!list.is_array()) {
    throw ParseError(ParseError::Kind::ill_typed_field, "'sub_questions' must be an array", value.dump());
  }
  if (list.empty() || list.size() > kMaxSubQuestions) {
    throw ParseError(ParseError::Kind::arity,
                     "plan must have 1 to 4 sub-questions, got " + std::to_string(list.size()), value.dump());
  }
  for (const auto& item : list) {
    SubQuestion question;
    if (item.is_string()) {
      question.text = item.get<std::string>();
      question.type = heuristic_subgoal_type(question.text);
      question.provenance = TypeProvenance::heuristic;
    } else if (item.is_object()) {
      question.text = item.contains("question") ? required_string(item, "question") : required_string(item, "text");
      if (item.contains("type")) {
        question.type = subgoal_type_from_string(required_string(item, "type"));
        question.provenance = TypeProvenance::model_declared;
      } else {
        question.type = heuristic_subgoal_type(question.text);
      }
    } else {
      throw ParseError(ParseError::Kind::ill_typed_field, "sub-question must be a string or object", value.dump());
    }
    if (detail::trim(question.text).empty()) {
      throw ParseError(ParseError::Kind::missing_field, "empty sub-question", value.dump());
    }
    plan.sub_questions.push_back(std::move(question));
  }
  return plan;
}

SubResult parse_subresult(const json& value) {
  require_object(value, "sub-result");
  return {required_string(value, "cot"), required_string(value, "answer")};
}

MetaOutput parse_meta(const json& value) {
  require_object(value, "meta output");
  return {required_string(value, "cot1", false), required_string(value, "cot2"), required_string(value, "answer")};
}

CheckerVerdict parse_verdict(const json& value) {
  require_object(value, "checker verdict");
  const auto matched = required_string(value, "Matched Answer");
  if (!value.contains("Is Consistent")) {
    throw ParseError(ParseError::Kind::missing_field, "missing field 'Is Consistent'", value.dump());
  }
  const auto& consistent = value["Is Consistent"];
  bool is_consistent = false;
  if (consistent.is_boolean()) {
    is_consistent = consistent.get<bool>();
  } else if (consistent.is_string() && (detail::lower(consistent.get<std::string>()) == "true" ||
                                        detail::lower(consistent.get<std::string>()) == "false")) {
    is_consistent = detail::lower(consistent.get<std::string>()) == "true";
  } else {
    throw ParseError(ParseError::Kind::ill_typed_field, "'Is Consistent' must be a boolean", value.dump());
  }
  CheckerVerdict verdict;
  verdict.matched_answer = normalize_option_label(matched, letter_labels(26));
  verdict.is_consistent = is_consistent;
  verdict.justification = optional_string(value, "Justification");
  verdict.corrected_cot2 = optional_string(value, "Corrected CoT2");
  return verdict;
}

json to_json(const Plan& plan) {
  json questions = json::array();
  for (const auto& question : plan.sub_questions) {
    if (question.provenance == TypeProvenance::heuristic) {
      questions.push_back(question.text);
    } else {
      questions.push_back({{"question", question.text}, {"type", to_string(question.type)}});
    }
  }
  return {{"cot", plan.cot}, {"sub_questions", std::move(questions)}};
}

json to_json(const SubResult& result) { return {{"cot", result.cot}, {"answer", result.answer}}; }

json to_json(const MetaOutput& meta) { return {{"cot1", meta.cot1}, {"cot2", meta.cot2}, {"answer", meta.answer}}; }

json to_json(const CheckerVerdict& verdict) {
  return {{"Matched Answer", verdict.matched_answer.str()},
          {"Is Consistent", verdict.is_consistent},
          {"Justification", verdict.justification},
          {"Corrected CoT2", verdict.corrected_cot2}};
}

}  // namespace mocot::parse
