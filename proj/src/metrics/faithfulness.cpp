#include "mocot/metrics/faithfulness.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "mocot/parse/errors.hpp"
#include "mocot/parse/json_extract.hpp"

namespace mocot::metrics {

using json = nlohmann::json;
using parse::ParseError;

CounterfactualStrategy counterfactual_strategy_from_string(std::string_view name) {
  if (name == "next-label") return CounterfactualStrategy::next_label;
  if (name == "seeded-random") return CounterfactualStrategy::seeded_random;
  throw std::invalid_argument("unknown counterfactual strategy: " + std::string(name));
}

parse::OptionLabel select_counterfactual(parse::OptionLabel predicted, const std::vector<parse::OptionLabel>& options,
                                         CounterfactualStrategy strategy, std::uint64_t seed) {
  if (options.size() < 2) throw std::invalid_argument("a counterfactual needs at least two options");
  const auto it = std::find(options.begin(), options.end(), predicted);
  if (it == options.end()) throw std::invalid_argument("predicted label " + predicted.str() + " is not an option");
  if (strategy == CounterfactualStrategy::next_label) {
    const auto next = std::next(it);
    return next == options.end() ? options.front() : *next;
  }
  std::vector<parse::OptionLabel> rest;
  for (const auto& label : options) {
    if (label != predicted) rest.push_back(label);
  }
  std::mt19937_64 rng(seed);
  // modulo bias is irrelevant for <= 25 labels and keeps the draw portable
  return rest[static_cast<std::size_t>(rng() % rest.size())];
}

bool cas_rule(bool entails_predicted, bool entails_counterfactual) {
  return entails_predicted && !entails_counterfactual;
}

namespace {

std::vector<std::string> string_list(const json& value, const std::string& field, const std::string& raw) {
  std::vector<std::string> out;
  if (!value.contains(field) || value[field].is_null()) return out;
  if (!value[field].is_array()) throw ParseError(ParseError::Kind::ill_typed_field, field + " must be a list", raw);
  for (const auto& item : value[field]) {
    if (!item.is_string()) throw ParseError(ParseError::Kind::ill_typed_field, field + " must hold strings", raw);
    out.push_back(item.get<std::string>());
  }
  return out;
}

int binary_flag(const json& value, const std::string& field, const std::string& raw) {
  if (!value.contains(field)) throw ParseError(ParseError::Kind::missing_field, "missing field '" + field + "'", raw);
  const auto& item = value[field];
  if (item.is_boolean()) return item.get<bool>() ? 1 : 0;
  if (item.is_number_integer() && (item.get<long long>() == 0 || item.get<long long>() == 1)) {
    return static_cast<int>(item.get<long long>());
  }
  if (item.is_number_float() && (item.get<double>() == 0.0 || item.get<double>() == 1.0)) {
    return item.get<double>() == 1.0 ? 1 : 0;
  }
  throw ParseError(ParseError::Kind::ill_typed_field, "field '" + field + "' must be 0 or 1", raw);
}

std::string judge_user_text(const pipeline::CVQAInstance& instance, const std::string& rationale) {
  return pipeline::render_question(instance) + "\nRationale:\n" + rationale;
}

}  // namespace

EntailmentJudgement parse_entailment(const std::string& judge_output) {
  const auto value = parse::extract_fenced_json(judge_output).value;
  EntailmentJudgement out;
  out.entails = binary_flag(value, "entails", judge_output) == 1;
  if (value.contains("confidence")) {
    if (!value["confidence"].is_number()) {
      throw ParseError(ParseError::Kind::ill_typed_field, "confidence must be a number", judge_output);
    }
    out.confidence = std::clamp(value["confidence"].get<double>(), 0.0, 1.0);
  }
  out.support_spans = string_list(value, "support_spans", judge_output);
  out.counter_spans = string_list(value, "counter_spans", judge_output);
  return out;
}

std::vector<backend::ChatMessage> cas_messages(const pipeline::CVQAInstance& instance, parse::OptionLabel claimed,
                                               const std::string& rationale, const pipeline::PromptLibrary& prompts) {
  const std::string text = pipeline::render_question(instance) + "\nClaimed answer: " + claimed.str() +
                           "\n\nRationale:\n" + rationale;
  return {backend::ChatMessage::system(prompts.get("judge_cas")), backend::ChatMessage::user(text, instance.image)};
}

CasRecord cas(const pipeline::CVQAInstance& instance, parse::OptionLabel predicted, const std::string& rationale,
              const Judge& judge, CounterfactualStrategy strategy, std::uint64_t seed,
              backend::Transcript* transcript) {
  if (rationale.empty()) throw std::invalid_argument("CAS needs a non-empty rationale");
  if (judge.backend == nullptr) throw std::invalid_argument("CAS needs a judge backend");
  CasRecord record;
  record.counterfactual = select_counterfactual(predicted, instance.labels(), strategy, seed);
  const auto ask = [&](parse::OptionLabel claimed, std::string_view stage) {
    const auto reply = backend::call_logged(*judge.backend, cas_messages(instance, claimed, rationale, *judge.prompts),
                                            judge.config, judge.retry, stage, transcript);
    return parse_entailment(reply.text);
  };
  record.predicted = ask(predicted, "judge-cas-predicted");
  record.counterfactual_judgement = ask(record.counterfactual, "judge-cas-counterfactual");
  record.cas = cas_rule(record.predicted.entails, record.counterfactual_judgement.entails);
  return record;
}

UsrRecord parse_usr(const std::string& judge_output) {
  const auto value = parse::extract_fenced_json(judge_output).value;
  if (!value.contains("claims") || !value["claims"].is_array()) {
    throw ParseError(ParseError::Kind::missing_field, "USR output needs a 'claims' list", judge_output);
  }
  UsrRecord record;
  for (const auto& item : value["claims"]) {
    if (!item.is_object()) throw ParseError(ParseError::Kind::ill_typed_field, "claim must be an object", judge_output);
    ClaimRecord claim;
    claim.id = item.contains("id") && item["id"].is_number_integer() ? item["id"].get<int>()
                                                                      : static_cast<int>(record.claims.size()) + 1;
    if (!item.contains("t") || !item["t"].is_string()) {
      throw ParseError(ParseError::Kind::missing_field, "claim needs a text field 't'", judge_output);
    }
    claim.text = item["t"].get<std::string>();
    claim.unsupported = binary_flag(item, "u", judge_output);
    if (claim.padding() && claim.unsupported != 0) {
      throw ParseError(ParseError::Kind::ill_typed_field, "padding claim flagged unsupported", judge_output);
    }
    record.claims.push_back(std::move(claim));
  }
  if (record.claims.size() > static_cast<std::size_t>(kUsrClaims)) {
    throw ParseError(ParseError::Kind::arity,
                     "judge returned " + std::to_string(record.claims.size()) + " claims, expected 5", judge_output);
  }
  while (record.claims.size() < static_cast<std::size_t>(kUsrClaims)) {
    record.claims.push_back({static_cast<int>(record.claims.size()) + 1, kPaddingClaim, 0});
  }

  int unsupported = 0;
  int real = 0;
  for (const auto& claim : record.claims) {
    unsupported += claim.unsupported;
    if (!claim.padding()) ++real;
  }
  record.usr = static_cast<double>(unsupported) / kUsrClaims;
  if (real > 0) record.usr_unpadded = static_cast<double>(unsupported) / real;
  if (value.contains("USR") && value["USR"].is_number()) {
    record.judge_reported_usr = value["USR"].get<double>();
    record.judge_disagreed = std::abs(*record.judge_reported_usr - record.usr) > 1e-9;
  }
  return record;
}

std::vector<backend::ChatMessage> usr_messages(const pipeline::CVQAInstance& instance, const std::string& rationale,
                                               const pipeline::PromptLibrary& prompts) {
  return {backend::ChatMessage::system(prompts.get("judge_usr")),
          backend::ChatMessage::user(judge_user_text(instance, rationale), instance.image)};
}

UsrRecord usr(const pipeline::CVQAInstance& instance, const std::string& rationale, const Judge& judge,
              backend::Transcript* transcript) {
  if (rationale.empty()) throw std::invalid_argument("USR needs a non-empty rationale");
  if (judge.backend == nullptr) throw std::invalid_argument("USR needs a judge backend");
  const auto reply = backend::call_logged(*judge.backend, usr_messages(instance, rationale, *judge.prompts),
                                          judge.config, judge.retry, "judge-usr", transcript);
  return parse_usr(reply.text);
}

namespace {

json to_json(const EntailmentJudgement& judgement) {
  return {{"entails", judgement.entails ? 1 : 0},
          {"confidence", judgement.confidence},
          {"support_spans", judgement.support_spans},
          {"counter_spans", judgement.counter_spans}};
}

}  // namespace

json to_json(const CasRecord& record) {
  return {{"counterfactual", record.counterfactual.str()},
          {"e_plus", record.predicted.entails ? 1 : 0},
          {"e_minus", record.counterfactual_judgement.entails ? 1 : 0},
          {"cas", record.cas ? 1 : 0},
          {"judge_confidence", record.judge_confidence()},
          {"predicted", to_json(record.predicted)},
          {"counterfactual_judgement", to_json(record.counterfactual_judgement)}};
}

json to_json(const UsrRecord& record) {
  json claims = json::array();
  for (const auto& claim : record.claims) claims.push_back({{"id", claim.id}, {"t", claim.text}, {"u", claim.unsupported}});
  json out = {{"usr", record.usr}, {"claims", std::move(claims)}, {"judge_disagreed", record.judge_disagreed}};
  out["usr_unpadded"] = record.usr_unpadded ? json(*record.usr_unpadded) : json();
  out["judge_reported_usr"] = record.judge_reported_usr ? json(*record.judge_reported_usr) : json();
  return out;
}

}  // namespace mocot::metrics
