#include "mocot/pipeline/pipeline.hpp"

#include <algorithm>
#include <future>

#include "mocot/backend/errors.hpp"
#include "mocot/parse/json_extract.hpp"
#include "mocot/parse/tagged.hpp"

namespace mocot::pipeline {

using backend::ChatMessage;
using json = nlohmann::json;
using parse::ParseError;

PlannerVariant planner_variant_from_string(std::string_view name) {
  if (name == "verbatim") return PlannerVariant::verbatim;
  if (name == "typed") return PlannerVariant::typed;
  throw std::invalid_argument("unknown planner variant: " + std::string(name));
}

RetryMode retry_mode_from_string(std::string_view name) {
  if (name == "reinvoke-meta") return RetryMode::reinvoke_meta;
  if (name == "adopt-correction") return RetryMode::adopt_correction;
  throw std::invalid_argument("unknown retry mode: " + std::string(name));
}

DirectVariant direct_variant_from_string(std::string_view name) {
  if (name == "no-cot" || name == "direct-no-cot") return DirectVariant::no_cot;
  if (name == "cot" || name == "direct-cot") return DirectVariant::cot;
  if (name == "grpo-tagged") return DirectVariant::grpo_tagged;
  throw std::invalid_argument("unknown direct variant: " + std::string(name));
}

void validate(const StageConfig& config) {
  if (config.max_verify_retries < 0) throw std::invalid_argument("max_verify_retries must be >= 0");
  if (config.prompts == nullptr) throw std::invalid_argument("stage config has no prompt library");
  backend::validate(config.planner);
  backend::validate(config.executor);
  backend::validate(config.meta);
  backend::validate(config.checker);
  backend::validate(config.retry);
}

StageError::StageError(std::string stage, const std::string& message, std::string raw,
                       std::optional<parse::ParseError::Kind> parse_kind)
    : std::runtime_error(stage + ": " + message),
      stage_(std::move(stage)),
      raw_(std::move(raw)),
      parse_kind_(parse_kind) {}

std::string_view to_string(Termination termination) {
  return termination == Termination::checker_accepted ? "checker-accepted" : "budget-exhausted-checker-corrected";
}

json to_json(const MoCoTTrace& trace) {
  json steps = json::array();
  for (const auto& [question, result] : trace.sub_results) {
    steps.push_back({{"sub_question", question.text},
                     {"type", parse::to_string(question.type)},
                     {"type_provenance", parse::to_string(question.provenance)},
                     {"cot", result.cot},
                     {"answer", result.answer}});
  }
  json verdicts = json::array();
  for (const auto& verdict : trace.verdicts) verdicts.push_back(parse::to_json(verdict));
  return {{"id", trace.instance_id},
          {"plan", parse::to_json(trace.plan)},
          {"sub_results", std::move(steps)},
          {"dtr", trace.dtr},
          {"fir", trace.fir},
          {"answer", trace.answer.str()},
          {"verdicts", std::move(verdicts)},
          {"retries_used", trace.retries_used},
          {"termination", to_string(trace.termination)}};
}

std::string planner_user_text(const CVQAInstance& instance) { return render_question(instance); }

std::string executor_user_text(const parse::SubQuestion& sub_question) { return "Question: " + sub_question.text; }

std::string meta_user_text(const CVQAInstance& instance, const std::vector<SubStep>& sub_results,
                           const parse::CheckerVerdict* rejected) {
  std::string out = render_question(instance) + "\nSub-questions and sub-answers:\n";
  for (std::size_t i = 0; i < sub_results.size(); ++i) {
    const auto& [question, result] = sub_results[i];
    out += std::to_string(i + 1) + ". [" + std::string(parse::to_string(question.type)) + "] " + question.text + "\n";
    out += "   Answer: " + result.answer + "\n";
    out += "   Reasoning: " + result.cot + "\n";
  }
  if (rejected != nullptr) {
    out += "\nA logic checker rejected your previous final answer.\n";
    out += "Checker's matched answer: " + rejected->matched_answer.str() + "\n";
    out += "Checker's justification: " + rejected->justification + "\n";
    out += "Reconsider the sub-answers and give your final output in the same JSON format.\n";
  }
  return out;
}

std::string checker_user_text(const std::string& fir, parse::OptionLabel claimed,
                              const std::vector<AnswerOption>& options) {
  std::string out = "Options:\n";
  for (const auto& option : options) out += option.label.str() + ". " + option.text + "\n";
  out += "Final answer: " + claimed.str() + "\n";
  out += "cot2:\n" + fir;
  return out;
}

std::vector<ChatMessage> planner_messages(const CVQAInstance& instance, const StageConfig& config) {
  const char* name = config.planner_variant == PlannerVariant::typed ? "planner_typed" : "planner_verbatim";
  return {ChatMessage::system(config.prompts->get(name)), ChatMessage::user(planner_user_text(instance), instance.image)};
}

std::vector<ChatMessage> executor_messages(const CVQAInstance& instance, const parse::SubQuestion& sub_question,
                                           const StageConfig& config) {
  return {ChatMessage::system(config.prompts->get("executor")),
          ChatMessage::user(executor_user_text(sub_question), instance.image)};
}

std::vector<ChatMessage> meta_messages(const CVQAInstance& instance, const std::vector<SubStep>& sub_results,
                                       const parse::CheckerVerdict* rejected, const StageConfig& config) {
  return {ChatMessage::system(config.prompts->get("meta")),
          ChatMessage::user(meta_user_text(instance, sub_results, rejected), instance.image)};
}

std::vector<ChatMessage> checker_messages(const std::string& fir, parse::OptionLabel claimed,
                                          const std::vector<AnswerOption>& options, const StageConfig& config) {
  return {ChatMessage::system(config.prompts->get("checker")),
          ChatMessage::user(checker_user_text(fir, claimed, options))};
}

namespace {

// Runs `parse` on the model text; parse errors are re-raised with the text attached.
template <typename Parse>
auto parse_reply(const std::string& text, Parse parse) {
  try {
    return parse(text);
  } catch (const ParseError& error) {
    throw ParseError(error.kind(), error.what(), text);
  } catch (const json::exception& error) {
    throw ParseError(ParseError::Kind::ill_typed_field, error.what(), text);
  }
}

std::string ask(backend::ChatBackend& backend, const std::vector<ChatMessage>& messages,
                const backend::BackendConfig& config, const backend::RetryPolicy& retry, std::string_view stage,
                backend::Transcript* transcript) {
  return backend::call_logged(backend, messages, config, retry, stage, transcript).text;
}

template <typename Fn>
auto in_stage(const char* stage, Fn fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ParseError& error) {
    throw StageError(stage, error.what(), error.raw(), error.kind());
  } catch (const std::exception& error) {
    throw StageError(stage, error.what());
  }
}

}  // namespace

parse::Plan plan(const CVQAInstance& instance, backend::ChatBackend& backend, const StageConfig& config,
                 backend::Transcript* transcript) {
  const auto text =
      ask(backend, planner_messages(instance, config), config.planner, config.retry, "planner", transcript);
  return parse_reply(text, [](const std::string& raw) {
    return parse::parse_plan(parse::extract_fenced_json(raw).value);
  });
}

parse::SubResult execute(const CVQAInstance& instance, const parse::SubQuestion& sub_question,
                         backend::ChatBackend& backend, const StageConfig& config, backend::Transcript* transcript) {
  const auto text = ask(backend, executor_messages(instance, sub_question, config), config.executor, config.retry,
                        "executor", transcript);
  return parse_reply(text, [](const std::string& raw) {
    return parse::parse_subresult(parse::extract_fenced_json(raw).value);
  });
}

parse::MetaOutput meta_reason(const CVQAInstance& instance, const std::vector<SubStep>& sub_results,
                              backend::ChatBackend& backend, const StageConfig& config,
                              const parse::CheckerVerdict* rejected, backend::Transcript* transcript) {
  const auto text = ask(backend, meta_messages(instance, sub_results, rejected, config), config.meta, config.retry,
                        "meta", transcript);
  return parse_reply(text, [&](const std::string& raw) {
    auto meta = parse::parse_meta(parse::extract_fenced_json(raw).value);
    meta.answer = parse::normalize_option_label(meta.answer, instance.labels()).str();
    return meta;
  });
}

parse::CheckerVerdict verify(const std::string& fir, parse::OptionLabel claimed,
                             const std::vector<AnswerOption>& options, backend::ChatBackend& backend,
                             const StageConfig& config, backend::Transcript* transcript) {
  if (fir.empty()) throw std::invalid_argument("cannot verify an empty final inference rationale");
  const auto text = ask(backend, checker_messages(fir, claimed, options, config), config.checker, config.retry,
                        "checker", transcript);
  std::vector<parse::OptionLabel> labels;
  for (const auto& option : options) labels.push_back(option.label);
  return parse_reply(text, [&](const std::string& raw) {
    auto verdict = parse::parse_verdict(parse::extract_fenced_json(raw).value);
    if (std::find(labels.begin(), labels.end(), verdict.matched_answer) == labels.end()) {
      throw ParseError(ParseError::Kind::label_not_in_options,
                       "checker matched answer " + verdict.matched_answer.str() + " is not an option", raw);
    }
    return verdict;
  });
}

MoCoTTrace run_pipeline(const CVQAInstance& instance, backend::ChatBackend& backend, const StageConfig& config,
                        backend::Transcript* transcript) {
  in_stage("config", [&] {
    validate(instance);
    validate(config);
    if (instance.mode != AnswerMode::mcq) throw std::invalid_argument("the pipeline needs a multiple-choice instance");
    return 0;
  });

  MoCoTTrace trace;
  trace.instance_id = instance.id;
  trace.plan = in_stage("planner", [&] { return plan(instance, backend, config, transcript); });

  if (config.concurrent_executors) {
    // Each executor logs to its own transcript so the merged order stays the plan order.
    std::vector<backend::Transcript> logs(trace.plan.sub_questions.size());
    std::vector<std::future<parse::SubResult>> pending;
    for (std::size_t i = 0; i < trace.plan.sub_questions.size(); ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return execute(instance, trace.plan.sub_questions[i], backend, config, transcript ? &logs[i] : nullptr);
      }));
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
      auto result = in_stage("executor", [&] { return pending[i].get(); });
      trace.sub_results.emplace_back(trace.plan.sub_questions[i], std::move(result));
    }
    if (transcript != nullptr) {
      for (auto& log : logs) transcript->insert(transcript->end(), log.begin(), log.end());
    }
  } else {
    for (const auto& question : trace.plan.sub_questions) {
      auto result = in_stage("executor", [&] { return execute(instance, question, backend, config, transcript); });
      trace.sub_results.emplace_back(question, std::move(result));
    }
  }

  auto meta = in_stage("meta", [&] { return meta_reason(instance, trace.sub_results, backend, config, nullptr, transcript); });
  trace.dtr = meta.cot1;
  trace.fir = meta.cot2;
  trace.answer = parse::OptionLabel(meta.answer.front());

  for (int attempt = 0;; ++attempt) {
    auto verdict = in_stage("checker", [&] {
      return verify(trace.fir, trace.answer, instance.options, backend, config, transcript);
    });
    trace.verdicts.push_back(verdict);
    trace.retries_used = attempt;
    if (verdict.matched_answer == trace.answer && verdict.is_consistent) {
      trace.termination = Termination::checker_accepted;
      return trace;
    }
    if (attempt == config.max_verify_retries || config.retry_mode == RetryMode::adopt_correction) {
      trace.answer = verdict.matched_answer;
      if (!verdict.corrected_cot2.empty()) trace.fir = verdict.corrected_cot2;
      if (attempt == config.max_verify_retries) {
        trace.termination = Termination::budget_exhausted_checker_corrected;
        return trace;
      }
      continue;
    }
    meta = in_stage("meta", [&] {
      return meta_reason(instance, trace.sub_results, backend, config, &trace.verdicts.back(), transcript);
    });
    trace.dtr = meta.cot1;
    trace.fir = meta.cot2;
    trace.answer = parse::OptionLabel(meta.answer.front());
  }
}

DirectResult run_direct(const CVQAInstance& instance, backend::ChatBackend& backend,
                        const backend::BackendConfig& config, DirectVariant variant, const backend::RetryPolicy& retry,
                        const PromptLibrary& prompts, backend::Transcript* transcript) {
  validate(instance);
  const bool open = instance.mode == AnswerMode::open_ended;
  if (open && variant != DirectVariant::grpo_tagged) {
    throw std::invalid_argument("open-ended instances need the grpo-tagged variant");
  }
  const char* prompt = open                                  ? "memecap"
                       : variant == DirectVariant::no_cot    ? "eval_no_cot"
                       : variant == DirectVariant::cot       ? "eval_cot"
                                                             : "grpo_mcq";
  const std::vector<ChatMessage> messages = {ChatMessage::system(prompts.get(prompt)),
                                             ChatMessage::user(render_question(instance), instance.image)};
  const auto text = ask(backend, messages, config, retry, "direct", transcript);

  return parse_reply(text, [&](const std::string& raw) {
    DirectResult result;
    if (variant == DirectVariant::grpo_tagged) {
      const auto tagged = parse::parse_tagged_output(raw, parse::TagMode::lenient);
      result.rationale = tagged.reasoning;
      result.answer = open ? tagged.answer : parse::normalize_option_label(tagged.answer, instance.labels()).str();
      return result;
    }
    const auto value = parse::extract_fenced_json(raw).value;
    if (!value.contains("answer")) throw ParseError(ParseError::Kind::missing_field, "missing field 'answer'", raw);
    const auto& answer = value["answer"];
    std::string label;
    if (answer.is_string()) {
      label = answer.get<std::string>();
    } else if (answer.is_array() && answer.size() == 1 && answer[0].is_string()) {
      label = answer[0].get<std::string>();
    } else {
      throw ParseError(ParseError::Kind::ill_typed_field, "answer must be a label or a one-label list", raw);
    }
    result.answer = parse::normalize_option_label(label, instance.labels()).str();
    if (variant == DirectVariant::cot) {
      if (!value.contains("cot") || !value["cot"].is_string()) {
        throw ParseError(ParseError::Kind::missing_field, "missing field 'cot'", raw);
      }
      result.rationale = value["cot"].get<std::string>();
    }
    return result;
  });
}

}  // namespace mocot::pipeline
