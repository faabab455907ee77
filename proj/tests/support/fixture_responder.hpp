#pragma once

// Rule-based stand-in for every model role. It only exists to generate the
// recorded mock scripts under tests/fixtures; the tests themselves replay the
// scripts through MockBackend.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"
#include "mocot/pipeline/prompts.hpp"

namespace fixtures {

struct Scenario {
  std::vector<std::string> sub_questions;
  bool typed_plan = false;
  bool prose_plan = false;      // planner wraps its JSON in unfenced prose
  std::string first_answer;     // meta answer on the first pass, as the model writes it
  char retry_answer = 0;        // meta answer after a rejection
  char reject_first_with = 0;   // checker rejects the first answer, matching this label
  bool always_reject = false;   // checker never accepts
  char direct_answer = 'A';
  std::vector<int> usr_flags;   // judge flags for the rationale; fewer than 5 means padding
  bool vague_rationale = false; // rationale also supports the next option
};

/// The five fixture comics, keyed by the id embedded in their question text.
inline const std::map<std::string, Scenario>& scenarios() {
  static const std::map<std::string, Scenario> table = {
      {"comic-01",
       {{"What is the man in comic-01 holding?", "What does the sign in comic-01 say?"}, false, false, "A", 0, 0,
        false, 'A', {0, 0, 0, 0, 0}, false}},
      {"comic-02",
       {{"Which character in comic-02 speaks first?", "What does the umbrella in comic-02 represent?",
         "What happens in the last panel of comic-02?"},
        false, false, "A", 'B', 'B', false, 'C', {1, 0, 0, 1, 0}, false}},
      {"comic-03",
       {{"What is drawn on the wall in comic-03?", "What changes between the panels of comic-03?"}, false, false,
        "C", 'C', 'D', true, 'A', {0, 1, 0}, true}},
      {"comic-04",
       {{"What is the cat in comic-04 doing?", "What does the clock symbolize in comic-04?",
         "What is the setting of comic-04?"},
        true, false, "(c)", 0, 0, false, 'D', {1, 1, 0, 0, 0}, false}},
      {"comic-05", {{"What is the caption of comic-05?"}, false, true, "B", 0, 0, false, 'B', {0, 0, 1, 0, 0}, false}},
  };
  return table;
}

inline std::string text_of(const std::vector<mocot::backend::ChatMessage>& messages, mocot::backend::Role role) {
  std::string out;
  for (const auto& message : messages) {
    if (message.role != role) continue;
    for (const auto& part : message.parts) {
      if (part.kind() == mocot::backend::ContentPart::Kind::text) out += part.text();
    }
  }
  return out;
}

inline std::string fenced(const nlohmann::json& value) { return "```json\n" + value.dump(2) + "\n```"; }

inline std::string rationale_for(const std::string& id, char label, bool vague) {
  std::string text = "In " + id + " the panels and caption point to option " + std::string(1, label) + ".";
  if (vague) text += " The same details could fit option " + std::string(1, static_cast<char>(label == 'D' ? 'A' : label + 1)) + ".";
  return text;
}

class Responder : public mocot::backend::ChatBackend {
 protected:
  mocot::backend::ChatResponse do_complete(const std::vector<mocot::backend::ChatMessage>& messages,
                                           const mocot::backend::BackendConfig&,
                                           const mocot::backend::CallOptions&) override {
    using mocot::backend::Role;
    const auto system = text_of(messages, Role::system);
    const auto user = text_of(messages, Role::user);
    std::string id;
    const Scenario* scenario = nullptr;
    for (const auto& [key, value] : scenarios()) {
      if (user.find(key) != std::string::npos) {
        id = key;
        scenario = &value;
      }
    }
    if (scenario == nullptr) throw std::runtime_error("no fixture scenario matches the request");
    return {reply(prompt_name(system), id, *scenario, user), mocot::backend::FinishReason::stop, std::nullopt};
  }

 private:
  static std::string prompt_name(const std::string& system) {
    const auto& prompts = mocot::pipeline::PromptLibrary::builtin();
    for (const auto& name : prompts.names()) {
      if (prompts.get(name) == system) return name;
    }
    throw std::runtime_error("unknown system prompt");
  }

  static char claimed_in(const std::string& user, const std::string& marker) {
    const auto at = user.find(marker);
    if (at == std::string::npos) throw std::runtime_error("missing '" + marker + "'");
    return user[at + marker.size()];
  }

  static std::string reply(const std::string& prompt, const std::string& id, const Scenario& s,
                           const std::string& user) {
    using nlohmann::json;
    if (prompt == "planner_verbatim" || prompt == "planner_typed") {
      json questions = json::array();
      for (const auto& q : s.sub_questions) {
        if (s.typed_plan && prompt == "planner_typed") {
          questions.push_back({{"question", q}, {"type", q.find("symbol") != std::string::npos ? "Symbolic" : "Visual"}});
        } else {
          questions.push_back(q);
        }
      }
      const json plan = {{"cot", "Break " + id + " into what is drawn and what it means."}, {"sub_questions", questions}};
      return s.prose_plan ? "Here is my plan: " + plan.dump() + " Hope that helps." : fenced(plan);
    }
    if (prompt == "executor") {
      const auto question = user.substr(user.find("Question: ") + 10);
      return fenced({{"cot", "Looking closely at the image for: " + question}, {"answer", "Answer to " + question}});
    }
    if (prompt == "meta") {
      const bool rejected = user.find("A logic checker rejected") != std::string::npos;
      const std::string answer = rejected ? std::string(1, s.retry_answer) : s.first_answer;
      const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(answer[answer.size() == 1 ? 0 : 1])));
      return fenced({{"cot1", "The sub-answers for " + id + " are consistent with each other."},
                     {"cot2", rationale_for(id, letter, s.vague_rationale)},
                     {"answer", answer}});
    }
    if (prompt == "checker") {
      const char claimed = claimed_in(user, "Final answer: ");
      json verdict;
      if (s.always_reject || (s.reject_first_with != 0 && claimed != s.reject_first_with)) {
        const char matched = s.reject_first_with;
        verdict = {{"Matched Answer", std::string(1, matched)},
                   {"Is Consistent", false},
                   {"Justification", "The reasoning for " + id + " actually supports option " + std::string(1, matched) + "."},
                   {"Corrected CoT2", s.always_reject ? rationale_for(id, matched, s.vague_rationale) : ""}};
      } else {
        verdict = {{"Matched Answer", std::string(1, claimed)},
                   {"Is Consistent", true},
                   {"Justification", "The reasoning supports the final answer."},
                   {"Corrected CoT2", ""}};
      }
      return fenced(verdict);
    }
    if (prompt == "eval_no_cot") return fenced({{"answer", {std::string(1, s.direct_answer)}}});
    if (prompt == "eval_cot") {
      return fenced({{"cot", rationale_for(id, s.direct_answer, false)}, {"answer", std::string(1, s.direct_answer)}});
    }
    if (prompt == "grpo_mcq") {
      return "<REASONING>" + rationale_for(id, s.direct_answer, false) + "</REASONING><ANSWER>" +
             std::string(1, s.direct_answer) + "</ANSWER>";
    }
    if (prompt == "judge_cas") {
      const char claimed = claimed_in(user, "Claimed answer: ");
      const auto rationale = user.substr(user.find("Rationale:\n") + 11);
      const bool entails = rationale.find("option " + std::string(1, claimed)) != std::string::npos;
      return fenced({{"entails", entails},
                     {"confidence", entails ? 0.9 : 0.2},
                     {"support_spans", entails ? json::array({"option " + std::string(1, claimed)}) : json::array()},
                     {"counter_spans", json::array()}});
    }
    if (prompt == "judge_usr") {
      json claims = json::array();
      int flagged = 0;
      for (std::size_t i = 0; i < s.usr_flags.size(); ++i) {
        claims.push_back({{"id", i + 1}, {"t", "claim " + std::to_string(i + 1) + " about " + id}, {"u", s.usr_flags[i]}});
        flagged += s.usr_flags[i];
      }
      return fenced({{"claims", claims}, {"USR", flagged / 5.0}});
    }
    throw std::runtime_error("fixture responder does not handle prompt " + prompt);
  }
};

}  // namespace fixtures
