#include "mocot/pipeline/instance.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mocot::pipeline {

std::vector<parse::OptionLabel> CVQAInstance::labels() const {
  std::vector<parse::OptionLabel> out;
  for (const auto& option : options) out.push_back(option.label);
  return out;
}

void validate(const CVQAInstance& instance) {
  if (instance.id.empty()) throw std::invalid_argument("instance id is empty");
  if (instance.question.empty()) throw std::invalid_argument("instance " + instance.id + " has no question");
  if (instance.mode == AnswerMode::open_ended) return;
  if (instance.options.size() < 2) throw std::invalid_argument("instance " + instance.id + " needs >= 2 options");
  std::set<char> seen;
  for (const auto& option : instance.options) {
    if (!seen.insert(option.label.letter()).second) {
      throw std::invalid_argument("instance " + instance.id + " repeats option " + option.label.str());
    }
  }
  if (instance.gold.size() != 1 || seen.count(instance.gold.front()) == 0) {
    throw std::invalid_argument("instance " + instance.id + " gold answer '" + instance.gold +
                                "' is not an option label");
  }
}

std::string render_options(const CVQAInstance& instance) {
  std::string out;
  for (const auto& option : instance.options) out += option.label.str() + ". " + option.text + "\n";
  return out;
}

std::string render_question(const CVQAInstance& instance) {
  std::string out = "Question: " + instance.question + "\n";
  if (!instance.options.empty()) out += "Options:\n" + render_options(instance);
  return out;
}

nlohmann::json to_json(const CVQAInstance& instance) {
  nlohmann::json options = nlohmann::json::array();
  for (const auto& option : instance.options) options.push_back({{"label", option.label.str()}, {"text", option.text}});
  return {{"id", instance.id},
          {"image", instance.image.value},
          {"question", instance.question},
          {"options", std::move(options)},
          {"gold", instance.gold},
          {"mode", instance.mode == AnswerMode::mcq ? "mcq" : "open-ended"}};
}

}  // namespace mocot::pipeline
