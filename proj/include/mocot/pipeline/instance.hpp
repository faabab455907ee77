#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/chat.hpp"
#include "mocot/parse/option_label.hpp"

namespace mocot::pipeline {

enum class AnswerMode { mcq, open_ended };

struct AnswerOption {
  parse::OptionLabel label;
  std::string text;
};

/// One comic VQA task unit.
struct CVQAInstance {
  std::string id;
  backend::ImageRef image;
  std::string question;
  std::vector<AnswerOption> options;  // empty in open-ended mode
  std::string gold;                   // option label (mcq) or reference text (open-ended)
  AnswerMode mode = AnswerMode::mcq;

  std::vector<parse::OptionLabel> labels() const;
};

/// mcq needs >= 2 options and a gold label among them. Throws std::invalid_argument.
void validate(const CVQAInstance& instance);

/// "A. text" lines, one per option.
std::string render_options(const CVQAInstance& instance);

/// "Question: ...\nOptions:\nA. ...".
std::string render_question(const CVQAInstance& instance);

nlohmann::json to_json(const CVQAInstance& instance);

}  // namespace mocot::pipeline
