#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "mocot/pipeline/instance.hpp"
#include "mocot/pipeline/prompts.hpp"
#include "support/scripted.hpp"

namespace testing_support {

/// Routes each call by its system prompt to a per-prompt handler that sees
/// the user text and returns the reply.
class StageRouter {
 public:
  using Handler = std::function<std::string(const std::string& user)>;

  StageRouter& on(const std::string& prompt, Handler handler) {
    handlers_[mocot::pipeline::PromptLibrary::builtin().get(prompt)] = {prompt, std::move(handler)};
    return *this;
  }

  std::map<std::string, int> counts;

  FnBackend backend() {
    return FnBackend([this](const std::vector<mocot::backend::ChatMessage>& messages) {
      std::string system;
      std::string user;
      for (const auto& message : messages) {
        for (const auto& part : message.parts) {
          if (part.kind() != mocot::backend::ContentPart::Kind::text) continue;
          (message.role == mocot::backend::Role::system ? system : user) += part.text();
        }
      }
      const auto it = handlers_.find(system);
      if (it == handlers_.end()) throw std::runtime_error("no handler for this system prompt");
      ++counts[it->second.first];
      return mocot::backend::ChatResponse{it->second.second(user), mocot::backend::FinishReason::stop, {}};
    });
  }

 private:
  std::map<std::string, std::pair<std::string, Handler>> handlers_;
};

inline mocot::pipeline::CVQAInstance sample_instance() {
  using mocot::parse::OptionLabel;
  mocot::pipeline::CVQAInstance instance;
  instance.id = "sample-1";
  instance.image = {mocot::backend::ImageRef::Source::url, "https://example.org/comic.png", ""};
  instance.question = "Why is the comic funny?";
  instance.options = {{OptionLabel('A'), "The dog talks"},
                      {OptionLabel('B'), "The sign is upside down"},
                      {OptionLabel('C'), "The cat works"},
                      {OptionLabel('D'), "Nothing happens"}};
  instance.gold = "B";
  return instance;
}

}  // namespace testing_support
