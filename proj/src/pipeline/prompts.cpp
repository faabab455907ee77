#include "mocot/pipeline/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mocot::pipeline {

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary library = [] {
    PromptLibrary out;
    for (const auto& [name, text] : detail::embedded_prompts()) out.prompts_.emplace(name, text);
    return out;
  }();
  return library;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  PromptLibrary out = builtin();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream text;
    text << in.rdbuf();
    std::string body = text.str();
    if (!body.empty() && body.back() == '\n') body.pop_back();
    out.prompts_[entry.path().stem().string()] = std::move(body);
  }
  return out;
}

const std::string& PromptLibrary::get(std::string_view name) const {
  const auto it = prompts_.find(name);
  if (it == prompts_.end()) throw std::out_of_range("unknown prompt: " + std::string(name));
  return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, text] : prompts_) out.push_back(name);
  return out;
}

}  // namespace mocot::pipeline
