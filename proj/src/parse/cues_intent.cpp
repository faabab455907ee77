#include "mocot/parse/cues_intent.hpp"

#include <cctype>
#include <sstream>

#include "mocot/parse/errors.hpp"
#include "text_util.hpp"

namespace mocot::parse {

const std::vector<std::string>& forbidden_words() {
  static const std::vector<std::string> words = {"societal", "norms", "expectations", "resilience", "redemption"};
  return words;
}

std::vector<std::string> find_forbidden_words(std::string_view text) {
  const std::string lowered = detail::lower(text);
  const auto is_word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::vector<std::string> hits;
  for (const auto& word : forbidden_words()) {
    for (auto at = lowered.find(word); at != std::string::npos; at = lowered.find(word, at + 1)) {
      const bool left = at == 0 || !is_word_char(lowered[at - 1]);
      const auto end = at + word.size();
      const bool right = end == lowered.size() || !is_word_char(lowered[end]);
      if (left && right) {
        hits.push_back(word);
        break;
      }
    }
  }
  return hits;
}

namespace {

// Body of the first line starting with `label` (case-insensitive), if any.
bool take_line(std::string_view text, std::string_view label, std::string& body) {
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto trimmed = detail::trim(line);
    if (detail::lower(trimmed.substr(0, label.size())) == label) {
      body = std::string(detail::trim(trimmed.substr(label.size())));
      return true;
    }
  }
  return false;
}

}  // namespace

CuesIntent parse_cues_intent(std::string_view text) {
  std::string cues_line;
  std::string intent_line;
  if (!take_line(text, "cues:", cues_line)) {
    throw ParseError(ParseError::Kind::missing_line, "missing CUES: line", std::string(text));
  }
  if (!take_line(text, "intent:", intent_line) || intent_line.empty()) {
    throw ParseError(ParseError::Kind::missing_line, "missing INTENT: line", std::string(text));
  }

  CuesIntent out;
  std::istringstream parts(cues_line);
  std::string cue;
  while (std::getline(parts, cue, ',')) {
    const auto trimmed = detail::trim(cue);
    if (!trimmed.empty()) out.cues.emplace_back(trimmed);
  }
  if (out.cues.size() < 2 || out.cues.size() > 4) {
    throw ParseError(ParseError::Kind::arity, "CUES must list 2 to 4 phrases, got " + std::to_string(out.cues.size()),
                     std::string(text));
  }
  out.intent = intent_line;
  out.forbidden_hits = find_forbidden_words(text);
  return out;
}

std::string render_cues_intent(const CuesIntent& value) {
  std::string out = "CUES: ";
  for (std::size_t i = 0; i < value.cues.size(); ++i) {
    if (i > 0) out += ", ";
    out += value.cues[i];
  }
  out += "\nINTENT: " + value.intent;
  return out;
}

}  // namespace mocot::parse
