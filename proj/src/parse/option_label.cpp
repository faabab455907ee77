#include "mocot/parse/option_label.hpp"

#include <algorithm>
#include <cctype>

#include "mocot/parse/errors.hpp"
#include "text_util.hpp"

namespace mocot::parse {

OptionLabel::OptionLabel(char letter) : letter_(letter) {
  if (letter < 'A' || letter > 'Z') {
    throw ParseError(ParseError::Kind::unmappable_label, "option label must be one uppercase letter",
                     std::string(1, letter));
  }
}

std::vector<OptionLabel> letter_labels(std::size_t count) {
  std::vector<OptionLabel> out;
  for (std::size_t i = 0; i < count && i < 26; ++i) out.emplace_back(static_cast<char>('A' + i));
  return out;
}

namespace {

bool is_wrapper(char c) {
  return c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == '"' || c == '\'' ||
         c == '`' || c == '*' || c == ':' || c == '.' || c == ',' || c == ';' || c == '-' || c == '<' ||
         c == '>' || c == '#';
}

std::string_view strip_wrappers(std::string_view text) {
  text = detail::trim(text);
  while (!text.empty() && (is_wrapper(text.front()) || detail::is_space(text.front()))) text.remove_prefix(1);
  return text;
}

// Drops a leading "option"/"answer"/"the answer is" style prefix.
std::string_view strip_prefix_words(std::string_view text) {
  static constexpr std::string_view kPrefixes[] = {"the answer is", "final answer", "answer", "option", "choice"};
  bool stripped = true;
  while (stripped) {
    stripped = false;
    text = strip_wrappers(text);
    const std::string lowered = detail::lower(text.substr(0, 16));
    for (const auto prefix : kPrefixes) {
      if (lowered.rfind(prefix, 0) == 0) {
        const auto rest = text.substr(prefix.size());
        // "options" or "answered" are words, not prefixes
        if (!rest.empty() && std::isalpha(static_cast<unsigned char>(rest.front()))) continue;
        text = rest;
        stripped = true;
        break;
      }
    }
  }
  return text;
}

}  // namespace

OptionLabel normalize_option_label(std::string_view raw, const std::vector<OptionLabel>& options) {
  if (options.empty()) throw ParseError(ParseError::Kind::label_not_in_options, "no options to match against");
  const std::string_view body = strip_prefix_words(raw);
  if (body.empty() || !std::isalpha(static_cast<unsigned char>(body.front())) ||
      (body.size() > 1 && std::isalnum(static_cast<unsigned char>(body[1])))) {
    throw ParseError(ParseError::Kind::unmappable_label, "cannot read an option label from '" + std::string(raw) + "'",
                     std::string(raw));
  }
  const OptionLabel label(static_cast<char>(std::toupper(static_cast<unsigned char>(body.front()))));
  if (std::find(options.begin(), options.end(), label) == options.end()) {
    throw ParseError(ParseError::Kind::label_not_in_options, "label " + label.str() + " is not among the options",
                     std::string(raw));
  }
  return label;
}

}  // namespace mocot::parse
