#include "mocot/parse/tagged.hpp"

#include <optional>

#include "mocot/parse/errors.hpp"
#include "text_util.hpp"

namespace mocot::parse {

namespace {

struct Span {
  std::size_t open_begin;   // position of '<' of the opening tag
  std::size_t body_begin;
  std::size_t body_end;     // position of '<' of the closing tag
  std::size_t close_end;    // one past '>' of the closing tag
};

// Tag search runs on a lowercased copy so names match case-insensitively.
std::optional<Span> find_span(const std::string& lowered, std::string_view name, std::size_t from = 0) {
  const std::string open = "<" + std::string(name) + ">";
  const std::string close = "</" + std::string(name) + ">";
  const auto open_at = lowered.find(open, from);
  if (open_at == std::string::npos) return std::nullopt;
  const auto close_at = lowered.find(close, open_at + open.size());
  if (close_at == std::string::npos) return std::nullopt;
  return Span{open_at, open_at + open.size(), close_at, close_at + close.size()};
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (auto at = haystack.find(needle); at != std::string::npos; at = haystack.find(needle, at + 1)) ++count;
  return count;
}

bool blank(std::string_view text) { return detail::trim(text).empty(); }

}  // namespace

TaggedOutput parse_tagged_output(std::string_view text, TagMode mode) {
  const std::string lowered = detail::lower(text);
  const auto reasoning = find_span(lowered, "reasoning");
  if (!reasoning) throw ParseError(ParseError::Kind::missing_tag, "missing <REASONING> span", std::string(text));
  const auto answer = find_span(lowered, "answer");
  if (!answer) throw ParseError(ParseError::Kind::missing_tag, "missing <ANSWER> span", std::string(text));

  TaggedOutput out;
  out.reasoning = std::string(detail::trim(text.substr(reasoning->body_begin, reasoning->body_end - reasoning->body_begin)));
  out.answer = std::string(detail::trim(text.substr(answer->body_begin, answer->body_end - answer->body_begin)));

  if (mode == TagMode::strict) {
    for (const char* tag : {"<reasoning>", "</reasoning>", "<answer>", "</answer>"}) {
      if (count_of(lowered, tag) != 1) {
        throw ParseError(ParseError::Kind::duplicate_tag, std::string("tag ") + tag + " must appear exactly once",
                         std::string(text));
      }
    }
    if (answer->open_begin < reasoning->close_end) {
      throw ParseError(ParseError::Kind::not_strict, "<ANSWER> must follow </REASONING>", std::string(text));
    }
    if (!blank(text.substr(0, reasoning->open_begin)) ||
        !blank(text.substr(reasoning->close_end, answer->open_begin - reasoning->close_end)) ||
        !blank(text.substr(answer->close_end))) {
      throw ParseError(ParseError::Kind::not_strict, "text outside the REASONING/ANSWER spans", std::string(text));
    }
  }
  return out;
}

std::string render_tagged_output(const TaggedOutput& output) {
  return "<REASONING>" + output.reasoning + "</REASONING><ANSWER>" + output.answer + "</ANSWER>";
}

}  // namespace mocot::parse
