#include "mocot/parse/json_extract.hpp"

#include <algorithm>
#include <optional>
#include <vector>

#include "mocot/parse/errors.hpp"

namespace mocot::parse {

using json = nlohmann::json;

namespace {

std::optional<json> try_parse(std::string_view text) {
  json value = json::parse(text.begin(), text.end(), nullptr, false);
  if (value.is_discarded()) return std::nullopt;
  return value;
}

// Contents of the first ``` fence, without the info string.
std::optional<std::string_view> first_fence(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body_start = text.find('\n', open + 3);
  if (body_start == std::string_view::npos) return std::nullopt;
  ++body_start;
  const auto close = text.find("```", body_start);
  if (close == std::string_view::npos) return text.substr(body_start);
  return text.substr(body_start, close - body_start);
}

// End (inclusive) of the brace group opened at `start`, skipping string contents.
std::optional<std::size_t> matching_brace(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

ExtractedJson extract_fenced_json(std::string_view text) {
  if (const auto fence = first_fence(text)) {
    if (auto value = try_parse(*fence)) {
      if (!value->is_object()) {
        throw ParseError(ParseError::Kind::not_an_object, "fenced block is JSON but not an object", std::string(text));
      }
      return {std::move(*value), ExtractStrategy::fenced_block};
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    if (const auto end = matching_brace(text, i)) spans.emplace_back(i, *end - i + 1);
  }
  std::stable_sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [start, length] : spans) {
    if (auto value = try_parse(text.substr(start, length)); value && value->is_object()) {
      return {std::move(*value), ExtractStrategy::balanced_span};
    }
  }
  throw ParseError(ParseError::Kind::no_parseable_block, "no parseable JSON object in model output",
                   std::string(text));
}

}  // namespace mocot::parse
