#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mocot::parse {

/// Words banned from both REASONING and ANSWER by the open-ended prompt.
const std::vector<std::string>& forbidden_words();

/// Forbidden words present in `text` (whole-word, case-insensitive).
std::vector<std::string> find_forbidden_words(std::string_view text);

struct CuesIntent {
  std::vector<std::string> cues;  // 2..4
  std::string intent;
  std::vector<std::string> forbidden_hits;

  bool forbidden_word_flag() const { return !forbidden_hits.empty(); }
};

/// Parses the two-line "CUES: a, b\nINTENT: ..." REASONING body.
CuesIntent parse_cues_intent(std::string_view text);

std::string render_cues_intent(const CuesIntent& value);

}  // namespace mocot::parse
