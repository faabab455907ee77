#pragma once

#include <string>
#include <utility>
#include <vector>

// Candidate/reference pairs shared by the metric unit tests and the acceptance run.
namespace oracle {

using Tokens = std::vector<std::string>;

struct Pair {
  Tokens candidate;
  Tokens reference;
};

inline Tokens split(const std::string& text) {
  Tokens out;
  std::string word;
  for (char c : text) {
    if (c == ' ') {
      if (!word.empty()) out.push_back(word);
      word.clear();
    } else {
      word += c;
    }
  }
  if (!word.empty()) out.push_back(word);
  return out;
}

inline std::vector<Pair> fixture_pairs() {
  const std::vector<std::pair<std::string, std::string>> raw = {
      {"the cat sat on the mat", "the cat sat on a mat"},
      {"a b d", "a b c d"},
      {"the quick brown fox jumps over the lazy dog", "the quick brown fox jumps over the lazy dog"},
      {"the the the the the the", "the cat is on the mat"},
      {"a man holds an umbrella upside down in the rain", "a man holds his umbrella upside down while it rains"},
      {"dog", "the dog barks loudly at night"},
      {"one two three four five six seven", "seven six five four three two one"},
      {"sign says open but the door is locked", "the door is locked although the sign says open"},
      {"x y z w", "p q r s"},
      {"the cat pretends to work on a laptop", "a cat pretends to be working at a laptop"},
      {"panel one shows a calm sea panel two a storm", "panel one a calm sea and panel two a storm"},
      {"it is a pun on the word fall", "the caption is a pun on fall"},
  };
  std::vector<Pair> pairs;
  for (const auto& [c, r] : raw) pairs.push_back({split(c), split(r)});
  return pairs;
}

}  // namespace oracle
