#include "mocot/metrics/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>

namespace mocot::metrics {

namespace {

// Decodes one UTF-8 code point at `pos`; invalid bytes decode as themselves.
char32_t decode(std::string_view text, std::size_t pos, std::size_t& length) {
  const auto byte = static_cast<unsigned char>(text[pos]);
  const auto continuation = [&](std::size_t i) -> std::uint32_t {
    return pos + i < text.size() ? static_cast<unsigned char>(text[pos + i]) & 0x3fu : 0u;
  };
  if (byte < 0x80) {
    length = 1;
    return byte;
  }
  if ((byte & 0xe0) == 0xc0 && pos + 1 < text.size()) {
    length = 2;
    return ((byte & 0x1fu) << 6) | continuation(1);
  }
  if ((byte & 0xf0) == 0xe0 && pos + 2 < text.size()) {
    length = 3;
    return ((byte & 0x0fu) << 12) | (continuation(1) << 6) | continuation(2);
  }
  if ((byte & 0xf8) == 0xf0 && pos + 3 < text.size()) {
    length = 4;
    return ((byte & 0x07u) << 18) | (continuation(1) << 12) | (continuation(2) << 6) | continuation(3);
  }
  length = 1;
  return byte;
}

bool is_unicode_space(char32_t c) {
  return c == U' ' || (c >= U'\t' && c <= U'\r') || c == 0x85 || c == 0xa0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200a) || c == 0x2028 || c == 0x2029 || c == 0x202f || c == 0x205f || c == 0x3000;
}

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205e) || c == 0xa1 || c == 0xab || c == 0xbb ||
         c == 0xbf || (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) || c == 0xff01 ||
         c == 0xff0c || c == 0xff0e || c == 0xff1a || c == 0xff1b || c == 0xff1f;
}

void push_token(std::string_view word, std::vector<std::string>& out) {
  // strip punctuation code points from both ends
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end) {
    std::size_t length = 0;
    if (!is_punct(decode(word, begin, length))) break;
    begin += length;
  }
  while (end > begin) {
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(word[start]) & 0xc0) == 0x80) --start;
    std::size_t length = 0;
    if (!is_punct(decode(word, start, length))) break;
    end = start;
  }
  if (begin == end) return;
  std::string token(word.substr(begin, end - begin));
  for (auto& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  out.push_back(std::move(token));
}

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t word_start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t length = 0;
    const char32_t c = decode(text, pos, length);
    if (is_unicode_space(c)) {
      if (pos > word_start) push_token(text.substr(word_start, pos - word_start), out);
      word_start = pos + length;
    }
    pos += length;
  }
  if (text.size() > word_start) push_token(text.substr(word_start), out);
  return out;
}

double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  double log_precision = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (candidate.size() < n) return 0.0;
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    int clipped = 0;
    for (const auto& [gram, count] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) clipped += std::min(count, it->second);
    }
    if (clipped == 0) return 0.0;
    const auto total = static_cast<double>(candidate.size() - n + 1);
    log_precision += 0.25 * std::log(clipped / total);
  }
  const auto c = static_cast<double>(candidate.size());
  const auto r = static_cast<double>(reference.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(brevity * std::exp(log_precision), 0.0, 1.0);
}

double bleu4(std::string_view candidate, std::string_view reference) {
  return bleu4(tokenize(candidate), tokenize(reference));
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const auto& token : a) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = token == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row[b.size()];
}

RougeL rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return {};
  RougeL out;
  out.precision = lcs / static_cast<double>(candidate.size());
  out.recall = lcs / static_cast<double>(reference.size());
  out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

RougeL rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l(tokenize(candidate), tokenize(reference));
}

}  // namespace mocot::metrics
