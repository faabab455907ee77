#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mocot::metrics {

/// Repo-wide tokenizer for text metrics: ASCII-lowercase, split on Unicode
/// whitespace, strip leading/trailing punctuation, drop empty tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Sentence BLEU with one reference: uniform weights over n = 1..4, clipped
/// counts, brevity penalty, no smoothing. 0 when any precision is 0.
double bleu4(std::string_view candidate, std::string_view reference);
double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// LCS-based ROUGE-L with beta = 1.
RougeL rouge_l(std::string_view candidate, std::string_view reference);
RougeL rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace mocot::metrics
