#pragma once

// Brute-force reference implementations of BLEU-4 and ROUGE-L used only by
// tests. They share no code with mocot::metrics: n-grams are compared
// position by position and the LCS is found by enumerating subsequences.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline bool same_ngram(const Tokens& a, std::size_t i, const Tokens& b, std::size_t j, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (a[i + k] != b[j + k]) return false;
  }
  return true;
}

// Clipped matches / candidate n-gram count, both as integers.
inline std::pair<long, long> clipped_precision(const Tokens& cand, const Tokens& ref, std::size_t n) {
  if (cand.size() < n) return {0, 0};
  const std::size_t total = cand.size() - n + 1;
  long matched = 0;
  std::vector<bool> counted(total, false);
  for (std::size_t i = 0; i < total; ++i) {
    if (counted[i]) continue;
    long in_cand = 0;
    for (std::size_t j = i; j < total; ++j) {
      if (same_ngram(cand, i, cand, j, n)) {
        ++in_cand;
        counted[j] = true;
      }
    }
    long in_ref = 0;
    for (std::size_t j = 0; ref.size() >= n && j + n <= ref.size(); ++j) {
      if (same_ngram(cand, i, ref, j, n)) ++in_ref;
    }
    matched += in_cand < in_ref ? in_cand : in_ref;
  }
  return {matched, static_cast<long>(total)};
}

inline double bleu4(const Tokens& cand, const Tokens& ref) {
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto [matched, total] = clipped_precision(cand, ref, n);
    if (total == 0 || matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total)) / 4.0;
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

// Longest common subsequence by enumerating every subsequence of the shorter
// sequence (bitmask) and testing it greedily against the longer one.
inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  const Tokens& shorter = a.size() <= b.size() ? a : b;
  const Tokens& longer = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  const std::uint32_t limit = 1u << shorter.size();
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    std::size_t pos = 0;
    std::size_t length = 0;
    bool ok = true;
    for (std::size_t i = 0; i < shorter.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (pos < longer.size() && longer[pos] != shorter[i]) ++pos;
      if (pos == longer.size()) {
        ok = false;
      } else {
        ++pos;
        ++length;
      }
    }
    if (ok && length > best) best = length;
  }
  return best;
}

inline double rouge_l_f1(const Tokens& cand, const Tokens& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(cand, ref));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

}  // namespace oracle
