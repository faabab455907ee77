#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

namespace mocot::theory {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for `successes` out of `trials` at two-sided `level`.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level = 0.99);

inline constexpr std::uint64_t kMinTrials = 10000;
inline constexpr int kSubstreams = 64;

struct TrialCounts {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
};

using Trial = std::function<bool(std::mt19937_64&)>;

/// Splits `trials` over kSubstreams seeded engines and runs them on up to
/// `threads` workers. Counts do not depend on the thread count.
TrialCounts run_trials(std::uint64_t trials, std::uint64_t seed, int threads, const Trial& trial);

/// 53-bit uniform on [0,1).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by multiply-shift.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

std::uint64_t mix64(std::uint64_t x);

enum class BoundDirection { upper, lower, exact };

std::string_view to_string(BoundDirection direction);

/// One row of the bound-check report.
struct BoundCheckResult {
  std::string name;
  BoundDirection direction = BoundDirection::upper;
  double bound = 0.0;
  double estimate = 0.0;
  std::optional<Interval> ci;           // Monte-Carlo rows
  std::optional<double> exact;          // enumeration, when feasible
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  bool satisfied = false;
};

/// Monte-Carlo row. An upper bound holds unless the whole CI lies above it; a
/// lower bound holds unless the whole CI lies below it.
BoundCheckResult monte_carlo_check(std::string name, BoundDirection direction, double bound, TrialCounts counts,
                                   double level = 0.99);

nlohmann::json to_json(const BoundCheckResult& result);

}  // namespace mocot::theory
