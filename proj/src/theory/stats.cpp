#include "mocot/theory/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace mocot::theory {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw std::invalid_argument("Wilson interval of zero trials");
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0,1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // The endpoints are exactly 0 and 1 at the extremes; roundoff must not move them.
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

TrialCounts run_trials(std::uint64_t trials, std::uint64_t seed, int threads, const Trial& trial) {
  if (trials < kMinTrials) throw std::invalid_argument("Monte-Carlo checks need at least 10000 trials");
  std::vector<std::uint64_t> hits(kSubstreams, 0);
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int stream = next++; stream < kSubstreams; stream = next++) {
      const std::uint64_t share = trials / kSubstreams + (static_cast<std::uint64_t>(stream) < trials % kSubstreams);
      std::mt19937_64 rng(mix64(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(stream)));
      std::uint64_t local = 0;
      for (std::uint64_t i = 0; i < share; ++i) local += trial(rng) ? 1 : 0;
      hits[stream] = local;
    }
  };
  const int workers = std::clamp(threads, 1, kSubstreams);
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  TrialCounts counts{trials, 0};
  for (auto h : hits) counts.successes += h;
  return counts;
}

std::string_view to_string(BoundDirection direction) {
  switch (direction) {
    case BoundDirection::upper: return "upper";
    case BoundDirection::lower: return "lower";
    case BoundDirection::exact: return "exact";
  }
  return "upper";
}

BoundCheckResult monte_carlo_check(std::string name, BoundDirection direction, double bound, TrialCounts counts,
                                   double level) {
  BoundCheckResult out;
  out.name = std::move(name);
  out.direction = direction;
  out.bound = bound;
  out.trials = counts.trials;
  out.successes = counts.successes;
  out.estimate = static_cast<double>(counts.successes) / static_cast<double>(counts.trials);
  out.ci = wilson_interval(counts.successes, counts.trials, level);
  switch (direction) {
    case BoundDirection::upper: out.satisfied = out.ci->low <= bound; break;
    case BoundDirection::lower: out.satisfied = out.ci->high >= bound; break;
    case BoundDirection::exact: out.satisfied = out.ci->low <= bound && bound <= out.ci->high; break;
  }
  return out;
}

nlohmann::json to_json(const BoundCheckResult& result) {
  nlohmann::json out = {{"name", result.name},
                        {"direction", to_string(result.direction)},
                        {"bound", result.bound},
                        {"estimate", result.estimate},
                        {"trials", result.trials},
                        {"successes", result.successes},
                        {"satisfied", result.satisfied}};
  out["ci"] = result.ci ? nlohmann::json::array({result.ci->low, result.ci->high}) : nlohmann::json();
  out["exact"] = result.exact ? nlohmann::json(*result.exact) : nlohmann::json();
  return out;
}

}  // namespace mocot::theory
