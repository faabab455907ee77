#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/theory/stats.hpp"

namespace mocot::theory {

struct SuiteConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 2024;
  int threads = 1;
};

struct SuiteRow {
  std::string group;  // flat, modular, spurious, mi, value, coupling
  BoundCheckResult result;
};

/// The fixed bound-check grid.
std::vector<SuiteRow> run_bound_suite(const SuiteConfig& config);

bool all_satisfied(const std::vector<SuiteRow>& rows);

nlohmann::json to_json(const std::vector<SuiteRow>& rows, const SuiteConfig& config);

/// One line per row: group, name, bound, estimate, CI, verdict.
std::string to_text(const std::vector<SuiteRow>& rows);

}  // namespace mocot::theory
