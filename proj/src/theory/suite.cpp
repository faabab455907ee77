#include "mocot/theory/suite.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mocot/theory/information.hpp"
#include "mocot/theory/models.hpp"

namespace mocot::theory {

namespace {

BoundCheckResult exact_row(std::string name, BoundDirection direction, double bound, double value, bool satisfied) {
  BoundCheckResult out;
  out.name = std::move(name);
  out.direction = direction;
  out.bound = bound;
  out.estimate = value;
  out.exact = value;
  out.satisfied = satisfied;
  return out;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c);
  return buffer;
}

void flat_rows(const SuiteConfig& config, std::vector<SuiteRow>& rows) {
  FlatSpec uniform_spec;  // B=8, T=6, κ=0.5
  const double exact = flat_exact_success(uniform_spec, FlatPolicy::uniform());
  rows.push_back({"flat", exact_row("uniform exact k=0.5 B=8 T=6", BoundDirection::exact, 0.015625, exact,
                                    exact == 0.015625)});
  auto uniform = simulate_flat(uniform_spec, FlatPolicy::uniform(), config.trials, config.seed, config.threads);
  uniform.name = "uniform MC k=0.5 B=8 T=6";
  rows.push_back({"flat", uniform});

  const std::vector<std::pair<double, int>> pairs = {{0.7, 5}, {0.5, 3}, {0.9, 8}, {0.8, 4}, {0.6, 2}, {0.95, 10}, {0.3, 1}};
  for (const auto& [p, t] : pairs) {
    FlatSpec spec;
    spec.horizon = t;
    auto row = simulate_flat(spec, FlatPolicy::with_valid_mass(p), config.trials, config.seed + 1, config.threads);
    row.name = fmt("valid-mass p=%.2f T=%.0f", p, t);
    rows.push_back({"flat", row});
  }
  FlatSpec logit_spec;
  logit_spec.horizon = 5;
  auto logit = simulate_flat(logit_spec, FlatPolicy::random_logits(logit_spec, 1.5, 11), config.trials,
                             config.seed + 2, config.threads);
  logit.name = "logit-table B=8 T=5";
  rows.push_back({"flat", logit});
}

void modular_rows(const SuiteConfig& config, std::vector<SuiteRow>& rows) {
  const double closed = modular_success_lower_bound(0.1, 0.05, {0.8, 0.8, 0.8}, {2, 2, 2});
  rows.push_back({"modular", exact_row("closed form a=0.1 ce=0.05 p=0.8 T=(2,2,2)", BoundDirection::exact, 0.22413312,
                                       closed, std::abs(closed - 0.22413312) <= 1e-12)});

  struct Config {
    std::string name;
    ModularSpec spec;
  };
  const auto module = [](std::string type, double lower, double mass, int length) {
    ModuleSpec m;
    m.type = std::move(type);
    m.p_lower = lower;
    m.policy_mass = mass;
    m.length = length;
    return m;
  };
  std::vector<Config> configs;
  configs.push_back({"a=0.1 ce=0.05 p=0.8 T=(2,2,2)",
                     {{module("Visual", 0.8, 0.8, 2), module("Symbolic", 0.8, 0.8, 2), module("Narrative", 0.8, 0.8, 2)},
                      0.05, {0.1, 0.0}, 3}});
  configs.push_back({"a=0 ce=0 p=(0.7,0.9) T=(3,2)",
                     {{module("Visual", 0.7, 0.7, 3), module("Symbolic", 0.9, 0.9, 2)}, 0.0, {0.0, 0.0}, 5}});
  configs.push_back({"a=0.2 ce=0.1 p=0.6 mass=0.75 T=(1,2,3,2)",
                     {{module("Visual", 0.6, 0.75, 1), module("Symbolic", 0.6, 0.75, 2),
                       module("Narrative", 0.6, 0.75, 3), module("Visual", 0.6, 0.75, 2)},
                      0.1, {0.2, 0.3}, 7}});
  configs.push_back({"a=0.05 ce=0.02 single module p=0.5 T=4",
                     {{module("Narrative", 0.5, 0.5, 4)}, 0.02, {0.05, 0.1}, 9}});
  for (auto& c : configs) {
    auto row = simulate_modular(c.spec, config.trials, config.seed + 3, config.threads);
    row.name = c.name;
    rows.push_back({"modular", row});
  }
}

void spurious_rows(const SuiteConfig& config, std::vector<SuiteRow>& rows) {
  FlatSpec spec;
  const double mass = spurious_mass(FlatPolicy::random_logits(spec, 2.0, 5), spec);
  rows.push_back({"spurious", exact_row("flat logit-table mass on Z_sym", BoundDirection::lower, 0.0, mass, mass > 0.0)});
  rows.push_back({"spurious", exact_row("bound b=0.05 K=6 d=0.01", BoundDirection::exact, 0.11,
                                        spurious_suppression_bound(0.05, 6, 0.01),
                                        std::abs(spurious_suppression_bound(0.05, 6, 0.01) - 0.11) <= 1e-12)});

  struct Config {
    std::string name;
    SpuriousSpec spec;
  };
  const auto make = [](int k, double delta, double alpha, double beta) {
    SpuriousSpec s;
    s.modules = k;
    s.delta_type = delta;
    s.verifier = {alpha, beta};
    return s;
  };
  const std::vector<Config> configs = {{"b=0.05 K=6 d=0.01", make(6, 0.01, 0.1, 0.05)},
                                       {"b=0.1 K=3 d=0.05", make(3, 0.05, 0.0, 0.1)},
                                       {"b=0.2 K=4 d=0", make(4, 0.0, 0.1, 0.2)},
                                       {"b=0 K=3 d=0", make(3, 0.0, 0.1, 0.0)}};
  for (const auto& c : configs) {
    auto row = simulate_spurious(c.spec, config.trials, config.seed + 4, config.threads);
    row.name = c.name;
    if (row.exact) row.satisfied = row.satisfied && row.successes == 0;
    rows.push_back({"spurious", row});
  }
}

void mi_rows(std::vector<SuiteRow>& rows) {
  for (double epsilon : {0.0, 0.05, 0.2}) {
    for (double delta : {0.0, 0.01, 0.1}) {
      for (std::size_t typed : {std::size_t{4}, std::size_t{16}}) {
        const double mi = conditional_mi(mediator_family(epsilon, delta, typed));
        const double bound = typed_disent_bound(epsilon, delta, typed);
        const bool zero_case = epsilon == 0.0 && delta == 0.0;
        const bool ok = mi <= bound + 1e-12 && (!zero_case || mi == 0.0);
        rows.push_back({"mi", exact_row(fmt("e=%.2f d=%.2f Bt=%.0f", epsilon, delta, static_cast<double>(typed)),
                                        BoundDirection::upper, bound, mi, ok)});
      }
    }
  }
}

void value_rows(std::vector<SuiteRow>& rows) {
  const auto family = standard_value_family(3, 4);
  const auto independent = value_decomposition_gap(family, 0.0);
  rows.push_back({"value", exact_row("independent modules K=3", BoundDirection::exact, 0.0, independent.gap,
                                     independent.gap == 0.0)});
  const auto single = value_decomposition_gap(standard_value_family(1, 4), 0.2);
  rows.push_back({"value", exact_row("single module e=0.2", BoundDirection::exact, 0.0, single.gap, single.gap == 0.0)});
  double previous = -1.0;
  bool monotone = true;
  for (double epsilon : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const double gap = value_decomposition_gap(family, epsilon).gap;
    monotone = monotone && gap >= previous;
    previous = gap;
  }
  const auto leaked = value_decomposition_gap(family, 0.2);
  rows.push_back({"value", exact_row("gap monotone in leakage, value at e=0.2", BoundDirection::lower, 0.0, leaked.gap,
                                     monotone && leaked.gap > 0.0)});

  const double independent_kl = coupling_kl(leakage_pair(4, 0.0));
  rows.push_back({"coupling", exact_row("independent pair", BoundDirection::exact, 0.0, independent_kl,
                                        independent_kl == 0.0)});
  const double copy_kl = coupling_kl(leakage_pair(4, 1.0));
  rows.push_back({"coupling", exact_row("identical copy m=4", BoundDirection::exact, 2.0, copy_kl,
                                        std::abs(copy_kl - 2.0) <= 1e-12)});
  bool kl_monotone = true;
  double last = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double kl = coupling_kl(leakage_pair(4, i / 10.0));
    kl_monotone = kl_monotone && kl > last;
    last = kl;
  }
  rows.push_back({"coupling", exact_row("KL increasing in leakage", BoundDirection::lower, 0.0, last, kl_monotone)});
}

}  // namespace

std::vector<SuiteRow> run_bound_suite(const SuiteConfig& config) {
  std::vector<SuiteRow> rows;
  flat_rows(config, rows);
  modular_rows(config, rows);
  spurious_rows(config, rows);
  mi_rows(rows);
  value_rows(rows);
  return rows;
}

bool all_satisfied(const std::vector<SuiteRow>& rows) {
  for (const auto& row : rows) {
    if (!row.result.satisfied) return false;
  }
  return !rows.empty();
}

nlohmann::json to_json(const std::vector<SuiteRow>& rows, const SuiteConfig& config) {
  nlohmann::json out = {{"trials", config.trials}, {"seed", config.seed}, {"rows", nlohmann::json::array()}};
  for (const auto& row : rows) {
    auto entry = to_json(row.result);
    entry["group"] = row.group;
    out["rows"].push_back(std::move(entry));
  }
  out["all_satisfied"] = all_satisfied(rows);
  return out;
}

std::string to_text(const std::vector<SuiteRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-9s %-44s %-6s %-13s %-13s %-29s %s\n", "group", "check", "dir", "bound",
                "estimate", "ci(0.99)", "verdict");
  out << line;
  for (const auto& row : rows) {
    const auto& r = row.result;
    char ci[64] = "-";
    if (r.ci) std::snprintf(ci, sizeof ci, "[%.6g, %.6g]", r.ci->low, r.ci->high);
    std::snprintf(line, sizeof line, "%-9s %-44s %-6s %-13.8g %-13.8g %-29s %s\n", row.group.c_str(), r.name.c_str(),
                  std::string(to_string(r.direction)).c_str(), r.bound, r.estimate, ci, r.satisfied ? "ok" : "FAIL");
    out << line;
  }
  return out.str();
}

}  // namespace mocot::theory
