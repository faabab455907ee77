#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mocot/theory/stats.hpp"

namespace mocot::theory {

/// Flat sequential model: B states, horizon T. The valid set at every step is
/// a cyclic window of round(κB) states whose offset is a hash of the prefix.
/// A non-zero `relabel_seed` applies a fixed state permutation to both the
/// valid sets and the policy.
struct FlatSpec {
  std::size_t states = 8;
  int horizon = 6;
  double kappa = 0.5;
  double symbolic_fraction = 0.25;  // Z_sym = the first round(fraction·B) labels, at least one
  std::uint64_t seed = 1;
  std::uint64_t relabel_seed = 0;

  std::size_t valid_count() const;
  std::size_t symbolic_count() const;
};

void validate(const FlatSpec& spec);

struct FlatPolicy {
  enum class Kind { uniform, valid_mass, logit_table };
  Kind kind = Kind::uniform;
  double valid_mass = 0.5;              // valid_mass: mass placed on the valid set
  std::vector<std::vector<double>> logits;  // logit_table: [step][state]

  static FlatPolicy uniform();
  static FlatPolicy with_valid_mass(double p);
  /// Gaussian logits with standard deviation `scale`, drawn from `seed`.
  static FlatPolicy random_logits(const FlatSpec& spec, double scale, std::uint64_t seed);
};

/// p̄^T. Throws std::invalid_argument unless p̄ ∈ (0,1] and T ≥ 1.
double flat_success_upper_bound(double p_bar, int horizon);

/// Largest valid-set mass the policy can place at any step.
double flat_p_bar(const FlatSpec& spec, const FlatPolicy& policy);

/// Exact P(trajectory valid) by enumerating valid prefixes. Throws
/// std::invalid_argument when B^T exceeds 10^6.
double flat_exact_success(const FlatSpec& spec, const FlatPolicy& policy);

inline constexpr double kEnumerationLimit = 1e6;

/// Monte-Carlo estimate against p̄^T; `exact` is filled when enumeration is feasible.
BoundCheckResult simulate_flat(const FlatSpec& spec, const FlatPolicy& policy, std::uint64_t trials,
                               std::uint64_t seed, int threads = 1);

/// Smallest per-step mass the policy puts on Z_sym over all steps and valid-set offsets.
double spurious_mass(const FlatPolicy& policy, const FlatSpec& spec);

struct VerifierModel {
  double alpha = 0.0;  // false reject
  double beta = 0.0;   // false accept
};

void validate(const VerifierModel& verifier);

/// One module of a modular run: a typed subspace of `states` states with
/// valid fraction κ_t, walked for `length` steps by a policy placing
/// `policy_mass` ≥ p̲_t on the valid set.
struct ModuleSpec {
  std::string type = "Visual";
  std::size_t states = 8;
  double kappa = 0.5;
  double p_lower = 0.5;
  double policy_mass = 0.5;
  int length = 2;
};

/// Modules run in sequence; with probability cε a cross-module leak spoils the
/// composed hypothesis.
struct ModularSpec {
  std::vector<ModuleSpec> modules;
  double c_epsilon = 0.0;
  VerifierModel verifier;
  std::uint64_t seed = 1;
};

void validate(const ModularSpec& spec);

/// (1−α)(1−cε)∏ p̲_k^{T_k}.
double modular_success_lower_bound(double alpha, double c_epsilon, const std::vector<double>& p_lower,
                                   const std::vector<int>& lengths);

/// P(E_val): every module valid, no leak, verifier accepts.
BoundCheckResult simulate_modular(const ModularSpec& spec, std::uint64_t trials, std::uint64_t seed,
                                  int threads = 1);

/// β + Kδ_type.
double spurious_suppression_bound(double beta, int modules, double delta_type);

/// Each module crosses the type interface with probability δ_type. The
/// symbolic module walks a logit-table policy over `symbolic_states` states,
/// the first `symbolic_irrelevant` of which form Z_sym; visiting one makes the
/// hypothesis invalid.
struct SpuriousSpec {
  int modules = 3;
  int steps_per_module = 2;
  double delta_type = 0.01;
  VerifierModel verifier;
  std::size_t symbolic_states = 8;
  std::size_t symbolic_irrelevant = 2;
  double logit_scale = 1.0;
  std::uint64_t seed = 1;
};

void validate(const SpuriousSpec& spec);

/// Frequency of accepted outputs that involve a spurious move, against β + Kδ.
BoundCheckResult simulate_spurious(const SpuriousSpec& spec, std::uint64_t trials, std::uint64_t seed,
                                   int threads = 1);

}  // namespace mocot::theory
