#pragma once

#include <cstddef>
#include <vector>

namespace mocot::theory {

/// Joint table p(c, x, y) stored as [c][x][y].
struct JointTable {
  std::vector<std::vector<std::vector<double>>> p;
};

/// Throws std::invalid_argument unless entries are non-negative, rows are
/// rectangular and the total is 1 within 1e-9.
void validate(const JointTable& table);

/// Exact I(X;Y|C) in bits.
double conditional_mi(const JointTable& table);

/// Binary entropy in bits.
double binary_entropy(double p);

/// ε + H2(δ) + δ·log2(B_t).
double typed_disent_bound(double epsilon, double delta, std::size_t typed_states);

/// Mediator family on B_t×B_t per context: with probability δ the interface
/// copies X into Y; otherwise X and Y are independent noisy reads of a
/// uniform mediator S, the noise tuned so I(X;Y | no interface) = ε.
JointTable mediator_family(double epsilon, double delta, std::size_t typed_states, std::size_t contexts = 2);

/// Noisy-read mixing weight η giving I(X;Y) = ε for the no-interface table
/// (η = 1 is independence).
double mediator_noise_for(double epsilon, std::size_t typed_states);

/// Joint over K module outcomes, outcome k taking sizes[k] values, stored
/// row-major with the last module fastest.
struct ModuleJoint {
  std::vector<std::size_t> sizes;
  std::vector<double> p;
};

void validate(const ModuleJoint& joint);

/// max over ordered pairs i≠j and over values of τ^(j) with positive mass of
/// KL(p(τ^(i)|τ^(j)) ‖ p(τ^(i))), in bits. Throws std::domain_error if a
/// conditional puts mass where the marginal has none.
double coupling_kl(const ModuleJoint& joint);

/// Two modules over m outcomes: (1−λ)·(independent uniforms) + λ·(copy).
ModuleJoint leakage_pair(std::size_t outcomes, double lambda);

/// Per-module outcome law and reward for the value-decomposition check.
struct ModuleValue {
  std::vector<double> p;
  std::vector<double> reward;
};

struct ValueGap {
  double global_value = 0.0;
  double enumerated_value = 0.0;  // same quantity summed over the full joint
  double module_sum = 0.0;
  double gap = 0.0;
  double coupling = 0.0;  // coupling_kl of the leaked joint
};

/// Modules run in order; module k ≥ 2 copies module k−1's outcome with
/// probability ε instead of drawing its own. V is the exact expected additive
/// reward of the leaked process, cross-checked against full enumeration of
/// the joint; V^(k) uses each module alone. Throws
/// std::invalid_argument past 10^6 joint outcomes.
ValueGap value_decomposition_gap(const std::vector<ModuleValue>& modules, double epsilon);

/// K modules over m outcomes where each module favours its own valid block
/// and the blocks of neighbouring modules are disjoint.
std::vector<ModuleValue> standard_value_family(std::size_t modules, std::size_t outcomes);

}  // namespace mocot::theory
