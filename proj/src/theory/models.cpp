#include "mocot/theory/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mocot::theory {

namespace {

std::size_t rounded_count(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
}

std::uint64_t extend_hash(std::uint64_t h, std::size_t z) { return mix64(h ^ (0x9e3779b97f4a7c15ULL * (z + 1))); }

bool in_window(std::size_t z, std::size_t offset, std::size_t width, std::size_t states) {
  return (z + states - offset) % states < width;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += out[i] = std::exp(logits[i] - top);
  for (double& p : out) p /= z;
  return out;
}

std::size_t categorical(const std::vector<double>& probabilities, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return probabilities.size() - 1;
}

// Walks a flat model in canonical coordinates; labels only matter for sampling order.
class FlatModel {
 public:
  FlatModel(const FlatSpec& spec, const FlatPolicy& policy) : spec_(spec), policy_(policy) {
    validate(spec);
    width_ = spec.valid_count();
    label_of_.resize(spec.states);
    std::iota(label_of_.begin(), label_of_.end(), 0);
    if (spec.relabel_seed != 0) {
      std::mt19937_64 rng(spec.relabel_seed);
      for (std::size_t i = spec.states - 1; i > 0; --i) std::swap(label_of_[i], label_of_[uniform_index(rng, i + 1)]);
    }
    canonical_of_.resize(spec.states);
    for (std::size_t z = 0; z < spec.states; ++z) canonical_of_[label_of_[z]] = z;
    if (policy.kind == FlatPolicy::Kind::logit_table) {
      if (policy.logits.size() != static_cast<std::size_t>(spec.horizon)) {
        throw std::invalid_argument("logit table needs one row per step");
      }
      for (const auto& row : policy.logits) {
        if (row.size() != spec.states) throw std::invalid_argument("logit table row has the wrong width");
        step_probs_.push_back(softmax(row));
      }
    }
    if (policy.kind == FlatPolicy::Kind::valid_mass) {
      const double p = policy.valid_mass;
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("valid mass must lie in [0,1]");
      if (width_ == spec.states && p != 1.0) throw std::invalid_argument("valid set covers every state; mass must be 1");
    }
  }

  std::size_t offset(std::uint64_t h) const { return h % spec_.states; }
  std::uint64_t start() const { return mix64(spec_.seed); }
  std::size_t width() const { return width_; }

  /// Canonical-state probabilities at `step` given the valid-set offset.
  std::vector<double> probabilities(int step, std::size_t off) const {
    const std::size_t n = spec_.states;
    switch (policy_.kind) {
      case FlatPolicy::Kind::uniform: return std::vector<double>(n, 1.0 / static_cast<double>(n));
      case FlatPolicy::Kind::valid_mass: {
        std::vector<double> out(n);
        for (std::size_t z = 0; z < n; ++z) {
          out[z] = in_window(z, off, width_, n) ? policy_.valid_mass / static_cast<double>(width_)
                                                : (1.0 - policy_.valid_mass) / static_cast<double>(n - width_);
        }
        return out;
      }
      case FlatPolicy::Kind::logit_table: return step_probs_[static_cast<std::size_t>(step)];
    }
    return {};
  }

  /// Same distribution in label order.
  std::vector<double> label_probabilities(int step, std::size_t off) const {
    const auto canonical = probabilities(step, off);
    std::vector<double> out(canonical.size());
    for (std::size_t z = 0; z < canonical.size(); ++z) out[label_of_[z]] = canonical[z];
    return out;
  }

  bool sample_valid(std::mt19937_64& rng) const {
    std::uint64_t h = start();
    bool valid = true;
    for (int u = 0; u < spec_.horizon; ++u) {
      const auto off = offset(h);
      const auto z = canonical_of_[categorical(label_probabilities(u, off), rng)];
      if (!in_window(z, off, width_, spec_.states)) {
        valid = false;
        break;
      }
      h = extend_hash(h, z);
    }
    return valid;
  }

  double exact(int u, std::uint64_t h) const {
    if (u == spec_.horizon) return 1.0;
    const auto off = offset(h);
    const auto probs = probabilities(u, off);
    double total = 0.0;
    for (std::size_t j = 0; j < width_; ++j) {
      const auto z = (off + j) % spec_.states;
      if (probs[z] > 0.0) total += probs[z] * exact(u + 1, extend_hash(h, z));
    }
    return total;
  }

  bool is_symbolic_label(std::size_t label) const { return label < spec_.symbolic_count(); }

 private:
  const FlatSpec& spec_;
  const FlatPolicy& policy_;
  std::size_t width_ = 1;
  std::vector<std::size_t> label_of_;
  std::vector<std::size_t> canonical_of_;
  std::vector<std::vector<double>> step_probs_;
};

}  // namespace

std::size_t FlatSpec::valid_count() const { return std::max<std::size_t>(1, rounded_count(kappa, states)); }

std::size_t FlatSpec::symbolic_count() const {
  return std::max<std::size_t>(1, rounded_count(symbolic_fraction, states));
}

void validate(const FlatSpec& spec) {
  if (spec.states < 2) throw std::invalid_argument("flat model needs at least two states");
  if (spec.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(spec.kappa > 0.0 && spec.kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");
  if (spec.kappa * static_cast<double>(spec.states) < 1.0) throw std::invalid_argument("kappa·B must be >= 1");
  if (!(spec.symbolic_fraction >= 0.0 && spec.symbolic_fraction < 1.0)) {
    throw std::invalid_argument("symbolic fraction must lie in [0,1)");
  }
}

FlatPolicy FlatPolicy::uniform() { return {}; }

FlatPolicy FlatPolicy::with_valid_mass(double p) {
  FlatPolicy policy;
  policy.kind = Kind::valid_mass;
  policy.valid_mass = p;
  return policy;
}

FlatPolicy FlatPolicy::random_logits(const FlatSpec& spec, double scale, std::uint64_t seed) {
  FlatPolicy policy;
  policy.kind = Kind::logit_table;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  policy.logits.assign(static_cast<std::size_t>(spec.horizon), std::vector<double>(spec.states));
  for (auto& row : policy.logits) {
    for (double& x : row) x = normal(rng);
  }
  return policy;
}

double flat_success_upper_bound(double p_bar, int horizon) {
  if (!(p_bar > 0.0 && p_bar <= 1.0)) throw std::invalid_argument("p_bar must lie in (0,1]");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  return std::pow(p_bar, horizon);
}

double flat_p_bar(const FlatSpec& spec, const FlatPolicy& policy) {
  const FlatModel model(spec, policy);
  double best = 0.0;
  for (int u = 0; u < spec.horizon; ++u) {
    for (std::size_t off = 0; off < spec.states; ++off) {
      const auto probs = model.probabilities(u, off);
      double mass = 0.0;
      for (std::size_t j = 0; j < model.width(); ++j) mass += probs[(off + j) % spec.states];
      best = std::max(best, mass);
    }
    if (policy.kind != FlatPolicy::Kind::logit_table) break;
  }
  return std::min(best, 1.0);
}

double flat_exact_success(const FlatSpec& spec, const FlatPolicy& policy) {
  if (std::pow(static_cast<double>(spec.states), spec.horizon) > kEnumerationLimit) {
    throw std::invalid_argument("B^T exceeds the enumeration limit");
  }
  const FlatModel model(spec, policy);
  return model.exact(0, model.start());
}

BoundCheckResult simulate_flat(const FlatSpec& spec, const FlatPolicy& policy, std::uint64_t trials,
                               std::uint64_t seed, int threads) {
  const FlatModel model(spec, policy);
  const double bound = flat_success_upper_bound(flat_p_bar(spec, policy), spec.horizon);
  const auto counts = run_trials(trials, seed, threads, [&](std::mt19937_64& rng) { return model.sample_valid(rng); });
  auto result = monte_carlo_check("flat", BoundDirection::upper, bound, counts);
  if (std::pow(static_cast<double>(spec.states), spec.horizon) <= kEnumerationLimit) {
    result.exact = model.exact(0, model.start());
    result.satisfied = result.satisfied && *result.exact <= bound * (1.0 + 1e-12);
  }
  return result;
}

double spurious_mass(const FlatPolicy& policy, const FlatSpec& spec) {
  const FlatModel model(spec, policy);
  double least = 1.0;
  for (int u = 0; u < spec.horizon; ++u) {
    for (std::size_t off = 0; off < spec.states; ++off) {
      const auto probs = model.label_probabilities(u, off);
      double mass = 0.0;
      for (std::size_t label = 0; label < spec.symbolic_count(); ++label) mass += probs[label];
      least = std::min(least, mass);
    }
  }
  return least;
}

void validate(const VerifierModel& verifier) {
  if (!(verifier.alpha >= 0.0 && verifier.alpha < 0.5)) throw std::invalid_argument("alpha must lie in [0, 1/2)");
  if (!(verifier.beta >= 0.0 && verifier.beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
}

void validate(const ModularSpec& spec) {
  if (spec.modules.empty()) throw std::invalid_argument("modular spec needs at least one module");
  if (!(spec.c_epsilon >= 0.0 && spec.c_epsilon < 1.0)) throw std::invalid_argument("c·epsilon must lie in [0,1)");
  validate(spec.verifier);
  for (const auto& module : spec.modules) {
    if (module.states < 2 || module.length < 1) throw std::invalid_argument("module needs >= 2 states and length >= 1");
    const auto width = std::max<std::size_t>(1, rounded_count(module.kappa, module.states));
    if (!(module.kappa > 0.0 && module.kappa < 1.0) || width >= module.states) {
      throw std::invalid_argument("module kappa must leave some invalid states");
    }
    if (!(module.p_lower > 0.0 && module.p_lower <= module.policy_mass && module.policy_mass <= 1.0)) {
      throw std::invalid_argument("module needs 0 < p_lower <= policy_mass <= 1");
    }
  }
}

double modular_success_lower_bound(double alpha, double c_epsilon, const std::vector<double>& p_lower,
                                   const std::vector<int>& lengths) {
  if (p_lower.size() != lengths.size()) throw std::invalid_argument("p_lower and lengths are misaligned");
  if (!(alpha >= 0.0 && alpha < 1.0) || !(c_epsilon >= 0.0 && c_epsilon < 1.0)) {
    throw std::invalid_argument("alpha and c·epsilon must lie in [0,1)");
  }
  double out = (1.0 - alpha) * (1.0 - c_epsilon);
  for (std::size_t k = 0; k < p_lower.size(); ++k) {
    if (!(p_lower[k] > 0.0 && p_lower[k] <= 1.0) || lengths[k] < 1) {
      throw std::invalid_argument("module factors must lie in (0,1] with length >= 1");
    }
    out *= std::pow(p_lower[k], lengths[k]);
  }
  return out;
}

BoundCheckResult simulate_modular(const ModularSpec& spec, std::uint64_t trials, std::uint64_t seed, int threads) {
  validate(spec);
  std::vector<double> lower;
  std::vector<int> lengths;
  double exact = (1.0 - spec.verifier.alpha) * (1.0 - spec.c_epsilon);
  for (const auto& module : spec.modules) {
    lower.push_back(module.p_lower);
    lengths.push_back(module.length);
    exact *= std::pow(module.policy_mass, module.length);
  }
  const double bound = modular_success_lower_bound(spec.verifier.alpha, spec.c_epsilon, lower, lengths);

  const auto trial = [&](std::mt19937_64& rng) {
    bool valid = uniform01(rng) >= spec.c_epsilon;
    std::uint64_t h = mix64(spec.seed);
    for (const auto& module : spec.modules) {
      const auto width = std::max<std::size_t>(1, rounded_count(module.kappa, module.states));
      for (int s = 0; s < module.length; ++s) {
        const auto off = h % module.states;
        std::size_t z;
        if (uniform01(rng) < module.policy_mass) {
          z = (off + uniform_index(rng, width)) % module.states;
        } else {
          z = (off + width + uniform_index(rng, module.states - width)) % module.states;
          valid = false;
        }
        h = extend_hash(h, z);
      }
    }
    const double v = uniform01(rng);
    return valid && v >= spec.verifier.alpha;
  };
  auto result = monte_carlo_check("modular", BoundDirection::lower, bound, run_trials(trials, seed, threads, trial));
  result.exact = exact;
  result.satisfied = result.satisfied && exact >= bound * (1.0 - 1e-12);
  return result;
}

double spurious_suppression_bound(double beta, int modules, double delta_type) {
  if (!(beta >= 0.0 && beta < 1.0) || modules < 1 || !(delta_type >= 0.0 && delta_type < 1.0)) {
    throw std::invalid_argument("spurious bound needs beta, delta in [0,1) and K >= 1");
  }
  return beta + modules * delta_type;
}

void validate(const SpuriousSpec& spec) {
  validate(spec.verifier);
  if (spec.modules < 1 || spec.steps_per_module < 1) throw std::invalid_argument("need K >= 1 and >= 1 step");
  if (!(spec.delta_type >= 0.0 && spec.delta_type < 1.0)) throw std::invalid_argument("delta must lie in [0,1)");
  if (spec.symbolic_irrelevant < 1 || spec.symbolic_irrelevant >= spec.symbolic_states) {
    throw std::invalid_argument("Z_sym must be a proper non-empty subset of the symbolic subspace");
  }
}

BoundCheckResult simulate_spurious(const SpuriousSpec& spec, std::uint64_t trials, std::uint64_t seed, int threads) {
  validate(spec);
  std::vector<std::vector<double>> steps;
  std::mt19937_64 logit_rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.logit_scale);
  for (int s = 0; s < spec.steps_per_module; ++s) {
    std::vector<double> logits(spec.symbolic_states);
    for (double& x : logits) x = normal(logit_rng);
    steps.push_back(softmax(logits));
  }
  const double bound = spurious_suppression_bound(spec.verifier.beta, spec.modules, spec.delta_type);

  const auto trial = [&](std::mt19937_64& rng) {
    bool interface = false;
    for (int k = 0; k < spec.modules; ++k) interface = (uniform01(rng) < spec.delta_type) || interface;
    bool symbolic_spurious = false;
    for (const auto& probs : steps) symbolic_spurious = (categorical(probs, rng) < spec.symbolic_irrelevant) || symbolic_spurious;
    const double v = uniform01(rng);
    const bool accepted = symbolic_spurious ? v < spec.verifier.beta : v >= spec.verifier.alpha;
    return accepted && (interface || symbolic_spurious);
  };
  auto result = monte_carlo_check("spurious", BoundDirection::upper, bound, run_trials(trials, seed, threads, trial));
  if (spec.delta_type == 0.0 && spec.verifier.beta == 0.0) result.exact = 0.0;
  return result;
}

}  // namespace mocot::theory
