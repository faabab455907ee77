#include "mocot/grpo/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mocot::grpo {

AdvantageSet normalize_group(const RewardGroup& group) {
  const auto& r = group.rewards;
  if (r.size() < 2) throw std::invalid_argument("a reward group needs at least two rewards");
  for (double x : r) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite reward in group " + group.prompt_id);
  }
  const double n = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double var = 0.0;
  for (double x : r) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);

  AdvantageSet out;
  out.advantages.assign(r.size(), 0.0);
  if (sd < kDegenerateStd) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < r.size(); ++i) out.advantages[i] = (r[i] - mean) / sd;
  return out;
}

double gradient_coefficient(double advantage, double p_ref, double p_cur, double beta) {
  if (!(p_cur > 0.0)) throw std::invalid_argument("gradient coefficient needs p_cur > 0");
  return advantage + beta * (p_ref / p_cur - 1.0);
}

void validate(const GrpoConfig& config) {
  if (config.group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (!(config.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(config.clip_range > 0.0)) throw std::invalid_argument("clip_range must be > 0");
  if (config.inner_updates < 1) throw std::invalid_argument("inner_updates must be >= 1");
  if (config.outer_iterations < 1) throw std::invalid_argument("outer_iterations must be >= 1");
  if (config.steps_per_iteration < 1) throw std::invalid_argument("steps_per_iteration must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
}

nlohmann::json to_json(const GrpoConfig& config) {
  return {{"group_size", config.group_size},
          {"beta", config.beta},
          {"clip", config.clip},
          {"clip_range", config.clip_range},
          {"inner_updates", config.inner_updates},
          {"outer_iterations", config.outer_iterations},
          {"steps_per_iteration", config.steps_per_iteration},
          {"learning_rate", config.learning_rate},
          {"seed", config.seed}};
}

GrpoConfig grpo_config_from_json(const nlohmann::json& value) {
  GrpoConfig config;
  config.group_size = value.value("group_size", config.group_size);
  config.beta = value.value("beta", config.beta);
  config.clip = value.value("clip", config.clip);
  config.clip_range = value.value("clip_range", config.clip_range);
  config.inner_updates = value.value("inner_updates", config.inner_updates);
  config.outer_iterations = value.value("outer_iterations", config.outer_iterations);
  config.steps_per_iteration = value.value("steps_per_iteration", config.steps_per_iteration);
  config.learning_rate = value.value("learning_rate", config.learning_rate);
  config.seed = value.value("seed", config.seed);
  validate(config);
  return config;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += out[i] = std::exp(logits[i] - top);
  for (double& p : out) p /= z;
  return out;
}

ToyPolicy::ToyPolicy(std::vector<std::string> prompt_ids, std::size_t templates)
    : prompt_ids_(std::move(prompt_ids)),
      templates_(templates),
      logits_(prompt_ids_.size(), std::vector<double>(templates, 0.0)),
      reference_(logits_) {
  if (templates < 2) throw std::invalid_argument("a toy policy needs at least two templates");
}

std::vector<double> ToyPolicy::probabilities(std::size_t prompt) const { return softmax(logits_.at(prompt)); }

std::vector<double> ToyPolicy::reference_probabilities(std::size_t prompt) const {
  return softmax(reference_.at(prompt));
}

void ToyPolicy::refresh_reference() { reference_ = logits_; }

double ToyPolicy::kl_to_reference(std::size_t prompt) const {
  const auto p = probabilities(prompt);
  const auto q = reference_probabilities(prompt);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return std::max(kl, 0.0);
}

double ToyPolicy::mean_kl_to_reference() const {
  double total = 0.0;
  for (std::size_t prompt = 0; prompt < prompts(); ++prompt) total += kl_to_reference(prompt);
  return total / static_cast<double>(prompts());
}

std::size_t sample_index(const std::vector<double>& probabilities, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return probabilities.size() - 1;
}

StepStats grpo_step(ToyPolicy& policy, const ToyPolicy& old_policy, const std::vector<SampledGroup>& groups,
                    const GrpoConfig& config) {
  validate(config);
  std::vector<AdvantageSet> advantages;
  StepStats stats;
  std::vector<double> all;
  for (const auto& group : groups) {
    if (group.prompt >= policy.prompts() || group.outputs.size() != group.rewards.size()) {
      throw std::invalid_argument("sampled group does not match the policy shape");
    }
    for (auto o : group.outputs) {
      if (o >= policy.templates()) throw std::invalid_argument("sampled output outside the template set");
    }
    advantages.push_back(normalize_group({policy.prompt_id(group.prompt), group.rewards}));
    if (advantages.back().degenerate) ++stats.degenerate_groups;
    all.insert(all.end(), advantages.back().advantages.begin(), advantages.back().advantages.end());
  }
  if (!all.empty()) {
    const double n = static_cast<double>(all.size());
    stats.advantage_mean = std::accumulate(all.begin(), all.end(), 0.0) / n;
    double var = 0.0;
    for (double a : all) var += (a - stats.advantage_mean) * (a - stats.advantage_mean);
    stats.advantage_std = std::sqrt(var / n);
  }

  for (int u = 0; u < config.inner_updates; ++u) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& group = groups[g];
      const auto pi = policy.probabilities(group.prompt);
      const auto ref = policy.reference_probabilities(group.prompt);
      const auto old = old_policy.probabilities(group.prompt);
      std::vector<double> grad(policy.templates(), 0.0);
      for (std::size_t i = 0; i < group.outputs.size(); ++i) {
        const auto o = group.outputs[i];
        double advantage = advantages[g].advantages[i];
        if (config.clip) {
          const double ratio = pi[o] / old[o];
          if ((advantage > 0.0 && ratio > 1.0 + config.clip_range) ||
              (advantage < 0.0 && ratio < 1.0 - config.clip_range)) {
            advantage = 0.0;
          }
        }
        const double gc = gradient_coefficient(advantage, ref[o], pi[o], config.beta);
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] -= gc * pi[k];
        grad[o] += gc;
      }
      auto& logits = policy.logits(group.prompt);
      const double scale = config.learning_rate / static_cast<double>(group.outputs.size());
      for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += scale * grad[k];
      for (double p : policy.probabilities(group.prompt)) {
        if (!(p > 1e-300) || !std::isfinite(p)) throw std::runtime_error("toy policy probability underflowed");
      }
    }
  }
  return stats;
}

std::string golden_curve_csv(const TrainingLog& log) {
  std::ostringstream out;
  out << "step,mean_reward,gold_probability,kl\n";
  char line[160];
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const auto& row = log.rows[i];
    std::snprintf(line, sizeof line, "%zu,%.12f,%.12f,%.12e\n", i + 1, row.mean_reward, row.gold_probability,
                  row.kl);
    out << line;
  }
  return out.str();
}

nlohmann::json to_json(const AdvantageRecord& record) {
  return {{"prompt_id", record.prompt_id},
          {"output_id", record.output_id},
          {"reward", record.reward},
          {"advantage", record.advantage},
          {"degenerate", record.degenerate}};
}

}  // namespace mocot::grpo
