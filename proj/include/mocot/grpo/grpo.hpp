#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mocot::grpo {

struct RewardGroup {
  std::string prompt_id;
  std::vector<double> rewards;
};

struct AdvantageSet {
  std::vector<double> advantages;
  bool degenerate = false;
};

inline constexpr double kDegenerateStd = 1e-12;

/// (R - mean) / std with the population std. A group whose std is below
/// kDegenerateStd gets all-zero advantages. Throws std::invalid_argument for
/// fewer than two rewards or a non-finite reward.
AdvantageSet normalize_group(const RewardGroup& group);

/// Â + β(p_ref / p_cur − 1). Throws std::invalid_argument unless p_cur > 0.
double gradient_coefficient(double advantage, double p_ref, double p_cur, double beta);

struct GrpoConfig {
  int group_size = 8;
  double beta = 0.04;
  bool clip = false;
  double clip_range = 0.2;
  int inner_updates = 1;
  int outer_iterations = 20;
  int steps_per_iteration = 10;
  double learning_rate = 0.5;
  std::uint64_t seed = 7;
};

/// Throws std::invalid_argument.
void validate(const GrpoConfig& config);

nlohmann::json to_json(const GrpoConfig& config);
GrpoConfig grpo_config_from_json(const nlohmann::json& value);

/// Softmax policy over a fixed set of output templates per prompt.
class ToyPolicy {
 public:
  ToyPolicy(std::vector<std::string> prompt_ids, std::size_t templates);

  std::size_t prompts() const { return prompt_ids_.size(); }
  std::size_t templates() const { return templates_; }
  const std::string& prompt_id(std::size_t prompt) const { return prompt_ids_.at(prompt); }

  std::vector<double>& logits(std::size_t prompt) { return logits_.at(prompt); }
  const std::vector<double>& logits(std::size_t prompt) const { return logits_.at(prompt); }
  const std::vector<double>& reference_logits(std::size_t prompt) const { return reference_.at(prompt); }

  std::vector<double> probabilities(std::size_t prompt) const;
  std::vector<double> reference_probabilities(std::size_t prompt) const;

  /// π_ref ← π.
  void refresh_reference();
  /// KL(π ‖ π_ref) for one prompt, in nats.
  double kl_to_reference(std::size_t prompt) const;
  double mean_kl_to_reference() const;

 private:
  std::vector<std::string> prompt_ids_;
  std::size_t templates_;
  std::vector<std::vector<double>> logits_;
  std::vector<std::vector<double>> reference_;
};

std::vector<double> softmax(const std::vector<double>& logits);

/// Categorical draw from `probabilities` using 53 bits of one engine output.
std::size_t sample_index(const std::vector<double>& probabilities, std::mt19937_64& rng);

/// G sampled outputs for one prompt and their rewards.
struct SampledGroup {
  std::size_t prompt = 0;
  std::vector<std::size_t> outputs;
  std::vector<double> rewards;
};

struct StepStats {
  double advantage_mean = 0.0;
  double advantage_std = 0.0;
  std::size_t degenerate_groups = 0;
};

/// μ gradient-ascent updates on the logits. For each sampled output o_i:
/// logits += lr/G · GC_i · (e_{o_i} − π). With clipping on, the advantage part
/// of GC_i is dropped once π(o_i)/π_old(o_i) leaves [1−ε, 1+ε] in the
/// advantage's direction. `old_policy` is the snapshot the groups were drawn
/// from. Throws std::runtime_error if a probability underflows.
StepStats grpo_step(ToyPolicy& policy, const ToyPolicy& old_policy, const std::vector<SampledGroup>& groups,
                    const GrpoConfig& config);

/// reward[prompt][template].
using RewardTable = std::vector<std::vector<double>>;

struct LogRow {
  int iteration = 0;
  int step = 0;
  int update = 0;
  double mean_reward = 0.0;
  double reward_std = 0.0;
  double gold_probability = 0.0;
  double malformed_probability = 0.0;
  double kl = 0.0;
  double advantage_mean = 0.0;
  double advantage_std = 0.0;
};

struct AdvantageRecord {
  std::string prompt_id;
  std::string output_id;
  double reward = 0.0;
  double advantage = 0.0;
  bool degenerate = false;
};

struct TrainingLog {
  std::vector<LogRow> rows;                   // one per inner update: N·M·μ rows
  std::vector<double> initial_gold_probability;  // per prompt
  std::vector<double> final_gold_probability;
  std::vector<AdvantageRecord> advantages;     // every sampled output, in sampling order
};

/// CSV with columns step,mean_reward,gold_probability,kl.
std::string golden_curve_csv(const TrainingLog& log);

nlohmann::json to_json(const AdvantageRecord& record);

}  // namespace mocot::grpo
