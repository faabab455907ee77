#include "mocot/grpo/toy_task.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mocot::grpo {

ToyTask ToyTask::standard() {
  ToyTask task;
  for (char c = 'A'; c <= 'D'; ++c) {
    task.prompt_ids.push_back(std::string("toy-") + static_cast<char>(std::tolower(c)));
    task.gold.emplace_back(c);
  }
  return task;
}

std::string ToyTask::template_id(std::size_t t) const {
  return template_label(t).str() + (template_malformed(t) ? "-malformed" : "-well-formed");
}

std::string ToyTask::reasoning(std::size_t prompt, parse::OptionLabel label) const {
  return "Panel cues in " + prompt_ids.at(prompt) + " point to option " + label.str() + " as the intended reading.";
}

std::string ToyTask::template_text(std::size_t prompt, std::size_t t) const {
  const auto label = template_label(t);
  const std::string body = "<REASONING>" + reasoning(prompt, label) + "</REASONING><ANSWER>" + label.str() +
                           "</ANSWER>";
  return template_malformed(t) ? "I think " + body : body;
}

std::vector<pipeline::AnswerOption> ToyTask::answer_options() const {
  std::vector<pipeline::AnswerOption> out;
  for (std::size_t i = 0; i < options; ++i) {
    const parse::OptionLabel label(static_cast<char>('A' + i));
    out.push_back({label, "reading " + label.str()});
  }
  return out;
}

namespace {

std::optional<char> label_after(const std::string& text, const std::string& marker) {
  const auto at = text.find(marker);
  if (at == std::string::npos) return std::nullopt;
  for (std::size_t i = at + marker.size(); i < text.size(); ++i) {
    if (std::isupper(static_cast<unsigned char>(text[i]))) return text[i];
    if (!std::isspace(static_cast<unsigned char>(text[i]))) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

backend::ChatResponse RuleCheckerBackend::do_complete(const std::vector<backend::ChatMessage>& messages,
                                                      const backend::BackendConfig&, const backend::CallOptions&) {
  std::string text;
  for (const auto& part : messages.back().parts) {
    if (part.kind() == backend::ContentPart::Kind::text) text += part.text();
  }
  const auto cot_at = text.find("cot2:");
  const auto claimed = label_after(text, "Final answer:");
  const auto supported = cot_at == std::string::npos ? std::nullopt : label_after(text.substr(cot_at), "option ");
  const char matched = supported.value_or(claimed.value_or('A'));
  const bool consistent = supported.has_value() && claimed.has_value() && *supported == *claimed;
  nlohmann::json verdict = {{"Matched Answer", std::string(1, matched)},
                            {"Is Consistent", consistent},
                            {"Justification", consistent ? "The reasoning names the final answer."
                                                         : "The reasoning names a different option."},
                            {"Corrected CoT2", ""}};
  return {"```json\n" + verdict.dump(2) + "\n```", backend::FinishReason::stop, std::nullopt};
}

RewardTable vera_reward_table(const ToyTask& task, const reward::VeraWeights& weights, backend::ChatBackend& checker,
                              const backend::BackendConfig& checker_config) {
  const auto options = task.answer_options();
  std::vector<parse::OptionLabel> labels;
  for (const auto& option : options) labels.push_back(option.label);
  const backend::RetryPolicy retry{1, std::chrono::milliseconds(0), 1.0, std::chrono::milliseconds(1000)};

  RewardTable table(task.prompt_ids.size(), std::vector<double>(task.templates(), 0.0));
  for (std::size_t p = 0; p < task.prompt_ids.size(); ++p) {
    const reward::ReferenceRecord reference{task.gold[p].str(), task.reasoning(p, task.gold[p])};
    const reward::LogicFn logic = [&](const std::string& reasoning, const std::string& predicted) {
      return reward::reward_logic(reasoning, parse::OptionLabel(predicted.front()), options, checker, checker_config,
                                  retry);
    };
    for (std::size_t t = 0; t < task.templates(); ++t) {
      table[p][t] = reward::score_output(task.template_text(p, t), reference, reward::RewardMode::mcq_tagged, weights,
                                         logic, labels)
                        .breakdown.total;
    }
  }
  return table;
}

RewardTable constant_reward_table(const ToyTask& task, double value) {
  return RewardTable(task.prompt_ids.size(), std::vector<double>(task.templates(), value));
}

TrainingLog train_toy(const ToyTask& task, const GrpoConfig& config, const RewardTable& rewards) {
  validate(config);
  if (rewards.size() != task.prompt_ids.size()) throw std::invalid_argument("reward table does not match the task");
  for (const auto& row : rewards) {
    if (row.size() != task.templates()) throw std::invalid_argument("reward table does not match the task");
  }

  ToyPolicy policy(task.prompt_ids, task.templates());
  std::mt19937_64 rng(config.seed);
  const auto gold_probability = [&](std::size_t p) {
    return policy.probabilities(p)[ToyTask::template_of(task.gold[p], false)];
  };
  const auto mean_over_prompts = [&](auto fn) {
    double total = 0.0;
    for (std::size_t p = 0; p < policy.prompts(); ++p) total += fn(p);
    return total / static_cast<double>(policy.prompts());
  };

  TrainingLog log;
  for (std::size_t p = 0; p < policy.prompts(); ++p) log.initial_gold_probability.push_back(gold_probability(p));

  for (int iteration = 0; iteration < config.outer_iterations; ++iteration) {
    policy.refresh_reference();
    for (int step = 0; step < config.steps_per_iteration; ++step) {
      const ToyPolicy old_policy = policy;
      std::vector<SampledGroup> groups;
      std::vector<double> batch;
      for (std::size_t p = 0; p < policy.prompts(); ++p) {
        const auto probs = old_policy.probabilities(p);
        SampledGroup group{p, {}, {}};
        for (int i = 0; i < config.group_size; ++i) {
          const auto o = sample_index(probs, rng);
          group.outputs.push_back(o);
          group.rewards.push_back(rewards[p][o]);
          batch.push_back(rewards[p][o]);
        }
        const auto adv = normalize_group({task.prompt_ids[p], group.rewards});
        for (std::size_t i = 0; i < group.outputs.size(); ++i) {
          log.advantages.push_back({task.prompt_ids[p], task.template_id(group.outputs[i]), group.rewards[i],
                                    adv.advantages[i], adv.degenerate});
        }
        groups.push_back(std::move(group));
      }
      const double n = static_cast<double>(batch.size());
      const double mean = std::accumulate(batch.begin(), batch.end(), 0.0) / n;
      double var = 0.0;
      for (double r : batch) var += (r - mean) * (r - mean);

      for (int u = 0; u < config.inner_updates; ++u) {
        GrpoConfig single = config;
        single.inner_updates = 1;
        const auto stats = grpo_step(policy, old_policy, groups, single);
        LogRow row;
        row.iteration = iteration;
        row.step = step;
        row.update = u;
        row.mean_reward = mean;
        row.reward_std = std::sqrt(var / n);
        row.gold_probability = mean_over_prompts(gold_probability);
        row.malformed_probability = mean_over_prompts([&](std::size_t p) {
          const auto probs = policy.probabilities(p);
          double total = 0.0;
          for (std::size_t t = 0; t < probs.size(); ++t) {
            if (ToyTask::template_malformed(t)) total += probs[t];
          }
          return total;
        });
        row.kl = policy.mean_kl_to_reference();
        row.advantage_mean = stats.advantage_mean;
        row.advantage_std = stats.advantage_std;
        log.rows.push_back(row);
      }
    }
  }
  for (std::size_t p = 0; p < policy.prompts(); ++p) log.final_gold_probability.push_back(gold_probability(p));
  return log;
}

}  // namespace mocot::grpo
