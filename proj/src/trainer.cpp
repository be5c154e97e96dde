#include "rankrl/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace rankrl {

std::string step_stats_json(const StepStats& stats) {
  nlohmann::json obj = {{"step", stats.step},
                        {"mean_reward", stats.mean_reward},
                        {"mean_completion_length",
                         stats.mean_completion_length},
                        {"objective", stats.objective}};
  return obj.dump();
}

double eq2_objective(const ToyPolicy& policy,
                     std::span<const FrozenRollout> rollouts,
                     const GrpoConfig& config) {
  if (rollouts.empty())
    throw std::invalid_argument("eq2_objective: no rollouts");
  double total = 0.0;
  for (const FrozenRollout& r : rollouts) {
    double group = 0.0;
    for (size_t i = 0; i < r.labels.size(); ++i) {
      const double logp_new = policy.logprob(*r.task, r.labels[i]);
      const double ratio = std::exp(logp_new - r.logp_old[i]);
      group += ratio * r.advantages[i] -
               config.kl_beta * kl_penalty(logp_new, r.logp_ref[i]);
    }
    total += group / static_cast<double>(r.labels.size());
  }
  return total / static_cast<double>(rollouts.size());
}

std::vector<double> eq2_gradient(const ToyPolicy& policy,
                                 std::span<const FrozenRollout> rollouts,
                                 const GrpoConfig& config) {
  if (rollouts.empty())
    throw std::invalid_argument("eq2_gradient: no rollouts");
  std::vector<double> grad(static_cast<size_t>(policy.dim()), 0.0);
  for (const FrozenRollout& r : rollouts) {
    const double group_scale =
        1.0 / (static_cast<double>(r.labels.size()) *
               static_cast<double>(rollouts.size()));
    for (size_t i = 0; i < r.labels.size(); ++i) {
      const double logp_new = policy.logprob(*r.task, r.labels[i]);
      const double ratio = std::exp(logp_new - r.logp_old[i]);
      const double u = std::exp(r.logp_ref[i] - logp_new);
      // d/dw [ratio * A] = ratio * A * dlogp ; d/dw kl = (1 - u) * dlogp
      const double coeff =
          ratio * r.advantages[i] - config.kl_beta * (1.0 - u);
      std::vector<double> dlogp = policy.grad_logprob(*r.task, r.labels[i]);
      for (size_t j = 0; j < grad.size(); ++j)
        grad[j] += group_scale * coeff * dlogp[j];
    }
  }
  return grad;
}

GrpoTrainer::GrpoTrainer(ToyPolicy initial, GrpoConfig config, uint64_t seed)
    : policy_(initial), reference_(std::move(initial)),
      config_(config), rng_(seed) {
  validate_config(config_);
}

StepStats GrpoTrainer::train_step(std::span<const SyntheticTask* const> batch) {
  if (batch.empty())
    throw std::invalid_argument("train_step: empty batch");

  std::vector<FrozenRollout> rollouts;
  rollouts.reserve(batch.size());
  double reward_sum = 0.0;
  double length_sum = 0.0;
  double objective_sum = 0.0;
  size_t sample_count = 0;

  for (const SyntheticTask* task : batch) {
    std::vector<GroupSample> group = policy_group_rollout(
        policy_, *task, config_.group_size, rng_, &reference_,
        config_.std_floor);
    FrozenRollout frozen;
    frozen.task = task;
    for (const GroupSample& s : group) {
      ParsedAnswer parsed =
          parse_completion(s.completion.text, PromptMode::kRankR1);
      frozen.labels.push_back(parsed.label);
      frozen.advantages.push_back(s.advantage);
      frozen.logp_old.push_back(s.logp_old);
      frozen.logp_ref.push_back(s.logp_ref);
      reward_sum += s.reward;
      length_sum += static_cast<double>(s.completion.text.size());
      ++sample_count;
    }
    objective_sum += grpo_objective(group, config_);
    rollouts.push_back(std::move(frozen));
  }

  std::vector<double> grad = eq2_gradient(policy_, rollouts, config_);
  for (double g : grad)
    if (!std::isfinite(g))
      throw std::runtime_error(
          "train_step: non-finite gradient at step " + std::to_string(step_) +
          " (learning rate too large or degenerate batch)");
  std::vector<double>& w = policy_.weights();
  for (size_t j = 0; j < w.size(); ++j)
    w[j] += config_.learning_rate * grad[j];

  ++step_;
  StepStats stats;
  stats.step = step_;
  stats.mean_reward = reward_sum / static_cast<double>(sample_count);
  stats.mean_completion_length =
      length_sum / static_cast<double>(sample_count);
  stats.objective = objective_sum / static_cast<double>(batch.size());
  return stats;
}

StepStats GrpoTrainer::train_step(std::span<const SyntheticTask> batch) {
  std::vector<const SyntheticTask*> ptrs;
  ptrs.reserve(batch.size());
  for (const SyntheticTask& t : batch) ptrs.push_back(&t);
  return train_step(std::span<const SyntheticTask* const>(ptrs));
}

std::vector<StepStats> train_toy_policy(
    const ToyTrainConfig& config,
    const std::function<void(const StepStats&)>& on_step) {
  std::vector<SyntheticTask> tasks = make_tasks(
      config.seed, config.task_count, config.n_candidates, config.dim);
  if (tasks.empty()) throw std::invalid_argument("train_toy_policy: no tasks");

  GrpoTrainer trainer(ToyPolicy(config.dim), config.grpo,
                      config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<StepStats> history;
  history.reserve(static_cast<size_t>(config.steps));
  std::vector<const SyntheticTask*> batch(
      static_cast<size_t>(config.grpo.batch_size));
  for (int s = 0; s < config.steps; ++s) {
    for (auto& slot : batch)
      slot = &tasks[static_cast<size_t>(
          uniform_below(trainer.rng(), tasks.size()))];
    StepStats stats = trainer.train_step(
        std::span<const SyntheticTask* const>(batch));
    if (on_step) on_step(stats);
    history.push_back(stats);
  }
  return history;
}

}  // namespace rankrl
