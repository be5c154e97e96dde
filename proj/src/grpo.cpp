#include "rankrl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rankrl {

void validate_config(const GrpoConfig& config) {
  if (config.group_size < 2)
    throw std::invalid_argument("grpo: group_size must be >= 2");
  if (config.clip_eps <= 0.0 || config.clip_eps >= 1.0)
    throw std::invalid_argument("grpo: clip_eps must be in (0, 1)");
  if (config.kl_beta < 0.0)
    throw std::invalid_argument("grpo: kl_beta must be >= 0");
  if (config.std_floor < 0.0)
    throw std::invalid_argument("grpo: std_floor must be >= 0");
  if (config.batch_size < 1)
    throw std::invalid_argument("grpo: batch_size must be >= 1");
}

std::vector<double> normalize_advantages(const std::vector<double>& rewards,
                                         double std_floor) {
  if (rewards.empty())
    throw std::invalid_argument("normalize_advantages: empty group");
  if (std_floor < 0.0)
    throw std::invalid_argument("normalize_advantages: negative std_floor");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;  // population variance
  const double denom = std::max(std::sqrt(var), std_floor);
  std::vector<double> advantages(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i)
    advantages[i] = (rewards[i] - mean) / denom;
  return advantages;
}

double clipped_term(double ratio, double advantage, double eps) {
  if (!(ratio > 0.0))
    throw std::invalid_argument("clipped_term: ratio must be positive");
  const double clipped =
      std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage;
  return std::min(ratio * advantage, clipped);
}

double kl_penalty(double logp_new, double logp_ref) {
  const double delta = logp_ref - logp_new;
  return std::exp(delta) - delta - 1.0;
}

double grpo_objective(const std::vector<GroupSample>& group,
                      const GrpoConfig& config) {
  if (group.size() != static_cast<size_t>(config.group_size))
    throw std::invalid_argument(
        "grpo_objective: group size " + std::to_string(group.size()) +
        " does not match config group_size " +
        std::to_string(config.group_size));
  double total = 0.0;
  for (const GroupSample& s : group) {
    const double ratio = std::exp(s.logp_new - s.logp_old);
    const double surrogate =
        config.objective_mode == ObjectiveMode::kFull
            ? clipped_term(ratio, s.advantage, config.clip_eps)
            : ratio * s.advantage;
    total += surrogate - config.kl_beta * kl_penalty(s.logp_new, s.logp_ref);
  }
  return total / static_cast<double>(group.size());
}

}  // namespace rankrl
