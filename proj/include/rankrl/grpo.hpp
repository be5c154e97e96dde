#pragma once

#include <vector>

#include "rankrl/backend.hpp"

namespace rankrl {

// One rollout within a group. Log-probabilities are whole-completion totals.
struct GroupSample {
  Completion completion;
  double reward = 0.0;
  double advantage = 0.0;
  double logp_new = 0.0;
  double logp_old = 0.0;
  double logp_ref = 0.0;
};

enum class ObjectiveMode { kFull, kSimplified };

struct GrpoConfig {
  int group_size = 8;
  double clip_eps = 0.2;
  double kl_beta = 0.04;
  double learning_rate = 1e-5;
  int batch_size = 64;
  double std_floor = 1e-8;
  ObjectiveMode objective_mode = ObjectiveMode::kSimplified;
};

void validate_config(const GrpoConfig& config);  // throws on bad fields

// Group-normalized advantages: (r_i - mean) / max(pop_std, std_floor).
// A zero-variance group yields exactly zero advantages. Throws on an empty
// group or a negative floor.
std::vector<double> normalize_advantages(const std::vector<double>& rewards,
                                         double std_floor = 1e-8);

// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A). Throws unless ratio > 0.
double clipped_term(double ratio, double advantage, double eps);

// Nonnegative KL estimate u - log u - 1 with u = exp(logp_ref - logp_new);
// zero exactly when the two log-probabilities agree.
double kl_penalty(double logp_new, double logp_ref);

// Group objective. Full mode applies the clipped surrogate; simplified mode
// is the single-update form where the ratio enters unclipped. Expects
// advantages already normalized within the group and group size matching the
// config.
double grpo_objective(const std::vector<GroupSample>& group,
                      const GrpoConfig& config);

}  // namespace rankrl
