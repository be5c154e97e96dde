#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rankrl/grpo.hpp"
#include "rankrl/toy.hpp"

namespace rankrl {

struct StepStats {
  int step = 0;
  double mean_reward = 0.0;
  double mean_completion_length = 0.0;
  double objective = 0.0;
};

std::string step_stats_json(const StepStats& stats);

// A rollout group with everything frozen except where the new policy is
// evaluated. Re-evaluating the objective at different weights moves only
// logp_new; labels, advantages, logp_old, and logp_ref stay fixed. This is
// what makes the analytic gradient checkable by finite differences.
struct FrozenRollout {
  const SyntheticTask* task = nullptr;
  std::vector<int> labels;
  std::vector<double> advantages;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};

// Single-update objective over frozen rollouts, averaged over groups:
//   (1/B) sum_b (1/G) sum_i [ exp(logp_new - logp_old) * A_i
//                             - beta * (u - log u - 1) ],  u = exp(ref - new)
double eq2_objective(const ToyPolicy& policy,
                     std::span<const FrozenRollout> rollouts,
                     const GrpoConfig& config);

// Exact gradient of eq2_objective with respect to the policy weights.
std::vector<double> eq2_gradient(const ToyPolicy& policy,
                                 std::span<const FrozenRollout> rollouts,
                                 const GrpoConfig& config);

// GRPO loop for the toy policy: each step samples a fresh group per task
// from the current policy (the old policy, since updates happen once per
// sample batch) and takes one gradient-ascent step on the single-update
// objective. The reference policy is frozen at construction.
class GrpoTrainer {
 public:
  GrpoTrainer(ToyPolicy initial, GrpoConfig config, uint64_t seed);

  StepStats train_step(std::span<const SyntheticTask* const> batch);
  StepStats train_step(std::span<const SyntheticTask> batch);

  const ToyPolicy& policy() const { return policy_; }
  const ToyPolicy& reference() const { return reference_; }
  const GrpoConfig& config() const { return config_; }
  Rng& rng() { return rng_; }
  int steps_done() const { return step_; }

 private:
  ToyPolicy policy_;
  ToyPolicy reference_;
  GrpoConfig config_;
  Rng rng_;
  int step_ = 0;
};

struct ToyTrainConfig {
  GrpoConfig grpo = default_toy_grpo();
  int steps = 2000;
  uint64_t seed = 0;
  int task_count = 256;
  int n_candidates = 20;
  int dim = 8;

  // Table-3-style defaults except the learning rate, which is scaled to the
  // toy policy (1e-5 cannot move an 8-weight softmax in 2000 steps).
  static GrpoConfig default_toy_grpo() {
    GrpoConfig c;
    c.learning_rate = 0.1;
    return c;
  }
};

// Runs the full toy training loop; invokes on_step after every update when
// given. Returns per-step stats.
std::vector<StepStats> train_toy_policy(
    const ToyTrainConfig& config,
    const std::function<void(const StepStats&)>& on_step = {});

}  // namespace rankrl
