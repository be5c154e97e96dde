#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankrl/grpo.hpp"
#include "rankrl/prompts.hpp"
#include "rankrl/rng.hpp"
#include "rankrl/traindata.hpp"

namespace rankrl {

// Synthetic most-relevant-selection task. The gold label is the argmax of
// feature scores under a hidden weight vector shared by the whole task set
// (ties go to the lowest index). `instance`, `docs`, and `prompt` carry a
// textual rendering so the training loop exercises the same prompt ->
// completion -> parse -> reward path as the real pipeline.
struct SyntheticTask {
  std::vector<std::vector<double>> features;  // n_candidates x dim
  int gold_label = 0;                         // 1-based
  std::vector<double> hidden_weights;
  TrainingInstance instance;
  std::vector<Document> docs;
  RenderedPrompt prompt;
};

// Softmax-linear policy over candidate labels. Emits whole completions of
// the form "<think>...</think> <answer>[k]</answer>"; the completion
// log-probability equals the log-softmax of the emitted label, which makes
// every GRPO quantity exactly computable.
class ToyPolicy {
 public:
  explicit ToyPolicy(int dim) : weights_(dim, 0.0) {}
  explicit ToyPolicy(std::vector<double> weights)
      : weights_(std::move(weights)) {}

  int dim() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& weights() { return weights_; }

  std::vector<double> scores(const SyntheticTask& task) const;       // F w
  std::vector<double> label_probs(const SyntheticTask& task) const;  // softmax
  double logprob(const SyntheticTask& task, int label) const;
  // d log pi(label) / d w = F_label - E_pi[F]
  std::vector<double> grad_logprob(const SyntheticTask& task, int label) const;
  int sample_label(const SyntheticTask& task, Rng& rng) const;  // 1-based
  std::string emit_completion(int label) const;

 private:
  std::vector<double> weights_;
};

// Deterministic task set: one hidden weight vector per set, i.i.d. standard
// normal features per candidate. n_candidates must be in 2..20.
std::vector<SyntheticTask> make_tasks(uint64_t seed, int count,
                                      int n_candidates = 20, int dim = 8);

// Samples group_size completions from the policy, scores them through
// parse_completion/compute_reward, and fills normalized advantages.
// logp_new == logp_old by construction (samples come from the current
// policy); logp_ref is evaluated under `reference` when given, else under
// the sampling policy itself.
std::vector<GroupSample> policy_group_rollout(
    const ToyPolicy& policy, const SyntheticTask& task, int group_size,
    Rng& rng, const ToyPolicy* reference = nullptr,
    double std_floor = 1e-8);

}  // namespace rankrl
