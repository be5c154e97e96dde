#include "rankrl/toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "rankrl/parse.hpp"

namespace rankrl {

namespace {

constexpr const char* kThinkText = "scores computed";

// log sum exp with the usual max shift
double logsumexp(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::string format_feature(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

}  // namespace

std::vector<double> ToyPolicy::scores(const SyntheticTask& task) const {
  std::vector<double> s(task.features.size(), 0.0);
  for (size_t k = 0; k < task.features.size(); ++k) {
    const auto& f = task.features[k];
    if (f.size() != weights_.size())
      throw std::invalid_argument("toy policy: feature dim mismatch");
    double dot = 0.0;
    for (size_t j = 0; j < f.size(); ++j) dot += f[j] * weights_[j];
    s[k] = dot;
  }
  return s;
}

std::vector<double> ToyPolicy::label_probs(const SyntheticTask& task) const {
  std::vector<double> s = scores(task);
  double lse = logsumexp(s);
  for (double& x : s) x = std::exp(x - lse);
  return s;
}

double ToyPolicy::logprob(const SyntheticTask& task, int label) const {
  if (label < 1 || label > static_cast<int>(task.features.size()))
    throw std::invalid_argument("toy policy: label out of range");
  std::vector<double> s = scores(task);
  return s[static_cast<size_t>(label - 1)] - logsumexp(s);
}

std::vector<double> ToyPolicy::grad_logprob(const SyntheticTask& task,
                                            int label) const {
  if (label < 1 || label > static_cast<int>(task.features.size()))
    throw std::invalid_argument("toy policy: label out of range");
  std::vector<double> probs = label_probs(task);
  std::vector<double> grad(weights_.size(), 0.0);
  const auto& chosen = task.features[static_cast<size_t>(label - 1)];
  for (size_t j = 0; j < grad.size(); ++j) grad[j] = chosen[j];
  for (size_t k = 0; k < task.features.size(); ++k)
    for (size_t j = 0; j < grad.size(); ++j)
      grad[j] -= probs[k] * task.features[k][j];
  return grad;
}

int ToyPolicy::sample_label(const SyntheticTask& task, Rng& rng) const {
  std::vector<double> probs = label_probs(task);
  double u = uniform_unit(rng);
  double acc = 0.0;
  for (size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(probs.size());  // guard against rounding
}

std::string ToyPolicy::emit_completion(int label) const {
  return render_completion(std::string(kThinkText), label);
}

std::vector<SyntheticTask> make_tasks(uint64_t seed, int count,
                                      int n_candidates, int dim) {
  if (n_candidates < 2 || n_candidates > 20)
    throw std::invalid_argument("make_tasks: n_candidates must be in 2..20");
  if (dim < 1) throw std::invalid_argument("make_tasks: dim must be >= 1");
  if (count < 0) throw std::invalid_argument("make_tasks: negative count");

  Rng rng(seed);
  std::vector<double> hidden(dim);
  for (double& w : hidden) w = standard_normal(rng);

  std::vector<SyntheticTask> tasks;
  tasks.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) {
    SyntheticTask task;
    task.hidden_weights = hidden;
    task.features.assign(static_cast<size_t>(n_candidates),
                         std::vector<double>(static_cast<size_t>(dim)));
    for (auto& row : task.features)
      for (double& x : row) x = standard_normal(rng);

    double best = -std::numeric_limits<double>::infinity();
    int best_k = 1;
    for (int k = 0; k < n_candidates; ++k) {
      double dot = 0.0;
      for (int j = 0; j < dim; ++j)
        dot += task.features[static_cast<size_t>(k)][static_cast<size_t>(j)] *
               hidden[static_cast<size_t>(j)];
      if (dot > best) {  // strict: ties keep the lowest index
        best = dot;
        best_k = k + 1;
      }
    }
    task.gold_label = best_k;

    char qid[32];
    std::snprintf(qid, sizeof(qid), "toy-%06d", t);
    std::string query_text =
        "which candidate item best matches the hidden preference profile?";

    task.docs.reserve(static_cast<size_t>(n_candidates));
    task.instance.query_id = qid;
    task.instance.query_text = query_text;
    task.instance.gold_label = best_k;
    task.instance.seed_used = seed;
    for (int k = 0; k < n_candidates; ++k) {
      std::string doc_id = std::string(qid) + "-c" + std::to_string(k + 1);
      std::string text = "item " + std::to_string(k + 1) + " with attributes:";
      for (int j = 0; j < dim; ++j) {
        text += " ";
        text += format_feature(
            task.features[static_cast<size_t>(k)][static_cast<size_t>(j)]);
      }
      task.instance.candidate_doc_ids.push_back(doc_id);
      task.docs.push_back(Document{std::move(doc_id), std::move(text)});
    }
    task.prompt = build_prompt(Query{qid, query_text}, task.docs,
                               PromptMode::kRankR1);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<GroupSample> policy_group_rollout(const ToyPolicy& policy,
                                              const SyntheticTask& task,
                                              int group_size, Rng& rng,
                                              const ToyPolicy* reference,
                                              double std_floor) {
  if (group_size < 1)
    throw std::invalid_argument("policy_group_rollout: group_size must be >= 1");
  const int n = static_cast<int>(task.features.size());
  std::vector<GroupSample> group(static_cast<size_t>(group_size));
  std::vector<double> rewards(static_cast<size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    int label = policy.sample_label(task, rng);
    GroupSample& s = group[static_cast<size_t>(i)];
    s.completion = Completion{policy.emit_completion(label),
                              FinishReason::kStop};
    ParsedAnswer parsed =
        parse_completion(s.completion.text, PromptMode::kRankR1);
    s.reward = compute_reward(parsed, task.gold_label, n);
    s.logp_new = policy.logprob(task, label);
    s.logp_old = s.logp_new;  // sampled from the current policy
    s.logp_ref = reference ? reference->logprob(task, label) : s.logp_new;
    rewards[static_cast<size_t>(i)] = s.reward;
  }
  std::vector<double> advantages = normalize_advantages(rewards, std_floor);
  for (int i = 0; i < group_size; ++i)
    group[static_cast<size_t>(i)].advantage =
        advantages[static_cast<size_t>(i)];
  return group;
}

}  // namespace rankrl
