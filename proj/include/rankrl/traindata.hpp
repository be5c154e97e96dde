#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rankrl/corpus.hpp"
#include "rankrl/prompts.hpp"

namespace rankrl {

// One training unit: a query, 20 candidates, and the gold label position.
struct TrainingInstance {
  std::string query_id;
  std::string query_text;
  std::vector<std::string> candidate_doc_ids;
  int gold_label = 0;  // 1-based position of the relevant document
  uint64_t seed_used = 0;
};

// Throws unless the instance has exactly `expected_candidates` distinct
// candidates and gold_label within range.
void validate_instance(const TrainingInstance& instance,
                       int expected_candidates = 20);

struct BuildStats {
  size_t queries_seen = 0;
  size_t instances_built = 0;
  size_t skipped_no_relevant = 0;  // no judged-relevant doc with corpus text
  size_t skipped_small_pool = 0;   // fewer than 19 usable negatives
  size_t skipped_no_query_text = 0;
};

// Per query in the run (file order): takes the top-100 entries, drops every
// judged-relevant document and documents without corpus text, samples 19
// negatives without replacement, inserts the first-listed relevant document
// that has corpus text, and shuffles the 20. Queries that cannot satisfy
// this are skipped and counted, never fatal. Sampling is driven per query by
// seed XOR fnv1a64(query_id), so results do not depend on query order.
std::vector<TrainingInstance> build_grpo_instances(
    const Qrels& qrels, const std::vector<RankedList>& run,
    const DocumentStore& corpus, const std::vector<Query>& queries,
    uint64_t seed, BuildStats* stats = nullptr);

void write_instances_jsonl(const std::vector<TrainingInstance>& instances,
                           const std::string& path);
std::vector<TrainingInstance> load_instances_jsonl(const std::string& path);

// Supervised pair: prompt plus the literal answer target. `text` is the full
// training sequence system + "\n\n" + user + "\n\n" + target, and
// [answer_begin, answer_end) slices exactly the target out of it, so a
// trainer can mask the loss to the answer span.
struct SftExample {
  std::string query_id;
  std::string system;
  std::string user;
  std::string target;
  std::string text;
  size_t answer_begin = 0;
  size_t answer_end = 0;
};

std::vector<SftExample> build_sft_examples(
    std::span<const TrainingInstance> instances, const DocumentStore& corpus,
    PromptMode mode = PromptMode::kSetwise, PromptBudget budget = {});

void write_sft_jsonl(const std::vector<SftExample>& examples,
                     const std::string& path);

}  // namespace rankrl
