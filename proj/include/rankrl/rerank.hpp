#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankrl/backend.hpp"
#include "rankrl/corpus.hpp"
#include "rankrl/prompts.hpp"

namespace rankrl {

struct SelectorDecision {
  int chosen_index = 0;  // position within the compared set
  Completion raw;
  bool fallback_used = false;
  int attempts = 1;  // backend calls spent on this decision
};

struct RerankConfig {
  int top_n_in = 100;   // how much of the first-stage list enters the heap
  int top_k_out = 10;   // how many documents are popped into the head
  int heap_arity = 19;  // parent + arity children = one 20-slot prompt
  PromptMode mode = PromptMode::kRankR1;
  int retry_on_failure = 1;
  double temperature = 0.0;
  PromptBudget budget;
  std::string tag = "rankrl";
};

struct RerankStats {
  int64_t selector_calls = 0;
  int64_t fallbacks = 0;
};

// One setwise comparison: builds the prompt over docs (parent first), asks
// the backend for a single completion (temperature 0 by default), and maps
// the parsed label to an index into docs. Unparseable or out-of-range
// answers are retried up to retry_on_failure times; after that the decision
// falls back to index 0 (the incumbent) with fallback_used set. Backend
// errors propagate. Requires 2..20 documents.
SelectorDecision select_most_relevant(const Query& query,
                                      const std::vector<Document>& docs,
                                      CompletionBackend& selector,
                                      PromptMode mode,
                                      int retry_on_failure = 1,
                                      PromptBudget budget = {},
                                      double temperature = 0.0);

// Heapsort reranking: builds a heap_arity-ary max-heap over the first
// min(N, top_n_in) documents where each sift-down step is one
// select_most_relevant call over parent + children, then pops
// min(top_k_out, heap size) documents into the head of the result. All
// remaining documents follow in first-stage order. Output scores are
// (N - rank + 1) / N, so order is preserved and scores stay in (0, 1].
RankedList rerank(const Query& query, const RankedList& initial,
                  const DocumentStore& corpus, CompletionBackend& selector,
                  const RerankConfig& config, RerankStats* stats = nullptr);

}  // namespace rankrl
