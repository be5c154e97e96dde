#include "rankrl/rerank.hpp"

#include <algorithm>
#include <stdexcept>

#include "rankrl/parse.hpp"

namespace rankrl {

namespace {

constexpr int kMaxCompareSet = 20;

void check_config(const RerankConfig& config) {
  if (config.heap_arity < 1)
    throw std::invalid_argument("rerank: heap_arity must be >= 1");
  if (config.heap_arity + 1 > kMaxCompareSet)
    throw std::invalid_argument(
        "rerank: heap_arity + 1 documents per call must not exceed 20");
  if (config.top_k_out < 1)
    throw std::invalid_argument("rerank: top_k_out must be >= 1");
  if (config.top_n_in < 1)
    throw std::invalid_argument("rerank: top_n_in must be >= 1");
  if (config.top_k_out > config.top_n_in)
    throw std::invalid_argument("rerank: top_k_out must be <= top_n_in");
  if (config.retry_on_failure < 0)
    throw std::invalid_argument("rerank: retry_on_failure must be >= 0");
}

// Heap state shared by build and pop phases. heap_ holds positions into the
// document array so swaps stay cheap.
struct SetwiseHeap {
  const Query& query;
  const std::vector<Document>& docs;
  CompletionBackend& selector;
  const RerankConfig& config;
  RerankStats* stats;
  std::vector<int> heap;
  size_t size;

  SetwiseHeap(const Query& q, const std::vector<Document>& d,
              CompletionBackend& s, const RerankConfig& c, RerankStats* st)
      : query(q), docs(d), selector(s), config(c), stats(st),
        heap(d.size()), size(d.size()) {
    for (size_t i = 0; i < heap.size(); ++i) heap[i] = static_cast<int>(i);
  }

  void sift_down(size_t node) {
    const size_t arity = static_cast<size_t>(config.heap_arity);
    while (true) {
      size_t first_child = arity * node + 1;
      if (first_child >= size) return;
      size_t last_child = std::min(arity * node + arity, size - 1);

      std::vector<Document> compared;
      std::vector<size_t> slots;  // heap slot behind each label
      compared.reserve(last_child - first_child + 2);
      compared.push_back(docs[heap[node]]);  // incumbent parent is label [1]
      slots.push_back(node);
      for (size_t c = first_child; c <= last_child; ++c) {
        compared.push_back(docs[heap[c]]);
        slots.push_back(c);
      }

      SelectorDecision decision = select_most_relevant(
          query, compared, selector, config.mode, config.retry_on_failure,
          config.budget, config.temperature);
      if (stats) {
        stats->selector_calls += decision.attempts;
        if (decision.fallback_used) stats->fallbacks += 1;
      }
      if (decision.chosen_index == 0) return;  // parent stays on top
      size_t winner = slots[static_cast<size_t>(decision.chosen_index)];
      std::swap(heap[node], heap[winner]);
      node = winner;
    }
  }

  void build() {
    if (size < 2) return;
    size_t last_internal =
        (size - 2) / static_cast<size_t>(config.heap_arity);
    for (size_t i = last_internal + 1; i-- > 0;) sift_down(i);
  }

  // Removes and returns the root document position.
  int pop() {
    int top = heap[0];
    heap[0] = heap[size - 1];
    --size;
    if (size > 1) sift_down(0);
    return top;
  }
};

}  // namespace

SelectorDecision select_most_relevant(const Query& query,
                                      const std::vector<Document>& docs,
                                      CompletionBackend& selector,
                                      PromptMode mode, int retry_on_failure,
                                      PromptBudget budget,
                                      double temperature) {
  if (docs.size() < 2)
    throw std::invalid_argument(
        "select_most_relevant: need at least 2 documents");
  if (docs.size() > kMaxCompareSet)
    throw std::invalid_argument(
        "select_most_relevant: at most 20 documents per call");

  RenderedPrompt prompt = build_prompt(query, docs, mode, budget);
  SamplingParams params;
  params.temperature = temperature;
  params.group_size = 1;

  SelectorDecision decision;
  for (int attempt = 0; attempt <= retry_on_failure; ++attempt) {
    std::vector<Completion> got = selector.complete(prompt, params);
    decision.raw = got.at(0);
    decision.attempts = attempt + 1;
    ParsedAnswer parsed = parse_completion(decision.raw.text, mode);
    if (parsed.well_formed && parsed.label >= 1 &&
        parsed.label <= static_cast<int>(docs.size())) {
      decision.chosen_index = parsed.label - 1;
      decision.fallback_used = false;
      return decision;
    }
  }
  decision.chosen_index = 0;  // keep the incumbent
  decision.fallback_used = true;
  return decision;
}

RankedList rerank(const Query& query, const RankedList& initial,
                  const DocumentStore& corpus, CompletionBackend& selector,
                  const RerankConfig& config, RerankStats* stats) {
  check_config(config);
  if (initial.entries.empty())
    throw std::invalid_argument("rerank: initial ranking is empty");

  const size_t n_total = initial.entries.size();
  const size_t n_heap =
      std::min(n_total, static_cast<size_t>(config.top_n_in));

  std::vector<Document> docs;
  docs.reserve(n_heap);
  for (size_t i = 0; i < n_heap; ++i)
    docs.push_back(corpus.at(initial.entries[i].doc_id));

  std::vector<int> head;  // popped positions, best first
  if (n_heap == 1) {
    head.push_back(0);
  } else {
    SetwiseHeap heap(query, docs, selector, config, stats);
    heap.build();
    size_t k = std::min(n_heap, static_cast<size_t>(config.top_k_out));
    head.reserve(k);
    for (size_t i = 0; i < k && heap.size > 0; ++i) head.push_back(heap.pop());
  }

  std::vector<bool> popped(n_total, false);
  for (int pos : head) popped[static_cast<size_t>(pos)] = true;

  RankedList out;
  out.query_id = query.query_id;
  out.entries.reserve(n_total);
  auto append = [&](size_t pos) {
    RunEntry e;
    e.query_id = query.query_id;
    e.doc_id = initial.entries[pos].doc_id;
    e.rank = static_cast<int>(out.entries.size()) + 1;
    e.score = static_cast<double>(n_total - out.entries.size()) /
              static_cast<double>(n_total);
    e.tag = config.tag;
    out.entries.push_back(std::move(e));
  };
  for (int pos : head) append(static_cast<size_t>(pos));
  for (size_t i = 0; i < n_total; ++i)
    if (!popped[i]) append(i);
  return out;
}

}  // namespace rankrl
