#pragma once

#include <string>
#include <vector>

#include "rankrl/corpus.hpp"

namespace rankrl {

// nDCG@k with gain 2^rel - 1 and discount log2(rank + 1). Unjudged documents
// gain nothing; the ideal ordering comes from the query's qrels sorted by
// grade. Returns 0 when the query has no relevant documents.
double ndcg_at_k(const RankedList& ranked, const Qrels& qrels, int k = 10);

struct QueryScore {
  std::string query_id;
  double ndcg = 0.0;
};

struct EvalResult {
  double mean_ndcg = 0.0;
  std::vector<QueryScore> per_query;  // sorted by query_id
};

// Unweighted mean over every query in the qrels. Queries judged but missing
// from the run score 0; run queries without judgments are ignored.
EvalResult mean_ndcg(const std::vector<RankedList>& runs, const Qrels& qrels,
                     int k = 10);

}  // namespace rankrl
