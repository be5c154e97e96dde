#include "rankrl/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace rankrl {

namespace {

double gain(int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; }

double discount(size_t rank) {  // rank is 1-based
  return std::log2(static_cast<double>(rank) + 1.0);
}

}  // namespace

double ndcg_at_k(const RankedList& ranked, const Qrels& qrels, int k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  const auto* judged = qrels.judged(ranked.query_id);
  if (!judged) return 0.0;

  std::vector<int> grades;
  grades.reserve(judged->size());
  for (const auto& [doc_id, rel] : *judged) grades.push_back(rel);
  std::sort(grades.begin(), grades.end(), std::greater<int>());

  double idcg = 0.0;
  for (size_t r = 1; r <= grades.size() && r <= static_cast<size_t>(k); ++r)
    idcg += gain(grades[r - 1]) / discount(r);
  if (idcg <= 0.0) return 0.0;

  double dcg = 0.0;
  const size_t depth =
      std::min(ranked.entries.size(), static_cast<size_t>(k));
  for (size_t r = 1; r <= depth; ++r) {
    auto rel = qrels.relevance(ranked.query_id, ranked.entries[r - 1].doc_id);
    if (rel) dcg += gain(*rel) / discount(r);
  }
  return dcg / idcg;
}

EvalResult mean_ndcg(const std::vector<RankedList>& runs, const Qrels& qrels,
                     int k) {
  std::unordered_map<std::string, const RankedList*> by_query;
  for (const RankedList& list : runs) by_query[list.query_id] = &list;

  EvalResult result;
  for (const std::string& qid : qrels.query_ids()) {
    auto it = by_query.find(qid);
    double score =
        it == by_query.end() ? 0.0 : ndcg_at_k(*it->second, qrels, k);
    result.per_query.push_back(QueryScore{qid, score});
  }
  std::sort(result.per_query.begin(), result.per_query.end(),
            [](const QueryScore& a, const QueryScore& b) {
              return a.query_id < b.query_id;
            });
  if (!result.per_query.empty()) {
    double sum = 0.0;
    for (const QueryScore& q : result.per_query) sum += q.ndcg;
    result.mean_ndcg = sum / static_cast<double>(result.per_query.size());
  }
  return result;
}

}  // namespace rankrl
