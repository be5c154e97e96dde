#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rankrl {

struct Document {
  std::string doc_id;
  std::string text;
};

struct Query {
  std::string query_id;
  std::string text;
};

// Immutable after load; safe to share across reader threads.
class DocumentStore {
 public:
  void add(Document doc);  // throws on empty or duplicate id
  const Document* find(const std::string& doc_id) const;
  const Document& at(const std::string& doc_id) const;  // throws if absent
  size_t size() const { return docs_.size(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, size_t> index_;
};

// Graded relevance judgments. Per-query judgment lists keep file order so
// "the first listed relevant document" is well defined downstream.
class Qrels {
 public:
  void add(const std::string& query_id, const std::string& doc_id,
           int relevance);  // throws on duplicate key or negative grade
  std::optional<int> relevance(const std::string& query_id,
                               const std::string& doc_id) const;
  // Judged (doc_id, grade) pairs in insertion order; nullptr if unknown query.
  const std::vector<std::pair<std::string, int>>* judged(
      const std::string& query_id) const;
  // Query ids in first-appearance order.
  const std::vector<std::string>& query_ids() const { return order_; }
  size_t size() const { return total_; }

 private:
  std::unordered_map<std::string, std::vector<std::pair<std::string, int>>>
      by_query_;
  std::unordered_map<std::string, std::unordered_map<std::string, int>>
      lookup_;
  std::vector<std::string> order_;
  size_t total_ = 0;
};

struct RunEntry {
  std::string query_id;
  std::string doc_id;
  int rank = 0;  // 1-based, contiguous within a query
  double score = 0.0;
  std::string tag;
};

// One query's ranking, entries sorted by rank 1..n.
struct RankedList {
  std::string query_id;
  std::vector<RunEntry> entries;
};

// Throws std::runtime_error when ranks are not 1..n, scores increase with
// rank, or a document appears twice.
void validate_ranked_list(const RankedList& list);

// Corpus is JSON lines, one {"id": ..., "text": ...} object per line.
DocumentStore load_corpus(const std::string& path);

// Queries are TSV: query_id <TAB> text.
std::vector<Query> load_queries_tsv(const std::string& path);

// Qrels lines: qid <ws> iter <ws> docid <ws> rel
Qrels load_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, const std::string& path);

// Run lines: qid Q0 docid rank score tag. Lists are returned in
// first-appearance order of the query id.
std::vector<RankedList> load_run(const std::string& path);

// Rows sorted by (query_id, rank); tag overrides per-entry tags when
// non-empty. Scores are printed with at least 4 decimals and enough
// precision to round-trip.
void write_run(const std::vector<RankedList>& lists, const std::string& tag,
               const std::string& path);

std::string format_run_score(double score);

}  // namespace rankrl
