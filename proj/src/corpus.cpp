#include "rankrl/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rankrl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, size_t line,
                       const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_int(const std::string& s, int* out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, *out);
  return ec == std::errc() && p == e;
}

bool parse_double(const std::string& s, double* out) {
  try {
    size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

void DocumentStore::add(Document doc) {
  if (doc.doc_id.empty()) throw std::runtime_error("document id is empty");
  auto [it, inserted] = index_.emplace(doc.doc_id, docs_.size());
  if (!inserted)
    throw std::runtime_error("duplicate document id: " + doc.doc_id);
  docs_.push_back(std::move(doc));
}

const Document* DocumentStore::find(const std::string& doc_id) const {
  auto it = index_.find(doc_id);
  return it == index_.end() ? nullptr : &docs_[it->second];
}

const Document& DocumentStore::at(const std::string& doc_id) const {
  const Document* d = find(doc_id);
  if (!d) throw std::runtime_error("unknown document id: " + doc_id);
  return *d;
}

void Qrels::add(const std::string& query_id, const std::string& doc_id,
                int relevance) {
  if (query_id.empty() || doc_id.empty())
    throw std::runtime_error("qrels entry with empty query or document id");
  if (relevance < 0)
    throw std::runtime_error("negative relevance for (" + query_id + ", " +
                             doc_id + ")");
  auto& seen = lookup_[query_id];
  if (!seen.emplace(doc_id, relevance).second)
    throw std::runtime_error("duplicate qrels key (" + query_id + ", " +
                             doc_id + ")");
  auto it = by_query_.find(query_id);
  if (it == by_query_.end()) {
    order_.push_back(query_id);
    it = by_query_.emplace(query_id, std::vector<std::pair<std::string, int>>())
             .first;
  }
  it->second.emplace_back(doc_id, relevance);
  ++total_;
}

std::optional<int> Qrels::relevance(const std::string& query_id,
                                    const std::string& doc_id) const {
  auto q = lookup_.find(query_id);
  if (q == lookup_.end()) return std::nullopt;
  auto d = q->second.find(doc_id);
  if (d == q->second.end()) return std::nullopt;
  return d->second;
}

const std::vector<std::pair<std::string, int>>* Qrels::judged(
    const std::string& query_id) const {
  auto it = by_query_.find(query_id);
  return it == by_query_.end() ? nullptr : &it->second;
}

void validate_ranked_list(const RankedList& list) {
  std::unordered_map<std::string, int> seen;
  for (size_t i = 0; i < list.entries.size(); ++i) {
    const RunEntry& e = list.entries[i];
    if (e.query_id != list.query_id)
      throw std::runtime_error("run entry query id mismatch in list " +
                               list.query_id);
    if (e.rank != static_cast<int>(i) + 1)
      throw std::runtime_error("query " + list.query_id +
                               ": ranks must be 1..n without gaps (got " +
                               std::to_string(e.rank) + " at position " +
                               std::to_string(i + 1) + ")");
    if (i > 0 && e.score > list.entries[i - 1].score)
      throw std::runtime_error("query " + list.query_id +
                               ": scores increase at rank " +
                               std::to_string(e.rank));
    if (!seen.emplace(e.doc_id, e.rank).second)
      throw std::runtime_error("query " + list.query_id +
                               ": duplicate document " + e.doc_id);
  }
}

DocumentStore load_corpus(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  DocumentStore store;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      fail(path, lineno, "malformed JSON line");
    if (!obj.contains("id") || !obj["id"].is_string())
      fail(path, lineno, "missing string field 'id'");
    if (!obj.contains("text") || !obj["text"].is_string())
      fail(path, lineno, "missing string field 'text'");
    try {
      store.add(Document{obj["id"].get<std::string>(),
                         obj["text"].get<std::string>()});
    } catch (const std::exception& e) {
      fail(path, lineno, e.what());
    }
  }
  return store;
}

std::vector<Query> load_queries_tsv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<Query> queries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      fail(path, lineno, "expected 'query_id<TAB>text'");
    queries.push_back(Query{line.substr(0, tab), line.substr(tab + 1)});
  }
  return queries;
}

Qrels load_qrels(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  Qrels qrels;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 4)
      fail(path, lineno, "expected 4 fields 'qid iter docid rel'");
    int rel = 0;
    if (!parse_int(fields[3], &rel))
      fail(path, lineno, "relevance is not an integer: " + fields[3]);
    try {
      qrels.add(fields[0], fields[2], rel);
    } catch (const std::exception& e) {
      fail(path, lineno, e.what());
    }
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const std::string& qid : qrels.query_ids())
    for (const auto& [doc_id, rel] : *qrels.judged(qid))
      out << qid << " 0 " << doc_id << " " << rel << "\n";
}

std::vector<RankedList> load_run(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<RankedList> lists;
  std::unordered_map<std::string, size_t> index;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 6)
      fail(path, lineno, "expected 6 fields 'qid Q0 docid rank score tag'");
    RunEntry e;
    e.query_id = fields[0];
    e.doc_id = fields[2];
    if (!parse_int(fields[3], &e.rank))
      fail(path, lineno, "rank is not an integer: " + fields[3]);
    if (!parse_double(fields[4], &e.score))
      fail(path, lineno, "score is not numeric: " + fields[4]);
    e.tag = fields[5];
    auto [it, inserted] = index.emplace(e.query_id, lists.size());
    if (inserted) lists.push_back(RankedList{e.query_id, {}});
    lists[it->second].entries.push_back(std::move(e));
  }
  for (auto& list : lists) {
    std::stable_sort(list.entries.begin(), list.entries.end(),
                     [](const RunEntry& a, const RunEntry& b) {
                       return a.rank < b.rank;
                     });
    try {
      validate_ranked_list(list);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  return lists;
}

// Fixed notation with the fewest decimals (at least 4) that parses back to
// the same double; scientific fallback for magnitudes fixed cannot express.
std::string format_run_score(double score) {
  char buf[64];
  for (int prec = 4; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*f", prec, score);
    if (std::stod(buf) == score) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", score);
  return buf;
}

void write_run(const std::vector<RankedList>& lists, const std::string& tag,
               const std::string& path) {
  std::vector<const RankedList*> sorted;
  sorted.reserve(lists.size());
  for (const auto& list : lists) {
    validate_ranked_list(list);
    sorted.push_back(&list);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const RankedList* a, const RankedList* b) {
              return a->query_id < b->query_id;
            });
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const RankedList* list : sorted)
    for (const RunEntry& e : list->entries)
      out << e.query_id << " Q0 " << e.doc_id << " " << e.rank << " "
          << format_run_score(e.score) << " " << (tag.empty() ? e.tag : tag)
          << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rankrl
