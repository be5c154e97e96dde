#include "rankrl/traindata.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "rankrl/rng.hpp"
#include "rankrl/util.hpp"

namespace rankrl {

namespace {

using nlohmann::json;

constexpr size_t kCandidates = 20;
constexpr size_t kNegatives = kCandidates - 1;
constexpr size_t kPoolDepth = 100;

}  // namespace

void validate_instance(const TrainingInstance& instance,
                       int expected_candidates) {
  if (instance.query_id.empty())
    throw std::runtime_error("training instance with empty query_id");
  if (instance.candidate_doc_ids.size() !=
      static_cast<size_t>(expected_candidates))
    throw std::runtime_error(
        "training instance for " + instance.query_id + " has " +
        std::to_string(instance.candidate_doc_ids.size()) +
        " candidates, expected " + std::to_string(expected_candidates));
  if (instance.gold_label < 1 ||
      instance.gold_label > expected_candidates)
    throw std::runtime_error("training instance for " + instance.query_id +
                             " has out-of-range gold_label " +
                             std::to_string(instance.gold_label));
  std::unordered_set<std::string> seen;
  for (const auto& id : instance.candidate_doc_ids)
    if (id.empty() || !seen.insert(id).second)
      throw std::runtime_error("training instance for " + instance.query_id +
                               " has empty or duplicate candidate ids");
}

std::vector<TrainingInstance> build_grpo_instances(
    const Qrels& qrels, const std::vector<RankedList>& run,
    const DocumentStore& corpus, const std::vector<Query>& queries,
    uint64_t seed, BuildStats* stats) {
  std::unordered_map<std::string, const Query*> query_text;
  for (const Query& q : queries) query_text[q.query_id] = &q;

  BuildStats local;
  std::vector<TrainingInstance> out;
  for (const RankedList& list : run) {
    ++local.queries_seen;
    const std::string& qid = list.query_id;
    auto qt = query_text.find(qid);
    if (qt == query_text.end()) {
      ++local.skipped_no_query_text;
      continue;
    }

    // first judged-relevant document (qrels file order) with corpus text
    const auto* judged = qrels.judged(qid);
    std::string gold_id;
    if (judged) {
      for (const auto& [doc_id, rel] : *judged) {
        if (rel > 0 && corpus.find(doc_id)) {
          gold_id = doc_id;
          break;
        }
      }
    }
    if (gold_id.empty()) {
      ++local.skipped_no_relevant;
      continue;
    }

    // negative pool: top-100 entries minus every judged-relevant document
    // (not only the chosen one) and minus documents without text
    std::vector<std::string> pool;
    size_t depth = std::min(list.entries.size(), kPoolDepth);
    for (size_t i = 0; i < depth; ++i) {
      const std::string& doc_id = list.entries[i].doc_id;
      auto rel = qrels.relevance(qid, doc_id);
      if (rel && *rel > 0) continue;
      if (!corpus.find(doc_id)) continue;
      pool.push_back(doc_id);
    }
    if (pool.size() < kNegatives) {
      ++local.skipped_small_pool;
      continue;
    }

    const uint64_t query_seed = seed ^ fnv1a64(qid);
    Rng rng(query_seed);
    std::vector<std::string> candidates;
    candidates.reserve(kCandidates);
    for (size_t idx : sample_without_replacement(rng, pool.size(), kNegatives))
      candidates.push_back(pool[idx]);
    candidates.push_back(gold_id);
    shuffle_portable(candidates, rng);

    TrainingInstance instance;
    instance.query_id = qid;
    instance.query_text = qt->second->text;
    instance.candidate_doc_ids = std::move(candidates);
    instance.seed_used = query_seed;
    for (size_t i = 0; i < instance.candidate_doc_ids.size(); ++i)
      if (instance.candidate_doc_ids[i] == gold_id)
        instance.gold_label = static_cast<int>(i) + 1;
    validate_instance(instance);
    out.push_back(std::move(instance));
    ++local.instances_built;
  }
  if (stats) *stats = local;
  return out;
}

void write_instances_jsonl(const std::vector<TrainingInstance>& instances,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const TrainingInstance& inst : instances) {
    validate_instance(inst);
    json obj = {{"query_id", inst.query_id},
                {"query_text", inst.query_text},
                {"candidate_doc_ids", inst.candidate_doc_ids},
                {"gold_label", inst.gold_label},
                {"seed_used", inst.seed_used}};
    out << obj.dump() << "\n";
  }
}

std::vector<TrainingInstance> load_instances_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<TrainingInstance> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed JSON line");
    TrainingInstance inst;
    try {
      inst.query_id = obj.at("query_id").get<std::string>();
      inst.query_text = obj.at("query_text").get<std::string>();
      inst.candidate_doc_ids =
          obj.at("candidate_doc_ids").get<std::vector<std::string>>();
      inst.gold_label = obj.at("gold_label").get<int>();
      inst.seed_used = obj.at("seed_used").get<uint64_t>();
      validate_instance(inst);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<SftExample> build_sft_examples(
    std::span<const TrainingInstance> instances, const DocumentStore& corpus,
    PromptMode mode, PromptBudget budget) {
  std::vector<SftExample> out;
  out.reserve(instances.size());
  for (const TrainingInstance& inst : instances) {
    std::vector<Document> docs;
    docs.reserve(inst.candidate_doc_ids.size());
    for (const auto& doc_id : inst.candidate_doc_ids)
      docs.push_back(corpus.at(doc_id));
    RenderedPrompt prompt =
        build_prompt(Query{inst.query_id, inst.query_text}, docs, mode, budget);

    SftExample ex;
    ex.query_id = inst.query_id;
    ex.system = prompt.system;
    ex.user = prompt.user;
    ex.target = "<answer>[" + std::to_string(inst.gold_label) + "]</answer>";
    ex.text = ex.system + "\n\n" + ex.user + "\n\n" + ex.target;
    ex.answer_begin = ex.text.size() - ex.target.size();
    ex.answer_end = ex.text.size();
    out.push_back(std::move(ex));
  }
  return out;
}

void write_sft_jsonl(const std::vector<SftExample>& examples,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const SftExample& ex : examples) {
    json obj = {{"query_id", ex.query_id}, {"system", ex.system},
                {"user", ex.user},         {"target", ex.target},
                {"text", ex.text},         {"answer_begin", ex.answer_begin},
                {"answer_end", ex.answer_end}};
    out << obj.dump() << "\n";
  }
}

}  // namespace rankrl
