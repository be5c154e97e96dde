#include "rankrl/prompts.hpp"

#include <sstream>
#include <stdexcept>

#include "rankrl/util.hpp"

namespace rankrl {

namespace {

constexpr int kMaxCandidates = 20;

const char kSystemReasoning[] =
    "A conversation between User and Assistant. The user asks a question, and "
    "the Assistant solves it. The assistant first thinks about the reasoning "
    "process in the mind and then provides the user with the answer. The "
    "reasoning process and answer are enclosed within <think> </think> and "
    "<answer> </answer> tags, respectively, i.e., <think> reasoning process "
    "here </think> <answer> answer here </answer>.";

const char kSystemPlain[] =
    "A conversation between User and Assistant. The user asks a question, and "
    "the Assistant solves it. The assistant provides the user with the answer "
    "enclosed within <answer> </answer> tags, i.e., <answer> answer here "
    "</answer>.";

// The worked example keeps the third document from the original template and
// falls back to the first when fewer than three candidates are shown.
struct ExampleLabel {
  int label;
  const char* ordinal;
};

ExampleLabel example_label(int candidate_count) {
  if (candidate_count >= 3) return {3, "third"};
  return {1, "first"};
}

std::string render_user(const Query& query,
                        const std::vector<std::string>& texts,
                        PromptMode mode) {
  std::ostringstream out;
  out << "Given the query: \"" << query.text
      << "\", which of the following documents is most relevant?\n";
  for (size_t i = 0; i < texts.size(); ++i)
    out << "[" << (i + 1) << "] " << texts[i] << "\n";
  out << "\n";
  ExampleLabel ex = example_label(static_cast<int>(texts.size()));
  if (mode == PromptMode::kRankR1) {
    out << "After completing the reasoning process, please provide only the "
           "label of the most relevant document to the query, enclosed in "
           "square brackets, within the answer tags. For example, if the "
        << ex.ordinal
        << " document is the most relevant, the answer should be: <think> "
           "reasoning process here </think> <answer>["
        << ex.label << "]</answer>.";
  } else {
    out << "Please provide only the label of the most relevant document to "
           "the query, enclosed in square brackets, within the answer tags. "
           "For example, if the "
        << ex.ordinal
        << " document is the most relevant, the answer should be: <answer>["
        << ex.label << "]</answer>.";
  }
  return out.str();
}

size_t count_ws_tokens(const std::string& s) {
  std::istringstream ss(s);
  std::string tok;
  size_t n = 0;
  while (ss >> tok) ++n;
  return n;
}

size_t units_of(const std::string& s, BudgetUnit unit) {
  return unit == BudgetUnit::kChars ? s.size() : count_ws_tokens(s);
}

}  // namespace

const char* prompt_mode_name(PromptMode mode) {
  return mode == PromptMode::kRankR1 ? "rank-r1" : "setwise";
}

PromptMode prompt_mode_from_name(const std::string& s) {
  if (s == "rank-r1") return PromptMode::kRankR1;
  if (s == "setwise") return PromptMode::kSetwise;
  throw std::invalid_argument("unknown prompt mode: " + s);
}

std::string truncate_document(const std::string& text, int max_units,
                              BudgetUnit unit) {
  if (max_units <= 0)
    throw std::invalid_argument("truncate_document: max_units must be > 0");
  size_t limit = static_cast<size_t>(max_units);
  if (unit == BudgetUnit::kChars) {
    if (text.size() <= limit) return text;
    size_t cut = limit;
    // never split a UTF-8 continuation sequence
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80)
      --cut;
    return text.substr(0, cut);
  }
  // token budget: end of the max_units-th whitespace token
  size_t i = 0, tokens = 0;
  const size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    ++tokens;
    if (tokens == limit) return text.substr(0, i);
    (void)start;
  }
  return text;
}

RenderedPrompt build_prompt(const Query& query,
                            const std::vector<Document>& candidates,
                            PromptMode mode, PromptBudget budget) {
  if (query.text.empty())
    throw std::invalid_argument("build_prompt: query text is empty");
  if (candidates.empty())
    throw std::invalid_argument("build_prompt: candidate list is empty");
  if (candidates.size() > kMaxCandidates)
    throw std::invalid_argument(
        "build_prompt: at most 20 candidates per prompt (got " +
        std::to_string(candidates.size()) + "); split larger sets upstream");

  std::vector<std::string> texts;
  texts.reserve(candidates.size());
  for (const Document& d : candidates) texts.push_back(d.text);

  if (budget.max_units > 0) {
    // Fixed template cost = rendered size with all candidate slots empty;
    // the remainder is split evenly across candidates.
    std::vector<std::string> empty(candidates.size());
    size_t overhead = units_of(std::string(mode == PromptMode::kRankR1
                                               ? kSystemReasoning
                                               : kSystemPlain),
                               budget.unit) +
                      units_of(render_user(query, empty, mode), budget.unit);
    long long spare =
        static_cast<long long>(budget.max_units) -
        static_cast<long long>(overhead);
    long long per_doc = spare / static_cast<long long>(candidates.size());
    if (per_doc < 1) per_doc = 1;
    for (auto& t : texts)
      if (units_of(t, budget.unit) > static_cast<size_t>(per_doc))
        t = truncate_document(t, static_cast<int>(per_doc), budget.unit);
  }

  RenderedPrompt prompt;
  prompt.mode = mode;
  prompt.system =
      mode == PromptMode::kRankR1 ? kSystemReasoning : kSystemPlain;
  prompt.user = render_user(query, texts, mode);
  prompt.candidate_count = static_cast<int>(candidates.size());
  prompt.label_order.reserve(candidates.size());
  for (const Document& d : candidates) prompt.label_order.push_back(d.doc_id);
  return prompt;
}

uint64_t prompt_hash(const RenderedPrompt& prompt) {
  std::string joined = prompt.system;
  joined.push_back('\n');
  joined += prompt.user;
  return fnv1a64(joined);
}

}  // namespace rankrl
