#pragma once

#include <string>
#include <vector>

#include "rankrl/corpus.hpp"

namespace rankrl {

// kRankR1 asks for a <think> span before the answer; kSetwise asks for the
// answer span only. The candidate block is identical in both modes.
enum class PromptMode { kRankR1, kSetwise };

const char* prompt_mode_name(PromptMode mode);           // "rank-r1" / "setwise"
PromptMode prompt_mode_from_name(const std::string& s);  // throws on unknown

enum class BudgetUnit { kChars, kWhitespaceTokens };

// max_units <= 0 disables truncation.
struct PromptBudget {
  int max_units = 0;
  BudgetUnit unit = BudgetUnit::kChars;
};

struct RenderedPrompt {
  std::string system;
  std::string user;
  int candidate_count = 0;
  std::vector<std::string> label_order;  // label k corresponds to entry k-1
  PromptMode mode = PromptMode::kRankR1;
};

// Longest prefix of text not exceeding max_units. Character budgets count
// bytes but never split a UTF-8 sequence; token budgets count
// whitespace-separated tokens and cut at the end of the last whole token.
std::string truncate_document(const std::string& text, int max_units,
                              BudgetUnit unit = BudgetUnit::kChars);

// Renders the setwise selection prompt over 1..20 candidates. When a budget
// is given, every candidate text is truncated to an equal share of what
// remains after the fixed template text. Throws std::invalid_argument on an
// empty query, an empty candidate list, or more than 20 candidates.
RenderedPrompt build_prompt(const Query& query,
                            const std::vector<Document>& candidates,
                            PromptMode mode, PromptBudget budget = {});

uint64_t prompt_hash(const RenderedPrompt& prompt);

}  // namespace rankrl
