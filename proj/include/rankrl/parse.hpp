#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rankrl/prompts.hpp"

namespace rankrl {

// Result of parsing one completion. well_formed == false is the
// format-failure value; label and think are only meaningful when true.
struct ParsedAnswer {
  std::optional<std::string> think;
  int label = 0;
  bool well_formed = false;
};

// Strict format check. kRankR1 accepts exactly
//   <think>...</think> <answer>[k]</answer>
// and kSetwise exactly
//   <answer>[k]</answer>
// with whitespace tolerated around the spans and around the bracketed label
// inside the answer tags, nowhere else. Any other byte sequence yields a
// format failure; this function never throws.
ParsedAnswer parse_completion(std::string_view text, PromptMode mode);

// 1 iff the completion was well formed and names the gold label; 0 otherwise
// (format failures and out-of-range labels both count as wrong). Throws
// std::invalid_argument when gold_label is outside 1..candidate_count.
int compute_reward(const ParsedAnswer& parsed, int gold_label,
                   int candidate_count);

// Completion text in the shape the parser accepts; used by mocks, the toy
// policy, and round-trip tests.
std::string render_completion(const std::optional<std::string>& think,
                              int label);

}  // namespace rankrl
