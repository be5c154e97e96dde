#include "rankrl/parse.hpp"

#include <charconv>
#include <stdexcept>

#include "rankrl/util.hpp"

namespace rankrl {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string_view ltrim(std::string_view s) {
  size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  return s.substr(b);
}

// Consumes "<answer>" ws* "[" digits "]" ws* "</answer>" from the front of s.
// Returns the remainder on success.
bool consume_answer_span(std::string_view s, int* label,
                         std::string_view* rest) {
  if (!starts_with(s, kAnswerOpen)) return false;
  s.remove_prefix(kAnswerOpen.size());
  s = ltrim(s);
  if (s.empty() || s[0] != '[') return false;
  s.remove_prefix(1);
  size_t digits = 0;
  while (digits < s.size() &&
         std::isdigit(static_cast<unsigned char>(s[digits])))
    ++digits;
  if (digits == 0) return false;
  int value = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + digits, value);
  if (ec != std::errc() || p != s.data() + digits) return false;  // overflow
  s.remove_prefix(digits);
  if (s.empty() || s[0] != ']') return false;
  s.remove_prefix(1);
  s = ltrim(s);
  if (!starts_with(s, kAnswerClose)) return false;
  s.remove_prefix(kAnswerClose.size());
  *label = value;
  *rest = s;
  return true;
}

}  // namespace

ParsedAnswer parse_completion(std::string_view text, PromptMode mode) {
  ParsedAnswer failure;
  std::string_view s = trim_view(text);

  std::optional<std::string> think;
  if (mode == PromptMode::kRankR1) {
    if (!starts_with(s, kThinkOpen)) return failure;
    s.remove_prefix(kThinkOpen.size());
    size_t close = s.find(kThinkClose);
    if (close == std::string_view::npos) return failure;
    think = std::string(s.substr(0, close));
    s = ltrim(s.substr(close + kThinkClose.size()));
  }

  int label = 0;
  std::string_view rest;
  if (!consume_answer_span(s, &label, &rest)) return failure;
  if (!trim_view(rest).empty()) return failure;  // trailing junk or a second span

  ParsedAnswer ok;
  ok.think = std::move(think);
  ok.label = label;
  ok.well_formed = true;
  return ok;
}

int compute_reward(const ParsedAnswer& parsed, int gold_label,
                   int candidate_count) {
  if (candidate_count < 1)
    throw std::invalid_argument("compute_reward: candidate_count must be >= 1");
  if (gold_label < 1 || gold_label > candidate_count)
    throw std::invalid_argument(
        "compute_reward: gold_label " + std::to_string(gold_label) +
        " outside 1.." + std::to_string(candidate_count));
  if (!parsed.well_formed) return 0;
  if (parsed.label < 1 || parsed.label > candidate_count) return 0;
  return parsed.label == gold_label ? 1 : 0;
}

std::string render_completion(const std::optional<std::string>& think,
                              int label) {
  std::string out;
  if (think) {
    out += "<think>";
    out += *think;
    out += "</think> ";
  }
  out += "<answer>[";
  out += std::to_string(label);
  out += "]</answer>";
  return out;
}

}  // namespace rankrl
