#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankrl/prompts.hpp"

namespace rankrl {

struct SamplingParams {
  double temperature = 1.0;
  int max_completion_units = 2048;
  int group_size = 8;
  std::optional<uint64_t> seed;
};

enum class FinishReason { kStop, kLength, kError };

struct Completion {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
};

class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& what, int http_status = 0)
      : std::runtime_error(what), http_status_(http_status) {}
  int http_status() const { return http_status_; }

 private:
  int http_status_;
};

// Uniform policy interface. Implementations must return exactly
// params.group_size completions or throw; short lists are never returned.
// Implementations must tolerate concurrent complete() calls.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::vector<Completion> complete(const RenderedPrompt& prompt,
                                           const SamplingParams& params) = 0;
};

// Adapter over a plain function; handy in tests.
class CallbackBackend : public CompletionBackend {
 public:
  using Fn = std::function<std::vector<Completion>(const RenderedPrompt&,
                                                   const SamplingParams&)>;
  explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
  std::vector<Completion> complete(const RenderedPrompt& prompt,
                                   const SamplingParams& params) override {
    return fn_(prompt, params);
  }

 private:
  Fn fn_;
};

// Deterministic mock driven by a JSON script. Three script types:
//
//   {"type": "preferences", "preferences": {"docid": score, ...}}
//     Answers with the label of the highest-scoring document present in the
//     prompt (unlisted documents score -inf; ties go to the lowest label).
//     Emits a think span when the prompt mode asks for one.
//
//   {"type": "sequence", "responses": ["...", ...]}
//     Returns scripted texts in order, group_size per call; errors when the
//     script runs out.
//
//   {"type": "table", "table": {"<prompt hash hex>": "..."}, "default": "..."}
//     Looks up fnv1a64(system + '\n' + user) printed as lowercase hex.
class ScriptedBackend : public CompletionBackend {
 public:
  static ScriptedBackend from_file(const std::string& path);
  static ScriptedBackend from_json_text(const std::string& text);

  static ScriptedBackend with_preferences(
      std::unordered_map<std::string, double> preferences);
  static ScriptedBackend with_sequence(std::vector<std::string> responses);
  static ScriptedBackend with_table(
      std::unordered_map<std::string, std::string> table,
      std::optional<std::string> fallback = std::nullopt);

  std::vector<Completion> complete(const RenderedPrompt& prompt,
                                   const SamplingParams& params) override;

  size_t calls() const { return calls_; }

 private:
  enum class Type { kPreferences, kSequence, kTable };
  ScriptedBackend() = default;

  Type type_ = Type::kPreferences;
  std::unordered_map<std::string, double> preferences_;
  std::string think_text_ = "comparing the candidates against the query";
  std::vector<std::string> responses_;
  size_t cursor_ = 0;
  std::unordered_map<std::string, std::string> table_;
  std::optional<std::string> fallback_;
  std::mutex mu_;
  size_t calls_ = 0;
};

std::string prompt_hash_hex(const RenderedPrompt& prompt);

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;        // empty: no Authorization header
  int max_retries = 3;        // retried attempts after the first
  int initial_backoff_ms = 1000;  // doubles per retry
  int max_in_flight = 4;
  int connect_timeout_s = 10;
  int read_timeout_s = 600;
};

// OpenAI-compatible chat-completions client. Retries transport failures and
// retryable statuses (408/429/5xx) with exponential backoff; other non-2xx
// responses raise BackendError with the status and a body excerpt.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::vector<Completion> complete(const RenderedPrompt& prompt,
                                   const SamplingParams& params) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rankrl
