#include <chrono>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rankrl/backend.hpp"

namespace rankrl {

namespace {

using nlohmann::json;

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

std::string body_excerpt(const std::string& body) {
  constexpr size_t kMax = 200;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

FinishReason finish_reason_from(const std::string& s) {
  if (s == "length") return FinishReason::kLength;
  if (s == "stop") return FinishReason::kStop;
  return FinishReason::kError;
}

// Splits "http://host:port/prefix" into the httplib client base and the
// path prefix. A base_url already ending in /chat/completions is used as-is.
void split_base_url(const std::string& base_url, std::string* host,
                    std::string* path) {
  size_t scheme = base_url.find("://");
  if (scheme == std::string::npos)
    throw BackendError("endpoint must start with http:// or https://: " +
                       base_url);
  size_t slash = base_url.find('/', scheme + 3);
  std::string prefix;
  if (slash == std::string::npos) {
    *host = base_url;
  } else {
    *host = base_url.substr(0, slash);
    prefix = base_url.substr(slash);
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  constexpr std::string_view kSuffix = "/chat/completions";
  if (prefix.size() >= kSuffix.size() &&
      prefix.compare(prefix.size() - kSuffix.size(), kSuffix.size(),
                     kSuffix) == 0)
    *path = prefix;
  else
    *path = prefix + std::string(kSuffix);
}

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  std::string host;
  std::string path;
  std::counting_semaphore<> in_flight;

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)),
        in_flight(std::max(1, config.max_in_flight)) {
    split_base_url(config.base_url, &host, &path);
  }

  std::vector<Completion> request(const RenderedPrompt& prompt,
                                  const SamplingParams& params) {
    json body = {
        {"model", config.model},
        {"messages",
         json::array({{{"role", "system"}, {"content", prompt.system}},
                      {{"role", "user"}, {"content", prompt.user}}})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_completion_units},
        {"n", params.group_size},
    };
    if (params.seed) body["seed"] = *params.seed;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config.api_key);

    std::string last_error;
    int last_status = 0;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) {
        auto delay = std::chrono::milliseconds(
            static_cast<long long>(config.initial_backoff_ms) << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      // one client per request; requests are stateless
      httplib::Client client(host);
      client.set_connection_timeout(config.connect_timeout_s, 0);
      client.set_read_timeout(config.read_timeout_s, 0);
      client.set_write_timeout(config.read_timeout_s, 0);

      httplib::Result res =
          client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        last_status = 0;
        continue;
      }
      if (res->status / 100 == 2) return parse_response(res->body, params);
      last_error = "HTTP " + std::to_string(res->status) + ": " +
                   body_excerpt(res->body);
      last_status = res->status;
      if (!retryable_status(res->status)) break;
    }
    throw BackendError("chat completion request failed after retries: " +
                           last_error,
                       last_status);
  }

  std::vector<Completion> parse_response(const std::string& body,
                                         const SamplingParams& params) {
    json res = json::parse(body, nullptr, false);
    if (res.is_discarded() || !res.is_object() || !res.contains("choices") ||
        !res["choices"].is_array())
      throw BackendError("malformed chat completion response: " +
                         body_excerpt(body));
    std::vector<Completion> out;
    for (const auto& choice : res["choices"]) {
      if (!choice.contains("message") ||
          !choice["message"].contains("content") ||
          !choice["message"]["content"].is_string())
        throw BackendError("chat completion choice without message content");
      Completion c;
      c.text = choice["message"]["content"].get<std::string>();
      c.finish_reason =
          finish_reason_from(choice.value("finish_reason", "stop"));
      out.push_back(std::move(c));
    }
    if (static_cast<int>(out.size()) != params.group_size)
      throw BackendError("server returned " + std::to_string(out.size()) +
                         " completions, expected " +
                         std::to_string(params.group_size));
    return out;
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

std::vector<Completion> HttpBackend::complete(const RenderedPrompt& prompt,
                                              const SamplingParams& params) {
  impl_->in_flight.acquire();
  struct Release {
    std::counting_semaphore<>& sem;
    ~Release() { sem.release(); }
  } release{impl_->in_flight};
  return impl_->request(prompt, params);
}

}  // namespace rankrl
