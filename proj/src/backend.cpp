#include "rankrl/backend.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rankrl/parse.hpp"
#include "rankrl/util.hpp"

namespace rankrl {

namespace {

using nlohmann::json;

json parse_script(const std::string& text, const std::string& origin) {
  json script = json::parse(text, nullptr, false);
  if (script.is_discarded() || !script.is_object())
    throw std::runtime_error("malformed backend script: " + origin);
  return script;
}

}  // namespace

std::string prompt_hash_hex(const RenderedPrompt& prompt) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(prompt_hash(prompt)));
  return buf;
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open backend script: " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return from_json_text(body.str());
}

ScriptedBackend ScriptedBackend::from_json_text(const std::string& text) {
  json script = parse_script(text, "inline script");
  std::string type = script.value("type", "preferences");
  if (type == "preferences") {
    if (!script.contains("preferences") || !script["preferences"].is_object())
      throw std::runtime_error("preferences script needs a 'preferences' map");
    std::unordered_map<std::string, double> prefs;
    for (auto& [k, v] : script["preferences"].items())
      prefs[k] = v.get<double>();
    ScriptedBackend backend = with_preferences(std::move(prefs));
    if (script.contains("think"))
      backend.think_text_ = script["think"].get<std::string>();
    return backend;
  }
  if (type == "sequence") {
    std::vector<std::string> responses;
    for (const auto& r : script.at("responses"))
      responses.push_back(r.get<std::string>());
    return with_sequence(std::move(responses));
  }
  if (type == "table") {
    std::unordered_map<std::string, std::string> table;
    for (auto& [k, v] : script.at("table").items())
      table[k] = v.get<std::string>();
    std::optional<std::string> fallback;
    if (script.contains("default"))
      fallback = script["default"].get<std::string>();
    return with_table(std::move(table), std::move(fallback));
  }
  throw std::runtime_error("unknown backend script type: " + type);
}

ScriptedBackend ScriptedBackend::with_preferences(
    std::unordered_map<std::string, double> preferences) {
  ScriptedBackend b;
  b.type_ = Type::kPreferences;
  b.preferences_ = std::move(preferences);
  return b;
}

ScriptedBackend ScriptedBackend::with_sequence(
    std::vector<std::string> responses) {
  ScriptedBackend b;
  b.type_ = Type::kSequence;
  b.responses_ = std::move(responses);
  return b;
}

ScriptedBackend ScriptedBackend::with_table(
    std::unordered_map<std::string, std::string> table,
    std::optional<std::string> fallback) {
  ScriptedBackend b;
  b.type_ = Type::kTable;
  b.table_ = std::move(table);
  b.fallback_ = std::move(fallback);
  return b;
}

std::vector<Completion> ScriptedBackend::complete(
    const RenderedPrompt& prompt, const SamplingParams& params) {
  if (params.group_size < 1)
    throw BackendError("group_size must be >= 1");
  std::lock_guard<std::mutex> lk(mu_);
  ++calls_;
  std::vector<Completion> out;
  out.reserve(params.group_size);
  switch (type_) {
    case Type::kPreferences: {
      double best = -std::numeric_limits<double>::infinity();
      int best_label = 1;
      for (size_t i = 0; i < prompt.label_order.size(); ++i) {
        auto it = preferences_.find(prompt.label_order[i]);
        double score =
            it == preferences_.end()
                ? -std::numeric_limits<double>::infinity()
                : it->second;
        if (score > best) {
          best = score;
          best_label = static_cast<int>(i) + 1;
        }
      }
      std::string text =
          prompt.mode == PromptMode::kRankR1
              ? render_completion(think_text_, best_label)
              : render_completion(std::nullopt, best_label);
      for (int i = 0; i < params.group_size; ++i)
        out.push_back(Completion{text, FinishReason::kStop});
      return out;
    }
    case Type::kSequence: {
      for (int i = 0; i < params.group_size; ++i) {
        if (cursor_ >= responses_.size())
          throw BackendError("scripted backend: response script exhausted");
        out.push_back(Completion{responses_[cursor_++], FinishReason::kStop});
      }
      return out;
    }
    case Type::kTable: {
      auto it = table_.find(prompt_hash_hex(prompt));
      const std::string* text = nullptr;
      if (it != table_.end())
        text = &it->second;
      else if (fallback_)
        text = &*fallback_;
      else
        throw BackendError("scripted backend: prompt not in table and no default");
      for (int i = 0; i < params.group_size; ++i)
        out.push_back(Completion{*text, FinishReason::kStop});
      return out;
    }
  }
  throw BackendError("scripted backend: unreachable");
}

}  // namespace rankrl
