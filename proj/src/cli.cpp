#include "rankrl/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankrl/backend.hpp"
#include "rankrl/corpus.hpp"
#include "rankrl/evalmetrics.hpp"
#include "rankrl/parse.hpp"
#include "rankrl/rerank.hpp"
#include "rankrl/trainer.hpp"
#include "rankrl/traindata.hpp"
#include "rankrl/util.hpp"

namespace rankrl {

namespace {

using nlohmann::json;

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

// Settings shared across subcommands with flag > env > config-file
// precedence. Config keys mirror the training hyperparameter names
// (learning_rate, batch_size, lora_rank, max_prompt_length,
// max_completion_length, group_size) plus endpoint/model/temperature;
// lora_rank is accepted for completeness but nothing here consumes it.
struct Settings {
  json config = json::object();

  void load_config(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream body;
    body << in.rdbuf();
    config = json::parse(body.str(), nullptr, false);
    if (config.is_discarded() || !config.is_object())
      throw std::runtime_error("config file is not a JSON object: " + path);
  }

  template <typename T>
  T resolve(const CLI::Option* opt, T flag_value, const char* key,
            T fallback, const std::string& env_name = "") const {
    if (opt && opt->count() > 0) return flag_value;
    if (!env_name.empty()) {
      std::string v = env_or_empty(env_name.c_str());
      if (!v.empty()) {
        if constexpr (std::is_same_v<T, std::string>) return v;
        else {
          T parsed{};
          std::istringstream ss(v);
          if (ss >> parsed) return parsed;
          throw std::runtime_error("cannot parse env " + env_name + "=" + v);
        }
      }
    }
    if (config.contains(key)) return config[key].get<T>();
    return fallback;
  }
};

std::unordered_map<std::string, Query> index_queries(
    const std::vector<Query>& queries) {
  std::unordered_map<std::string, Query> map;
  for (const Query& q : queries) map[q.query_id] = q;
  return map;
}

BudgetUnit budget_unit_from(const std::string& s) {
  if (s == "chars") return BudgetUnit::kChars;
  if (s == "tokens") return BudgetUnit::kWhitespaceTokens;
  throw CLI::ValidationError("--budget-unit must be 'chars' or 'tokens'");
}

struct RerankArgs {
  std::string run_in, corpus, queries, out;
  std::string mode = "rank-r1";
  std::string mock_script, tag = "rankrl";
  std::string budget_unit = "chars";
  int k = 10, arity = 19, topn = 100, retries = 1;
  int budget = -1;  // -1: take max_prompt_length from the config file
  double temperature = 0.0;
};

void cmd_rerank(const RerankArgs& args, const Settings& settings,
                const std::string& endpoint, const std::string& model,
                int concurrency, const CLI::Option* endpoint_opt,
                const CLI::Option* model_opt) {
  DocumentStore corpus = load_corpus(args.corpus);
  auto queries = index_queries(load_queries_tsv(args.queries));
  std::vector<RankedList> run = load_run(args.run_in);

  RerankConfig config;
  config.top_n_in = args.topn;
  config.top_k_out = args.k;
  config.heap_arity = args.arity;
  config.mode = prompt_mode_from_name(args.mode);
  config.retry_on_failure = args.retries;
  config.temperature = args.temperature;
  config.tag = args.tag;
  config.budget.max_units =
      args.budget >= 0
          ? args.budget
          : settings.config.value("max_prompt_length", 4096);
  config.budget.unit = budget_unit_from(args.budget_unit);

  std::unique_ptr<CompletionBackend> backend;
  if (!args.mock_script.empty()) {
    backend = std::make_unique<ScriptedBackend>(
        ScriptedBackend::from_file(args.mock_script));
  } else {
    HttpBackendConfig http;
    http.base_url = settings.resolve<std::string>(endpoint_opt, endpoint,
                                                  "endpoint", "",
                                                  "RANKRL_ENDPOINT");
    http.model = settings.resolve<std::string>(model_opt, model, "model", "",
                                               "RANKRL_MODEL");
    http.api_key = env_or_empty("RANKRL_API_KEY");
    if (http.api_key.empty()) http.api_key = env_or_empty("OPENAI_API_KEY");
    http.max_in_flight = std::max(1, concurrency);
    if (http.base_url.empty())
      throw std::runtime_error(
          "rerank needs --endpoint (or RANKRL_ENDPOINT) or --mock-script");
    backend = std::make_unique<HttpBackend>(http);
  }

  std::vector<RankedList> reranked(run.size());
  std::vector<RerankStats> stats(run.size());
  parallel_for(run.size(), concurrency, [&](size_t i) {
    auto it = queries.find(run[i].query_id);
    if (it == queries.end())
      throw std::runtime_error("query text missing for query " +
                               run[i].query_id);
    reranked[i] =
        rerank(it->second, run[i], corpus, *backend, config, &stats[i]);
  });
  write_run(reranked, config.tag, args.out);

  RerankStats total;
  for (const RerankStats& s : stats) {
    total.selector_calls += s.selector_calls;
    total.fallbacks += s.fallbacks;
  }
  std::cerr << "reranked " << run.size() << " queries with "
            << total.selector_calls << " selector calls ("
            << total.fallbacks << " fallbacks) -> " << args.out << "\n";
}

struct EvaluateArgs {
  std::string run, qrels, per_query;
  int k = 10;
};

void cmd_evaluate(const EvaluateArgs& args) {
  std::vector<RankedList> run = load_run(args.run);
  Qrels qrels = load_qrels(args.qrels);
  EvalResult result = mean_ndcg(run, qrels, args.k);
  if (!args.per_query.empty()) {
    std::ofstream out(args.per_query);
    if (!out)
      throw std::runtime_error("cannot write file: " + args.per_query);
    char buf[64];
    for (const QueryScore& q : result.per_query) {
      std::snprintf(buf, sizeof(buf), "%.6f", q.ndcg);
      out << q.query_id << "\t" << buf << "\n";
    }
  }
  std::printf("ndcg@%d %.4f\n", args.k, result.mean_ndcg);
}

struct BuildArgs {
  std::string qrels, run, corpus, queries, out, sft_out;
  std::string sft_mode = "setwise";
  uint64_t seed = 0;
  int budget = -1;
};

void cmd_build_train_data(const BuildArgs& args, const Settings& settings) {
  Qrels qrels = load_qrels(args.qrels);
  std::vector<RankedList> run = load_run(args.run);
  DocumentStore corpus = load_corpus(args.corpus);
  std::vector<Query> queries = load_queries_tsv(args.queries);

  BuildStats stats;
  std::vector<TrainingInstance> instances =
      build_grpo_instances(qrels, run, corpus, queries, args.seed, &stats);
  write_instances_jsonl(instances, args.out);
  std::cerr << "built " << stats.instances_built << " instances from "
            << stats.queries_seen << " queries (skipped: "
            << stats.skipped_no_relevant << " without usable relevant doc, "
            << stats.skipped_small_pool << " with small negative pool, "
            << stats.skipped_no_query_text << " without query text)\n";

  if (!args.sft_out.empty()) {
    PromptBudget budget;
    budget.max_units =
        args.budget >= 0
            ? args.budget
            : settings.config.value("max_prompt_length", 4096);
    std::vector<SftExample> examples = build_sft_examples(
        instances, corpus, prompt_mode_from_name(args.sft_mode), budget);
    write_sft_jsonl(examples, args.sft_out);
    std::cerr << "wrote " << examples.size() << " supervised pairs -> "
              << args.sft_out << "\n";
  }
}

struct ToyTrainArgs {
  uint64_t seed = 0;
  int steps = 2000;
  int group_size = -1;
  int batch = -1;
  int tasks = 256;
  int candidates = 20;
  int dim = 8;
  double beta = 0.04;
  double eps = 0.2;
  double lr = -1.0;
  int log_every = 100;
  std::string out;
};

void cmd_toy_train(const ToyTrainArgs& args, const Settings& settings,
                   const CLI::Option* group_opt, const CLI::Option* batch_opt,
                   const CLI::Option* lr_opt) {
  ToyTrainConfig config;
  config.seed = args.seed;
  config.steps = args.steps;
  config.task_count = args.tasks;
  config.n_candidates = args.candidates;
  config.dim = args.dim;
  config.grpo.kl_beta = args.beta;
  config.grpo.clip_eps = args.eps;
  config.grpo.group_size = settings.resolve<int>(
      group_opt, args.group_size, "group_size", config.grpo.group_size);
  config.grpo.batch_size = settings.resolve<int>(
      batch_opt, args.batch, "batch_size", config.grpo.batch_size);
  config.grpo.learning_rate = settings.resolve<double>(
      lr_opt, args.lr, "learning_rate", config.grpo.learning_rate);

  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot write file: " + args.out);

  double window_sum = 0.0;
  std::vector<double> window;
  train_toy_policy(config, [&](const StepStats& stats) {
    out << step_stats_json(stats) << "\n";
    window.push_back(stats.mean_reward);
    window_sum += stats.mean_reward;
    if (window.size() > 200) {
      window_sum -= window[window.size() - 201];
    }
    if (args.log_every > 0 && stats.step % args.log_every == 0) {
      double ma = window_sum /
                  static_cast<double>(std::min<size_t>(window.size(), 200));
      std::fprintf(stderr,
                   "step %d mean_reward %.4f objective %.6f ma200 %.4f\n",
                   stats.step, stats.mean_reward, stats.objective, ma);
    }
  });
  double ma = window_sum /
              static_cast<double>(std::min<size_t>(window.size(), 200));
  std::fprintf(stderr, "done: 200-step moving-average reward %.4f\n", ma);
}

struct ParseCheckArgs {
  std::string in;
  std::string mode = "rank-r1";
  bool jsonl = false;
  int gold = 0;
  int count = 20;
};

void cmd_parse_check(const ParseCheckArgs& args) {
  std::ifstream in(args.in);
  if (!in) throw std::runtime_error("cannot open file: " + args.in);
  PromptMode mode = prompt_mode_from_name(args.mode);
  std::string line;
  size_t lineno = 0, failures = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string text = line;
    if (args.jsonl) {
      json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.contains("text"))
        throw std::runtime_error(args.in + ":" + std::to_string(lineno) +
                                 ": expected a JSON object with 'text'");
      text = obj["text"].get<std::string>();
    }
    ParsedAnswer parsed = parse_completion(text, mode);
    std::cout << lineno;
    if (parsed.well_formed) {
      std::cout << " ok label=" << parsed.label;
      if (parsed.think) std::cout << " think_chars=" << parsed.think->size();
    } else {
      std::cout << " format-failure";
      ++failures;
    }
    if (args.gold > 0)
      std::cout << " reward="
                << compute_reward(parsed, args.gold, args.count);
    std::cout << "\n";
  }
  std::cerr << lineno << " completions, " << failures << " format failures\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"setwise heapsort reranking and GRPO training pipeline"};
  app.require_subcommand(1);

  std::string config_path, endpoint, model;
  int concurrency = 1;
  uint64_t global_seed = 0;
  app.add_option("--config", config_path, "JSON config file");
  auto* endpoint_opt =
      app.add_option("--endpoint", endpoint,
                     "OpenAI-compatible base URL, e.g. http://host:8000/v1");
  auto* model_opt = app.add_option("--model", model, "model name");
  app.add_option("--concurrency", concurrency,
                 "max parallel queries / requests in flight")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", global_seed, "global RNG seed");

  Settings settings;

  RerankArgs rr;
  CLI::App* rerank_cmd =
      app.add_subcommand("rerank", "rerank a run file with setwise heapsort");
  rerank_cmd->fallthrough();
  rerank_cmd->add_option("--run", rr.run_in, "input run file")->required();
  rerank_cmd->add_option("--corpus", rr.corpus, "corpus .jsonl")->required();
  rerank_cmd->add_option("--queries", rr.queries, "queries .tsv")->required();
  rerank_cmd->add_option("--out", rr.out, "output run file")->required();
  rerank_cmd->add_option("--k", rr.k, "documents to rerank into the head");
  rerank_cmd->add_option("--arity", rr.arity, "heap arity (children per call)");
  rerank_cmd->add_option("--topn", rr.topn, "first-stage depth to rerank");
  rerank_cmd->add_option("--mode", rr.mode, "rank-r1 | setwise")
      ->check(CLI::IsMember({"rank-r1", "setwise"}));
  rerank_cmd->add_option("--retries", rr.retries,
                         "retries per unparseable selector answer");
  rerank_cmd->add_option("--temperature", rr.temperature,
                         "selector sampling temperature");
  rerank_cmd->add_option("--budget", rr.budget,
                         "prompt budget in units (0 disables truncation)");
  rerank_cmd->add_option("--budget-unit", rr.budget_unit, "chars | tokens")
      ->check(CLI::IsMember({"chars", "tokens"}));
  rerank_cmd->add_option("--tag", rr.tag, "run tag for the output file");
  rerank_cmd->add_option("--mock-script", rr.mock_script,
                         "scripted backend JSON instead of an endpoint");
  rerank_cmd->callback([&] {
    settings.load_config(config_path);
    cmd_rerank(rr, settings, endpoint, model, concurrency, endpoint_opt,
               model_opt);
  });

  EvaluateArgs ev;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "nDCG@k of a run against qrels");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--run", ev.run, "run file")->required();
  eval_cmd->add_option("--qrels", ev.qrels, "qrels file")->required();
  eval_cmd->add_option("--k", ev.k, "cutoff")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--per-query", ev.per_query,
                       "write per-query scores to this TSV");
  eval_cmd->callback([&] { cmd_evaluate(ev); });

  BuildArgs bd;
  CLI::App* build_cmd = app.add_subcommand(
      "build-train-data", "sample 19 negatives + 1 relevant per query");
  build_cmd->fallthrough();
  build_cmd->add_option("--qrels", bd.qrels, "qrels file")->required();
  build_cmd->add_option("--run", bd.run, "first-stage run file")->required();
  build_cmd->add_option("--corpus", bd.corpus, "corpus .jsonl")->required();
  build_cmd->add_option("--queries", bd.queries, "queries .tsv")->required();
  build_cmd->add_option("--out", bd.out, "instances .jsonl")->required();
  build_cmd->add_option("--sft-out", bd.sft_out,
                        "also write supervised (prompt, target) pairs");
  build_cmd->add_option("--sft-mode", bd.sft_mode, "rank-r1 | setwise")
      ->check(CLI::IsMember({"rank-r1", "setwise"}));
  build_cmd->add_option("--budget", bd.budget,
                        "prompt budget for the supervised pairs");
  build_cmd->callback([&] {
    settings.load_config(config_path);
    bd.seed = global_seed;
    cmd_build_train_data(bd, settings);
  });

  ToyTrainArgs toy;
  CLI::App* toy_cmd = app.add_subcommand(
      "grpo-toy-train", "GRPO loop on the synthetic selection task");
  toy_cmd->fallthrough();
  toy_cmd->add_option("--out", toy.out, "per-step stats .jsonl")->required();
  toy_cmd->add_option("--steps", toy.steps, "training steps");
  auto* group_opt =
      toy_cmd->add_option("--group-size", toy.group_size, "rollouts per task");
  auto* batch_opt =
      toy_cmd->add_option("--batch", toy.batch, "tasks per step");
  auto* lr_opt = toy_cmd->add_option("--lr", toy.lr, "learning rate");
  toy_cmd->add_option("--beta", toy.beta, "KL penalty weight");
  toy_cmd->add_option("--eps", toy.eps, "clip range");
  toy_cmd->add_option("--tasks", toy.tasks, "synthetic task pool size");
  toy_cmd->add_option("--candidates", toy.candidates,
                      "candidates per task (2..20)");
  toy_cmd->add_option("--dim", toy.dim, "feature dimension");
  toy_cmd->add_option("--log-every", toy.log_every,
                      "stderr progress interval (0 silences)");
  toy_cmd->callback([&] {
    settings.load_config(config_path);
    toy.seed = seed_opt->count() > 0
                   ? global_seed
                   : settings.config.value("seed", uint64_t{0});
    cmd_toy_train(toy, settings, group_opt, batch_opt, lr_opt);
  });

  ParseCheckArgs pc;
  CLI::App* parse_cmd = app.add_subcommand(
      "parse-check", "run completions through the format parser");
  parse_cmd->fallthrough();
  parse_cmd->add_option("--in", pc.in, "file with one completion per line")
      ->required();
  parse_cmd->add_option("--mode", pc.mode, "rank-r1 | setwise")
      ->check(CLI::IsMember({"rank-r1", "setwise"}));
  parse_cmd->add_flag("--jsonl", pc.jsonl,
                      "lines are JSON objects with a 'text' field");
  parse_cmd->add_option("--gold", pc.gold,
                        "gold label; also print the reward per line");
  parse_cmd->add_option("--count", pc.count, "candidate count for rewards");
  parse_cmd->callback([&] { cmd_parse_check(pc); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run '" << (argc > 0 ? argv[0] : "rankrl")
              << " --help' for usage\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace rankrl
