// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dst/error.hpp"
#include "dst/hashing.hpp"
#include "dst/metrics.hpp"
#include "dst/scripted.hpp"

namespace dst::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void read_field(const json& section, const char* key, T& out) {
  if (section.contains(key) && !section.at(key).is_null()) out = section.at(key).get<T>();
}

std::string zero_pad(std::size_t i, int width) {
  std::ostringstream s;
  s << std::setw(width) << std::setfill('0') << i;
  return s.str();
}

/// Runs `work(i)` for i in [0, n) on `jobs` threads.
template <typename Work>
void parallel_for(std::size_t n, std::size_t jobs, Work work) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex mu;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Generator view that serializes calls when the backend demands it.
struct GeneratorHandle {
  explicit GeneratorHandle(Generator& g) : serialized(g), active(&g) {
    if (g.meta().serialized) active = &serialized;
  }
  SerializedGenerator serialized;
  Generator* active;
};

std::string fmt_double(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

BenchConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DeserializationError(source, e.what());
  }
  BenchConfig c;
  try {
    if (!doc.is_object()) throw DeserializationError(source, "config must be a JSON object");
    read_field(doc, "seed", c.seed);

    if (doc.contains("generator")) {
      const auto& g = doc.at("generator");
      read_field(g, "kind", c.generator.kind);
      read_field(g, "script", c.generator.script);
      read_field(g, "endpoint", c.generator.http.base_url);
      read_field(g, "bearer_token", c.generator.http.bearer_token);
      read_field(g, "timeout_seconds", c.generator.http.timeout_seconds);
      read_field(g, "max_in_flight", c.generator.http.max_in_flight);
      read_field(g, "stop", c.generator.http_options.stop);
      read_field(g, "max_tokens", c.generator.http_options.max_tokens);
      if (g.contains("synthetic")) {
        const auto& s = g.at("synthetic");
        auto& w = c.generator.synthetic;
        read_field(s, "chain_length", w.chain_length);
        read_field(s, "correct_step_prob", w.correct_step_prob);
        read_field(s, "momentum", w.momentum);
        read_field(s, "separability", w.separability);
        read_field(s, "embedding_dim", w.embedding_dim);
        read_field(s, "value_min", w.value_min);
        read_field(s, "value_max", w.value_max);
        read_field(s, "multiplier_max", w.multiplier_max);
      }
    }
    if (doc.contains("problems")) {
      const auto& p = doc.at("problems");
      read_field(p, "source", c.problems.kind);
      read_field(p, "count", c.problems.count);
      read_field(p, "path", c.problems.path);
      read_field(p, "answer_template", c.problems.answer_template);
    }
    if (doc.contains("search")) {
      const auto& s = doc.at("search");
      read_field(s, "beam_width", c.search.beam_width);
      read_field(s, "fanout", c.search.fanout);
      read_field(s, "max_depth", c.search.max_depth);
      read_field(s, "tau", c.search.tau);
      read_field(s, "temperature", c.search.temperature);
      if (s.contains("fallback_pool_policy"))
        c.search.fallback_pool_policy =
            parse_fallback_policy(s.at("fallback_pool_policy").get<std::string>());
      if (s.contains("modes")) {
        c.modes.clear();
        for (const auto& m : s.at("modes")) c.modes.push_back(parse_search_mode(m.get<std::string>()));
      }
    }
    if (doc.contains("collect")) {
      const auto& s = doc.at("collect");
      read_field(s, "fanout", c.collect.fanout);
      read_field(s, "max_depth", c.collect.max_depth);
      read_field(s, "gamma", c.collect.gamma);
      read_field(s, "include_leaves", c.collect.include_leaves);
      if (s.contains("expansion_cap") && !s.at("expansion_cap").is_null())
        c.collect.expansion_cap = s.at("expansion_cap").get<std::size_t>();
    }
    if (doc.contains("train")) {
      const auto& s = doc.at("train");
      read_field(s, "learning_rate", c.train.params.learning_rate);
      read_field(s, "n_rounds", c.train.params.n_rounds);
      read_field(s, "max_leaves", c.train.params.max_leaves);
      read_field(s, "min_samples_leaf", c.train.params.min_samples_leaf);
      read_field(s, "holdout_fraction", c.train.holdout_fraction);
      read_field(s, "subsample", c.train.subsample);
    }
    if (doc.contains("verify")) {
      const auto& s = doc.at("verify");
      if (s.contains("kind")) c.verifier.kind = parse_verifier_kind(s.at("kind").get<std::string>());
      read_field(s, "answer_template", c.verifier.answer_template);
      read_field(s, "rel_tol", c.verifier.rel_tol);
    }
    if (doc.contains("report")) {
      const auto& s = doc.at("report");
      read_field(s, "jobs", c.report.jobs);
      read_field(s, "timing", c.report.timing);
    }
  } catch (const json::exception& e) {
    throw DeserializationError(source, e.what());
  }
  c.search.gamma = c.collect.gamma;
  c.search.seed = c.seed;
  c.search.validate();
  c.train.params.seed = c.seed;
  if (!(c.train.holdout_fraction >= 0.0 && c.train.holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction must lie in [0, 1)");
  if (!(c.train.subsample > 0.0 && c.train.subsample <= 1.0))
    throw ConfigError("subsample must lie in (0, 1]");
  return c;
}

BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeserializationError(path, "cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::vector<Problem> read_problem_jsonl(std::istream& in, const std::string& source,
                                        const std::string& answer_template) {
  std::vector<Problem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    try {
      const auto j = json::parse(line);
      Problem p;
      p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      p.text = j.at("question").get<std::string>();
      const auto raw = j.at("answer").is_string() ? j.at("answer").get<std::string>()
                                                  : j.at("answer").dump();
      const auto gold = extract_answer(raw, answer_template);
      if (!gold) throw DeserializationError(where, "answer does not match the answer template");
      p.gold_answer = *gold;
      if (p.id.empty() || p.text.empty()) throw DeserializationError(where, "empty id or question");
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DeserializationError(where, e.what());
    }
  }
  return out;
}

std::vector<Problem> load_problems(const BenchConfig& config) {
  std::vector<Problem> problems;
  if (config.problems.kind == "synthetic") {
    const std::size_t width = std::to_string(config.problems.count).size();
    for (std::size_t i = 0; i < config.problems.count; ++i) {
      Problem p = make_synthetic_problem(config.generator.synthetic, hash_combine(config.seed, i));
      p.id = "syn-s" + std::to_string(config.seed) + "-" + zero_pad(i, static_cast<int>(width));
      problems.push_back(std::move(p));
    }
  } else if (config.problems.kind == "jsonl") {
    std::ifstream in(config.problems.path);
    if (!in) throw DeserializationError(config.problems.path, "cannot open problem file");
    problems = read_problem_jsonl(in, config.problems.path, config.problems.answer_template);
    if (config.problems.count > 0 && problems.size() > config.problems.count)
      problems.resize(config.problems.count);
  } else {
    throw ConfigError("unknown problem source '" + config.problems.kind + "'");
  }
  std::vector<std::string> ids;
  for (const auto& p : problems) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ValidationError("problem ids must be unique");
  return problems;
}

std::unique_ptr<Generator> make_generator(const GeneratorSettings& settings) {
  if (settings.kind == "synthetic") return std::make_unique<SyntheticGenerator>(settings.synthetic);
  if (settings.kind == "scripted") {
    if (settings.script.empty()) throw ConfigError("scripted generator needs a script path");
    return std::make_unique<ScriptedGenerator>(load_script(settings.script));
  }
  if (settings.kind == "http") {
    if (settings.http.base_url.empty()) throw ConfigError("http generator needs an endpoint");
    return std::make_unique<HttpGenerator>(settings.http, settings.http_options);
  }
  throw ConfigError("unknown generator '" + settings.kind + "'");
}

std::unique_ptr<Predictor> load_predictor(const std::string& spec, std::size_t embedding_dim) {
  constexpr std::string_view kProbe = "probe:";
  if (spec.rfind(kProbe, 0) == 0) {
    std::size_t index = 0;
    try {
      index = std::stoul(spec.substr(kProbe.size()));
    } catch (const std::exception&) {
      throw ConfigError("bad probe predictor spec '" + spec + "'");
    }
    return std::make_unique<FeatureProbePredictor>(embedding_dim + 1, index);
  }
  try {
    return std::make_unique<GbdtModel>(GbdtModel::load(spec, embedding_dim + 1));
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

bool is_correct(const BenchConfig& config, const Problem& problem, const SearchResult& result) {
  if (!result.answer) return false;
  if (config.problems.kind == "synthetic") return verify_exact(*result.answer, problem.gold_answer);
  ReasoningState leaf;
  leaf.answer = result.answer;
  return label_leaf(leaf, problem, config.verifier) == 1;
}

CollectSummary run_collect(const BenchConfig& config, Generator& generator,
                           const std::vector<Problem>& problems, const std::string& out_dir) {
  const fs::path root(out_dir);
  fs::create_directories(root / "trees");
  CollectOptions options;
  options.fanout = config.collect.fanout;
  options.max_depth = config.collect.max_depth;
  options.seed = config.seed;
  options.temperature = config.search.temperature;
  options.expansion_cap = config.collect.expansion_cap;

  GeneratorHandle handle(generator);
  std::vector<std::vector<TrainingExample>> per_problem(problems.size());
  std::vector<std::size_t> node_counts(problems.size(), 0);
  std::vector<std::string> errors(problems.size());

  parallel_for(problems.size(), config.report.jobs, [&](std::size_t i) {
    const Problem& p = problems[i];
    try {
      ThoughtTree tree = build_tree(p, *handle.active, options);
      propagate_scores(tree, p, config.collect.gamma, config.verifier);
      save_tree((root / "trees" / (p.id + ".json")).string(), p, tree);
      per_problem[i] = emit_dataset(tree, config.collect.include_leaves);
      node_counts[i] = tree.size();
    } catch (const GenerationError& e) {
      errors[i] = e.what();
    }
  });

  CollectSummary summary;
  summary.problems = problems.size();
  std::ofstream dataset(root / "dataset.jsonl");
  if (!dataset) throw DeserializationError((root / "dataset.jsonl").string(), "cannot write dataset");
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (!errors[i].empty()) {
      ++summary.failed;
      summary.diagnostics.push_back(errors[i]);
      continue;
    }
    summary.nodes += node_counts[i];
    summary.examples += per_problem[i].size();
    write_dataset(dataset, per_problem[i]);
  }
  std::ofstream out(root / "summary.json");
  out << json{{"seed_problems", summary.problems},
              {"failed", summary.failed},
              {"tree_nodes", summary.nodes},
              {"training_samples", summary.examples},
              {"diagnostics", summary.diagnostics}}
             .dump(2)
      << '\n';
  return summary;
}

std::vector<TrainingExample> relabel_trees(const std::string& trees_dir, double gamma,
                                           const VerifierChoice& verifier, bool include_leaves) {
  std::vector<fs::path> files;
  if (!fs::is_directory(trees_dir)) throw DeserializationError(trees_dir, "not a directory");
  for (const auto& entry : fs::directory_iterator(trees_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TrainingExample> all;
  for (const auto& f : files) {
    TreeDump dump = load_tree(f.string());
    propagate_scores(dump.tree, dump.problem, gamma, verifier);
    auto examples = emit_dataset(dump.tree, include_leaves);
    all.insert(all.end(), std::make_move_iterator(examples.begin()),
               std::make_move_iterator(examples.end()));
  }
  return all;
}

TrainOutcome train_model(const BenchConfig& config, const std::vector<TrainingExample>& dataset) {
  if (dataset.empty()) throw ValidationError("dataset is empty");
  std::vector<TrainingExample> train, holdout;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    const double u_split =
        static_cast<double>(hash_combine(config.seed, stable_hash(ex.problem_id)) >> 11) * 0x1.0p-53;
    if (u_split < config.train.holdout_fraction) {
      holdout.push_back(ex);
      continue;
    }
    if (config.train.subsample < 1.0) {
      const double u = static_cast<double>(hash_combine(config.seed ^ 0xa5a5a5a5ULL, i) >> 11) *
                       0x1.0p-53;
      if (u >= config.train.subsample) continue;
    }
    train.push_back(ex);
  }
  if (train.empty()) throw ValidationError("no training examples after split and subsampling");

  TrainOutcome outcome;
  outcome.model = GbdtModel::train(train, config.train.params, &outcome.report);
  outcome.n_train = train.size();
  outcome.n_holdout = holdout.size();
  if (!holdout.empty()) {
    std::vector<double> pred, target;
    std::vector<int> positive;
    for (const auto& ex : holdout) {
      pred.push_back(outcome.model.predict(ex.features));
      target.push_back(ex.label);
      positive.push_back(ex.label >= 0.5 ? 1 : 0);
    }
    outcome.holdout_mse = mean_squared_error(pred, target);
    outcome.holdout_auc = roc_auc(pred, positive);
  }
  return outcome;
}

void write_train_report(std::ostream& out, const TrainOutcome& o) {
  out << json{{"n_train", o.n_train},
              {"n_holdout", o.n_holdout},
              {"n_trees", o.model.trees().size()},
              {"train_mse", o.report.train_mse},
              {"holdout_mse", o.holdout_mse},
              {"holdout_auc", o.holdout_auc}}
             .dump(2)
      << '\n';
}

SolveRun run_solve(const BenchConfig& config, SearchMode mode, Generator& generator,
                   const Predictor& predictor, const std::vector<Problem>& problems) {
  if (predictor.n_features() != generator.meta().embedding_dim + 1) {
    throw ConfigError("predictor expects " + std::to_string(predictor.n_features()) +
                      " features; generator '" + generator.meta().name + "' yields " +
                      std::to_string(generator.meta().embedding_dim + 1));
  }
  GeneratorHandle handle(generator);
  SolveRun run{mode, std::vector<SolveRow>(problems.size()),
               std::vector<SearchResult>(problems.size()), {}};
  std::vector<std::string> errors(problems.size());
  const std::string method(to_string(mode));

  parallel_for(problems.size(), config.report.jobs, [&](std::size_t i) {
    const Problem& p = problems[i];
    SolveRow& row = run.rows[i];
    row.method = method;
    row.problem_id = p.id;
    const auto start = std::chrono::steady_clock::now();
    try {
      run.results[i] = run_search(mode, p, *handle.active, predictor, config.search);
    } catch (const GenerationError& e) {
      errors[i] = e.what();
      return;
    }
    const auto& r = run.results[i];
    row.correct = is_correct(config, p, r) ? 1.0 : 0.0;
    row.generated_tokens = static_cast<double>(r.generated_tokens);
    row.prompt_tokens = static_cast<double>(r.prompt_tokens);
    row.generator_calls = static_cast<double>(r.generator_calls);
    row.shortcut_rate = r.shortcut_rate();
    row.effective_beam_width = r.effective_beam_width();
    if (config.report.timing) {
      row.wall_time_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) run.diagnostics.push_back(e);
  }
  return run;
}

SolveRow aggregate(const std::string& method, const std::vector<SolveRow>& rows) {
  SolveRow agg;
  agg.method = method;
  agg.problem_id = "ALL";
  for (const auto& r : rows) {
    agg.correct += r.correct;
    agg.generated_tokens += r.generated_tokens;
    agg.prompt_tokens += r.prompt_tokens;
    agg.generator_calls += r.generator_calls;
    agg.shortcut_rate += r.shortcut_rate;
    agg.effective_beam_width += r.effective_beam_width;
    agg.wall_time_ms += r.wall_time_ms;
  }
  if (!rows.empty()) {
    const auto n = static_cast<double>(rows.size());
    agg.correct /= n;
    agg.shortcut_rate /= n;
    agg.effective_beam_width /= n;
  }
  return agg;
}

void write_solve_csv(std::ostream& out, const std::vector<SolveRun>& runs) {
  out << "method,problem_id,correct,generated_tokens,prompt_tokens,generator_calls,shortcut_rate,"
         "effective_beam_width,wall_time_ms\n";
  auto emit = [&](const SolveRow& r) {
    out << r.method << ',' << r.problem_id << ',' << fmt_double(r.correct) << ','
        << fmt_double(r.generated_tokens) << ',' << fmt_double(r.prompt_tokens) << ','
        << fmt_double(r.generator_calls) << ',' << fmt_double(r.shortcut_rate) << ','
        << fmt_double(r.effective_beam_width) << ',' << fmt_double(r.wall_time_ms) << '\n';
  };
  for (const auto& run : runs) {
    for (const auto& r : run.rows) emit(r);
  }
  for (const auto& run : runs) emit(aggregate(std::string(to_string(run.mode)), run.rows));
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "tau") return SweepParameter::tau;
  if (text == "beam") return SweepParameter::beam;
  if (text == "gamma") return SweepParameter::gamma;
  throw ConfigError("unknown sweep parameter '" + std::string(text) + "'");
}

namespace {

SweepRow summarize(const std::string& parameter, double value, const SolveRun& run) {
  const SolveRow agg = aggregate(std::string(to_string(run.mode)), run.rows);
  SweepRow row;
  row.parameter = parameter;
  row.value = value;
  row.method = agg.method;
  row.accuracy = agg.correct;
  row.generated_tokens = agg.generated_tokens;
  row.generator_calls = agg.generator_calls;
  std::size_t shortcuts = 0, expansions = 0;
  for (const auto& r : run.results) {
    shortcuts += r.shortcut_events;
    expansions += r.expansions();
  }
  row.live_shortcut_rate =
      expansions == 0 ? 0.0 : static_cast<double>(shortcuts) / static_cast<double>(expansions);
  row.shortcut_rate = row.live_shortcut_rate;
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const BenchConfig& config, SweepParameter parameter,
                                const std::vector<double>& grid, const SweepInputs& inputs) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  if (!inputs.generator) throw ConfigError("sweep needs a generator");
  std::vector<SweepRow> rows;

  switch (parameter) {
    case SweepParameter::tau: {
      if (!inputs.predictor) throw ConfigError("tau sweep needs a predictor");
      for (double tau : grid) {
        if (!(tau >= 0.0)) throw ValidationError("tau grid values must be >= 0");
      }
      // One no-shortcut run records every first-candidate score; each tau is
      // then replayed over that fixed stream.
      const SolveRun recorded = run_solve(config, SearchMode::full_beam, *inputs.generator,
                                          *inputs.predictor, inputs.problems);
      std::vector<ExpansionEvent> trace;
      for (const auto& r : recorded.results) trace.insert(trace.end(), r.trace.begin(), r.trace.end());
      for (double tau : grid) {
        BenchConfig c = config;
        c.search.tau = tau;
        const SolveRun run = run_solve(c, SearchMode::adaptive, *inputs.generator,
                                       *inputs.predictor, inputs.problems);
        SweepRow row = summarize("tau", tau, run);
        row.shortcut_rate = replay_shortcut_rate(trace, tau);
        rows.push_back(row);
      }
      break;
    }
    case SweepParameter::beam: {
      if (!inputs.predictor) throw ConfigError("beam sweep needs a predictor");
      for (double b : grid) {
        if (!(b >= 1.0) || b != std::floor(b)) throw ValidationError("beam grid values must be integers >= 1");
      }
      for (double b : grid) {
        BenchConfig c = config;
        c.search.beam_width = static_cast<std::size_t>(b);
        for (SearchMode mode : config.modes) {
          rows.push_back(summarize("beam", b,
                                   run_solve(c, mode, *inputs.generator, *inputs.predictor,
                                             inputs.problems)));
        }
      }
      break;
    }
    case SweepParameter::gamma: {
      if (inputs.trees_dir.empty()) throw ConfigError("gamma sweep needs saved trees");
      for (double g : grid) {
        if (!(g > 0.0 && g <= 1.0)) throw ValidationError("gamma grid values must lie in (0, 1]");
      }
      for (double g : grid) {
        const auto dataset =
            relabel_trees(inputs.trees_dir, g, config.verifier, config.collect.include_leaves);
        BenchConfig c = config;
        c.collect.gamma = g;
        c.search.gamma = g;
        const TrainOutcome trained = train_model(c, dataset);
        rows.push_back(summarize("gamma", g,
                                 run_solve(c, SearchMode::adaptive, *inputs.generator,
                                           trained.model, inputs.problems)));
      }
      break;
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "parameter,value,method,accuracy,generated_tokens,generator_calls,shortcut_rate,"
         "live_shortcut_rate\n";
  for (const auto& r : rows) {
    out << r.parameter << ',' << fmt_double(r.value) << ',' << r.method << ','
        << fmt_double(r.accuracy) << ',' << fmt_double(r.generated_tokens) << ','
        << fmt_double(r.generator_calls) << ',' << fmt_double(r.shortcut_rate) << ','
        << fmt_double(r.live_shortcut_rate) << '\n';
  }
}

}  // namespace dst::bench
