// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0
//
// dst: collect thought trees, train the predictor, solve and sweep.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "dst/bench.hpp"
#include "dst/error.hpp"
#include "dst/scripted.hpp"

namespace fs = std::filesystem;
using namespace dst;
using namespace dst::bench;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitGenerator = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::string> generator;
  std::optional<std::string> endpoint;
  std::optional<std::string> script;
  std::optional<double> tau;
  std::optional<std::size_t> beam;
  std::optional<std::size_t> k;
  std::optional<double> gamma;
  std::optional<std::size_t> depth;
  std::optional<std::size_t> problems;
  std::optional<std::string> problem_file;
  std::optional<std::string> answer_template;
  std::optional<std::size_t> jobs;
  std::vector<std::string> modes;
  bool no_timing = false;
};

BenchConfig resolve(const Overrides& o) {
  BenchConfig c = o.config.empty() ? parse_config("{}") : load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.search.seed = *o.seed;
    c.train.params.seed = *o.seed;
  }
  if (o.generator) c.generator.kind = *o.generator;
  if (o.endpoint) {
    c.generator.kind = "http";
    c.generator.http.base_url = *o.endpoint;
  }
  if (o.script) {
    c.generator.kind = "scripted";
    c.generator.script = *o.script;
  }
  if (o.tau) c.search.tau = *o.tau;
  if (o.beam) c.search.beam_width = *o.beam;
  if (o.k) {
    c.search.fanout = *o.k;
    c.collect.fanout = *o.k;
  }
  if (o.gamma) {
    c.collect.gamma = *o.gamma;
    c.search.gamma = *o.gamma;
  }
  if (o.depth) {
    c.search.max_depth = *o.depth;
    c.collect.max_depth = *o.depth;
  }
  if (o.problems) c.problems.count = *o.problems;
  if (o.problem_file) {
    c.problems.kind = "jsonl";
    c.problems.path = *o.problem_file;
    if (!o.problems) c.problems.count = 0;
  }
  if (o.answer_template) c.problems.answer_template = *o.answer_template;
  if (o.jobs) c.report.jobs = *o.jobs;
  if (o.no_timing) c.report.timing = false;
  if (!o.modes.empty()) {
    c.modes.clear();
    for (const auto& m : o.modes) c.modes.push_back(parse_search_mode(m));
  }
  c.search.validate();
  return c;
}

void report_diagnostics(const std::vector<std::string>& diagnostics) {
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < diagnostics.size() && i < kShown; ++i)
    std::cerr << "warning: " << diagnostics[i] << '\n';
  if (diagnostics.size() > kShown)
    std::cerr << "warning: " << diagnostics.size() - kShown << " more problems failed\n";
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DeserializationError(path.string(), "cannot open for writing");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad grid value '" + item + "'");
    }
  }
  return grid;
}

int cmd_collect(const Overrides& o, const std::string& record) {
  const BenchConfig c = resolve(o);
  auto generator = make_generator(c.generator);
  const auto problems = load_problems(c);
  std::unique_ptr<RecordingGenerator> recorder;
  Generator* gen = generator.get();
  if (!record.empty()) {
    recorder = std::make_unique<RecordingGenerator>(*generator);
    gen = recorder.get();
  }
  const CollectSummary s = run_collect(c, *gen, problems, o.out);
  if (recorder) save_script(record, recorder->records());
  std::cout << "collected " << s.problems - s.failed << "/" << s.problems << " problems, "
            << s.nodes << " nodes, " << s.examples << " training samples -> " << o.out << '\n';
  report_diagnostics(s.diagnostics);
  return s.failed == s.problems && s.problems > 0 ? kExitGenerator : 0;
}

int cmd_train(const Overrides& o, std::string dataset, std::string model) {
  const BenchConfig c = resolve(o);
  if (dataset.empty()) dataset = (fs::path(o.out) / "dataset.jsonl").string();
  if (model.empty()) model = (fs::path(o.out) / "model.json").string();
  const auto examples = load_dataset(dataset);
  const TrainOutcome outcome = train_model(c, examples);
  if (fs::path(model).has_parent_path()) fs::create_directories(fs::path(model).parent_path());
  outcome.model.save(model);
  auto report = open_out(fs::path(o.out) / "train_report.json");
  write_train_report(report, outcome);
  std::cout << "trained " << outcome.model.trees().size() << " trees on " << outcome.n_train << " samples; ";
  if (outcome.n_holdout == 0) {
    std::cout << "no holdout";
  } else {
    std::cout << "holdout (" << outcome.n_holdout << ") mse " << outcome.holdout_mse << " auc "
              << outcome.holdout_auc;
  }
  std::cout << " -> " << model << '\n';
  return 0;
}

std::string default_predictor(const Overrides& o, const std::string& model) {
  if (!model.empty()) return model;
  const auto path = fs::path(o.out) / "model.json";
  if (fs::exists(path)) return path.string();
  throw ConfigError("no predictor: pass --model <path|probe:i> or train first");
}

int cmd_solve(const Overrides& o, const std::string& model, const std::string& trace) {
  const BenchConfig c = resolve(o);
  auto generator = make_generator(c.generator);
  const auto predictor = load_predictor(default_predictor(o, model), generator->meta().embedding_dim);
  const auto problems = load_problems(c);
  std::vector<SolveRun> runs;
  for (SearchMode mode : c.modes) runs.push_back(run_solve(c, mode, *generator, *predictor, problems));

  auto csv = open_out(fs::path(o.out) / "solve.csv");
  write_solve_csv(csv, runs);
  if (!trace.empty()) {
    auto out = open_out(trace);
    for (const auto& run : runs) {
      for (const auto& r : run.results) write_trace(out, r.trace);
    }
  }
  bool any_failed = false;
  for (const auto& run : runs) {
    const SolveRow agg = aggregate(std::string(to_string(run.mode)), run.rows);
    std::cout << agg.method << ": accuracy " << agg.correct << ", generated tokens "
              << agg.generated_tokens << ", calls " << agg.generator_calls << ", shortcut rate "
              << agg.shortcut_rate << '\n';
    report_diagnostics(run.diagnostics);
    any_failed = any_failed || !run.diagnostics.empty();
  }
  return any_failed ? kExitGenerator : 0;
}

int cmd_sweep(const Overrides& o, const std::string& param, const std::string& grid_text,
              const std::string& model, std::string trees) {
  const BenchConfig c = resolve(o);
  const SweepParameter parameter = parse_sweep_parameter(param);
  const auto grid = parse_grid(grid_text);
  auto generator = make_generator(c.generator);
  SweepInputs inputs;
  inputs.generator = generator.get();
  inputs.problems = load_problems(c);
  std::unique_ptr<Predictor> predictor;
  if (parameter != SweepParameter::gamma) {
    predictor = load_predictor(default_predictor(o, model), generator->meta().embedding_dim);
    inputs.predictor = predictor.get();
  } else {
    if (trees.empty()) trees = (fs::path(o.out) / "trees").string();
    inputs.trees_dir = trees;
  }
  const auto rows = run_sweep(c, parameter, grid, inputs);
  auto csv = open_out(fs::path(o.out) / ("sweep_" + param + ".csv"));
  write_sweep_csv(csv, rows);
  write_sweep_csv(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive predict-first thought search"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "run seed");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--generator", o.generator, "synthetic | scripted | http");
  app.add_option("--endpoint", o.endpoint, "generation server URL (implies --generator http)");
  app.add_option("--script", o.script, "replay script (implies --generator scripted)");
  app.add_option("--tau", o.tau, "shortcut threshold");
  app.add_option("--beam", o.beam, "beam width b");
  app.add_option("--k", o.k, "candidates per expansion");
  app.add_option("--gamma", o.gamma, "label discount");
  app.add_option("--depth", o.depth, "maximum depth");
  app.add_option("--problems", o.problems, "number of problems");
  app.add_option("--problem-file", o.problem_file, "JSON lines {id, question, answer}")
      ->check(CLI::ExistingFile);
  app.add_option("--answer-template", o.answer_template, "gold extraction, e.g. '#### {answer}'");
  app.add_option("--jobs", o.jobs, "worker threads");
  app.add_option("--mode", o.modes, "greedy | adaptive | full_beam (repeatable)");
  app.add_flag("--no-timing", o.no_timing, "write zero wall times");

  auto* collect = app.add_subcommand("collect", "build and label thought trees");
  std::string record;
  collect->add_option("--record", record, "also write a replay script");

  auto* train = app.add_subcommand("train", "fit the predictor");
  std::string dataset, model;
  train->add_option("--dataset", dataset, "training JSON lines (default <out>/dataset.jsonl)");
  train->add_option("--model", model, "model output (default <out>/model.json)");

  auto* solve = app.add_subcommand("solve", "run searches and write solve.csv");
  std::string trace;
  solve->add_option("--model", model, "model path or probe:<feature index>");
  solve->add_option("--trace", trace, "write expansion events as JSON lines");

  auto* sweep = app.add_subcommand("sweep", "vary one parameter");
  std::string param, grid, trees;
  sweep->add_option("--param", param, "tau | beam | gamma")->required();
  sweep->add_option("--grid", grid, "comma-separated values")->required();
  sweep->add_option("--model", model, "model path or probe:<feature index>");
  sweep->add_option("--trees", trees, "saved trees for gamma sweeps (default <out>/trees)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) return cmd_collect(o, record);
    if (*train) return cmd_train(o, dataset, model);
    if (*solve) return cmd_solve(o, model, trace);
    if (*sweep) return cmd_sweep(o, param, grid, model, trees);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const GenerationError& e) {
    std::cerr << "generator error: " << e.what() << '\n';
    return kExitGenerator;
  } catch (const ConnectionError& e) {
    std::cerr << "generator error: " << e.what() << '\n';
    return kExitGenerator;
  } catch (const ProtocolError& e) {
    std::cerr << "generator error: " << e.what() << '\n';
    return kExitGenerator;
  } catch (const DeserializationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const LookupError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
