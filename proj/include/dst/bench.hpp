// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dst/collect.hpp"
#include "dst/gbdt.hpp"
#include "dst/llm_client.hpp"
#include "dst/search.hpp"
#include "dst/synthetic.hpp"
#include "dst/verify.hpp"

namespace dst::bench {

struct ProblemSource {
  /// "synthetic" or "jsonl".
  std::string kind = "synthetic";
  std::size_t count = 200;
  /// JSON lines {"id", "question", "answer"} for kind "jsonl".
  std::string path;
  /// Applied to the "answer" field to obtain the gold answer, e.g. "#### {answer}".
  std::string answer_template;
};

struct GeneratorSettings {
  /// "synthetic", "scripted" or "http".
  std::string kind = "synthetic";
  SyntheticWorldConfig synthetic;
  std::string script;
  HttpEndpoint http;
  HttpGeneratorOptions http_options;
};

struct CollectSettings {
  std::size_t fanout = 3;
  std::size_t max_depth = 5;
  double gamma = 0.99;
  bool include_leaves = true;
  std::optional<std::size_t> expansion_cap;
};

struct TrainSettings {
  TrainParams params;
  double holdout_fraction = 0.2;
  /// Fraction of examples kept for training (data-scaling runs).
  double subsample = 1.0;
};

struct ReportSettings {
  std::size_t jobs = 1;
  /// When false, wall_time_ms is written as 0 so reports are byte-reproducible.
  bool timing = true;
};

/// One JSON document with sections generator, problems, search, collect,
/// train, verify and report. Every field is optional.
struct BenchConfig {
  std::uint64_t seed = 0;
  GeneratorSettings generator;
  ProblemSource problems;
  SearchConfig search;
  std::vector<SearchMode> modes{SearchMode::greedy, SearchMode::adaptive, SearchMode::full_beam};
  CollectSettings collect;
  TrainSettings train;
  VerifierChoice verifier;
  ReportSettings report;
};

/// Throws DeserializationError naming `source` on malformed JSON or bad types,
/// ConfigError on invalid values.
BenchConfig parse_config(std::string_view text, const std::string& source = "<config>");
BenchConfig load_config(const std::string& path);

/// Synthetic problems are seeded from (seed, index); JSON-lines problems are
/// read from `source.path`. Throws DeserializationError with path and line.
std::vector<Problem> load_problems(const BenchConfig& config);
std::vector<Problem> read_problem_jsonl(std::istream& in, const std::string& source,
                                        const std::string& answer_template);

std::unique_ptr<Generator> make_generator(const GeneratorSettings& settings);

/// "probe:<index>" selects a FeatureProbePredictor; anything else is a model path.
std::unique_ptr<Predictor> load_predictor(const std::string& spec, std::size_t embedding_dim);

/// Accuracy check for a finished search. Synthetic problems use exact match.
bool is_correct(const BenchConfig& config, const Problem& problem, const SearchResult& result);

// ---------------------------------------------------------------------------
// collect

struct CollectSummary {
  std::size_t problems = 0;
  std::size_t failed = 0;
  std::size_t nodes = 0;
  std::size_t examples = 0;
  std::vector<std::string> diagnostics;
};

/// Writes <out_dir>/trees/<problem id>.json, <out_dir>/dataset.jsonl and
/// <out_dir>/summary.json.
CollectSummary run_collect(const BenchConfig& config, Generator& generator,
                           const std::vector<Problem>& problems, const std::string& out_dir);

/// Relabels saved trees with `gamma` and returns their merged dataset.
std::vector<TrainingExample> relabel_trees(const std::string& trees_dir, double gamma,
                                           const VerifierChoice& verifier, bool include_leaves);

// ---------------------------------------------------------------------------
// train

struct TrainOutcome {
  GbdtModel model;
  TrainReport report;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
  double holdout_mse = 0.0;
  double holdout_auc = 0.5;
};

/// Subsamples, splits by problem id and trains. Throws ValidationError on an
/// empty training set.
TrainOutcome train_model(const BenchConfig& config, const std::vector<TrainingExample>& dataset);
void write_train_report(std::ostream& out, const TrainOutcome& outcome);

// ---------------------------------------------------------------------------
// solve

struct SolveRow {
  std::string method;
  std::string problem_id;
  double correct = 0.0;
  double generated_tokens = 0.0;
  double prompt_tokens = 0.0;
  double generator_calls = 0.0;
  double shortcut_rate = 0.0;
  double effective_beam_width = 0.0;
  double wall_time_ms = 0.0;
};

struct SolveRun {
  SearchMode mode;
  std::vector<SolveRow> rows;
  std::vector<SearchResult> results;
  std::vector<std::string> diagnostics;
};

/// Runs one mode over all problems with a bounded worker pool. Problems whose
/// generator fails are reported in `diagnostics` and scored incorrect.
SolveRun run_solve(const BenchConfig& config, SearchMode mode, Generator& generator,
                   const Predictor& predictor, const std::vector<Problem>& problems);

/// Per-problem rows followed by one aggregate row per method: the mean of
/// correct, shortcut_rate and effective_beam_width, and the sum of the rest.
SolveRow aggregate(const std::string& method, const std::vector<SolveRow>& rows);
void write_solve_csv(std::ostream& out, const std::vector<SolveRun>& runs);

// ---------------------------------------------------------------------------
// sweep

enum class SweepParameter { tau, beam, gamma };
SweepParameter parse_sweep_parameter(std::string_view text);

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  std::string method;
  double accuracy = 0.0;
  double generated_tokens = 0.0;
  double generator_calls = 0.0;
  /// Tau sweeps: replayed over one recorded trace. Other sweeps: live rate.
  double shortcut_rate = 0.0;
  double live_shortcut_rate = 0.0;
};

struct SweepInputs {
  Generator* generator = nullptr;
  const Predictor* predictor = nullptr;
  std::vector<Problem> problems;
  /// Saved tree dumps, required for gamma sweeps.
  std::string trees_dir;
};

/// Throws ValidationError on an empty grid or out-of-range values.
std::vector<SweepRow> run_sweep(const BenchConfig& config, SweepParameter parameter,
                                const std::vector<double>& grid, const SweepInputs& inputs);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace dst::bench
