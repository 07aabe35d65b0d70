// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Prints one [PASS] or [FAIL] line per
// criterion and exits nonzero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dst/collect.hpp"
#include "dst/gbdt.hpp"
#include "dst/hashing.hpp"
#include "dst/metrics.hpp"
#include "dst/scripted.hpp"
#include "dst/search.hpp"
#include "dst/synthetic.hpp"
#include "dst/verify.hpp"
#include "gbdt_data.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dst;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, int id, const std::string& name, const std::string& detail) {
  if (ok) {
    std::cout << "[PASS] " << id << ". " << name << ": " << detail << std::endl;
  } else {
    ++failures;
    std::cerr << "[FAIL] " << id << ". " << name << ": " << detail << std::endl;
  }
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::vector<Problem> synthetic_problems(const SyntheticWorldConfig& w, std::size_t n,
                                        std::uint64_t base, const std::string& prefix) {
  std::vector<Problem> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = make_synthetic_problem(w, base + i);
    p.id = prefix + std::to_string(i);
    out.push_back(std::move(p));
  }
  return out;
}

VerifierChoice exact_verifier() {
  VerifierChoice v;
  v.kind = VerifierKind::exact;
  return v;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

/// Everything a search run exposes, serialized for byte comparison.
std::string fingerprint(const SearchResult& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& t : r.final_path) out << t.text << '\x1f' << t.tokens_generated << '\x1e';
  out << '|';
  for (auto s : r.final_node_path) out << s << ',';
  out << '|' << r.answer.value_or("<none>") << '|' << r.generator_calls << '|' << r.generated_tokens
      << '|' << r.prompt_tokens << '|' << r.explored_nodes << '|';
  for (const auto& p : r.explored_paths) {
    for (auto s : p) out << s << '.';
    out << ';';
  }
  return out.str();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}

void propagation_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20260101);
  std::size_t nodes = 0, mismatches = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto t = oracle::random_tree(rng, 1 + rng() % 6, 1 + rng() % 4);
    propagate_scores(t, test::toy_problem(), 0.99, exact_verifier());
    nodes += t.size();
    for (NodeId id = 0; id < t.size(); ++id) {
      const double err = std::abs(*t.label(id) - oracle::oracle_label(t, id, 0.99));
      worst = std::max(worst, err);
      if (err > 1e-12) ++mismatches;
    }
  }
  const double secs = seconds_since(start);
  report(mismatches == 0 && secs < 10.0, 1, "score propagation vs recursive oracle",
         "1000 trees, " + std::to_string(nodes) + " nodes, max |err| " + fmt(worst) + ", " +
             fmt(secs, 3) + " s");
}

void degeneration(const Predictor& model, const SyntheticWorldConfig& w) {
  SyntheticGenerator gen(w);
  SearchConfig c;
  c.seed = 4242;
  c.max_depth = w.chain_length;
  std::size_t greedy_mismatch = 0, reference_mismatch = 0;
  for (const auto& p : synthetic_problems(w, 100, 70000, "deg-")) {
    SearchConfig c0 = c;
    c0.tau = 0.0;
    if (fingerprint(adaptive_search(p, gen, model, c0)) != fingerprint(greedy_search(p, gen, model, c)))
      ++greedy_mismatch;

    SearchConfig c1 = c;
    c1.tau = 1.01;
    const auto a = adaptive_search(p, gen, model, c1);
    const auto r = beam_search_reference(p, gen, model, c);
    const std::set<NodePath> na(a.explored_paths.begin(), a.explored_paths.end());
    const std::set<NodePath> nr(r.explored_paths.begin(), r.explored_paths.end());
    if (na != nr || a.final_node_path != r.final_node_path || a.answer != r.answer) ++reference_mismatch;
  }
  report(greedy_mismatch == 0 && reference_mismatch == 0, 2, "tau degeneracies",
         "100 problems, tau=0 vs greedy mismatches " + std::to_string(greedy_mismatch) +
             ", tau=1.01 vs full beam mismatches " + std::to_string(reference_mismatch));
}

/// Returns 1 with probability p, decided by a hash of the feature bits.
double hashed_bernoulli(std::span<const double> f, double p) {
  std::string bytes(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(double));
  const double u = static_cast<double>(stable_hash(bytes) >> 11) * 0x1.0p-53;
  return u < p ? 1.0 : 0.0;
}

void effective_beam() {
  SyntheticWorldConfig w;
  w.separability = 0.0;
  SyntheticGenerator gen(w);
  SearchConfig c;
  c.beam_width = 3;
  c.fanout = 3;
  bool ok = true;
  std::string detail;
  for (double prob : {0.2, 0.5, 0.8}) {
    const test::FnPredictor pred(w.embedding_dim + 1,
                                 [prob](std::span<const double> f) { return hashed_bernoulli(f, prob); });
    std::vector<SearchResult> results;
    std::size_t expansions = 0;
    for (const auto& p : synthetic_problems(w, 1500, 90000, "eb-")) {
      results.push_back(adaptive_search(p, gen, pred, c));
      expansions += results.back().expansions();
    }
    const double measured = measure_effective_beam(results);
    const double expected = expected_beam_width(prob, c.beam_width);
    const double rel = std::abs(measured - expected) / expected;
    ok = ok && expansions >= 10000 && rel <= 0.05;
    detail += "P=" + fmt(prob, 2) + " measured " + fmt(measured) + " expected " + fmt(expected) +
              " (" + std::to_string(expansions) + " expansions); ";
  }
  detail.resize(detail.size() - 2);
  report(ok, 3, "effective beam width", detail);
}

void walkthrough() {
  const auto records = load_script(std::string(DST_TEST_DATA_DIR) + "/apples_walkthrough.jsonl");
  ScriptedGenerator gen(records);
  const FeatureProbePredictor pred(gen.meta().embedding_dim + 1, 0);
  const Problem p{"apples",
                  "Janet has 5 apples. She buys 2 more boxes of apples, with 6 apples in each box. "
                  "How many apples does she have in total?",
                  "17"};
  SearchConfig c;
  c.max_depth = 3;
  const auto r = adaptive_search(p, gen, pred, c);
  bool ok = r.trace.size() >= 2;
  std::string detail;
  if (ok) {
    const auto& first = r.trace[0];
    const auto& second = r.trace[1];
    ok = first.action == ExpansionAction::shortcut && first.scores.size() == 1 &&
         second.action == ExpansionAction::fallback && second.scores.size() == c.fanout &&
         r.answer == std::optional<std::string>("17");
    detail = "root s=" + fmt(first.scores.front(), 2) + " -> " + std::to_string(first.scores.size()) +
             " call; child s=" + fmt(second.scores.front(), 2) + " -> " +
             std::to_string(second.scores.size()) + " calls; answer " + r.answer.value_or("<none>");
  } else {
    detail = "trace has " + std::to_string(r.trace.size()) + " events";
  }
  report(ok, 4, "predict-first walkthrough", detail);
}

void gbdt_checks(const std::vector<TrainingExample>& data, const GbdtModel& model,
                 const TrainReport& train_report) {
  bool mse_ok = train_report.train_mse.size() == TrainParams{}.n_rounds + 1;
  for (std::size_t r = 1; r < train_report.train_mse.size(); ++r)
    mse_ok = mse_ok && train_report.train_mse[r] <= train_report.train_mse[r - 1];

  auto make = [](std::vector<double> x, double y) {
    TrainingExample e;
    const double c = x.back();
    x.pop_back();
    e.features = FeatureVector{std::move(x), c};
    e.label = y;
    return e;
  };
  const std::vector<TrainingExample> two{make({0.0, 1.0}, 0.0), make({1.0, 1.0}, 1.0)};
  TrainParams p;
  p.learning_rate = 1.0;
  p.n_rounds = 1;
  p.min_samples_leaf = 1;
  const auto m2 = GbdtModel::train(two, p);
  const double y0 = m2.predict(std::vector<double>{0.0, 1.0});
  const double y1 = m2.predict(std::vector<double>{1.0, 1.0});
  const bool two_ok = y0 == 0.0 && y1 == 1.0;

  const auto dir = test::scratch_dir("acceptance_gbdt");
  const auto path = (dir / "model.json").string();
  model.save(path);
  const auto back = GbdtModel::load(path, model.n_features());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::size_t diffs = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(model.n_features());
    for (auto& v : x) v = u(rng);
    if (!bit_equal(model.predict_raw(x), back.predict_raw(x)) || !bit_equal(model.predict(x), back.predict(x)))
      ++diffs;
  }

  SyntheticWorldConfig world;
  world.separability = 0.9;
  const auto split = test::synthetic_split(world, 14, 4, 3, 77);
  const auto auc_model = GbdtModel::train(split.train, {});
  std::vector<double> scores;
  for (const auto& e : split.holdout) scores.push_back(auc_model.predict(e.features));
  const double auc = roc_auc(scores, split.holdout_on_track);
  const std::size_t examples = split.train.size() + split.holdout.size();

  report(mse_ok && two_ok && diffs == 0 && auc >= 0.95 && examples >= 5000, 5, "GBDT predictor",
         "MSE " + fmt(train_report.train_mse.front()) + " -> " + fmt(train_report.train_mse.back()) +
             (mse_ok ? " non-increasing" : " INCREASED") + " over " + std::to_string(data.size()) +
             " examples; two-point {" + fmt(y0) + ", " + fmt(y1) + "}; reload diffs " +
             std::to_string(diffs) + "/1000; alpha=0.9 holdout AUC " + fmt(auc) + " (" +
             std::to_string(examples) + " examples)");
}

struct BenchmarkOutcome {
  std::vector<ExpansionEvent> full_beam_trace;
};

BenchmarkOutcome benchmark(const GbdtModel& model, const SyntheticWorldConfig& w, double train_secs) {
  const auto start = Clock::now();
  SyntheticGenerator gen(w);
  SearchConfig c;
  c.beam_width = 3;
  c.fanout = 3;
  c.tau = 0.7;
  c.gamma = 0.99;
  c.max_depth = w.chain_length;
  c.seed = 606;

  struct Tally {
    std::size_t correct = 0, tokens = 0, calls = 0;
  };
  Tally greedy, dst, full;
  BenchmarkOutcome out;
  const auto problems = synthetic_problems(w, 200, 500000, "eval-");
  auto tally = [](Tally& t, const Problem& p, const SearchResult& r) {
    t.correct += r.answer && verify_exact(*r.answer, p.gold_answer);
    t.tokens += r.generated_tokens;
    t.calls += r.generator_calls;
  };
  for (const auto& p : problems) {
    tally(greedy, p, greedy_search(p, gen, model, c));
    tally(dst, p, adaptive_search(p, gen, model, c));
    const auto r = beam_search_reference(p, gen, model, c);
    tally(full, p, r);
    out.full_beam_trace.insert(out.full_beam_trace.end(), r.trace.begin(), r.trace.end());
  }
  const double secs = train_secs + seconds_since(start);
  const double n = static_cast<double>(problems.size());
  const double ratio = static_cast<double>(dst.tokens) / static_cast<double>(full.tokens);
  const bool ok = dst.correct >= greedy.correct && ratio <= 0.60 && secs < 120.0;
  report(ok, 6, "synthetic benchmark (m=5, q=0.7, alpha=0.8, b=k=3, tau=0.7)",
         "accuracy greedy " + fmt(greedy.correct / n) + ", adaptive " + fmt(dst.correct / n) +
             ", full beam " + fmt(full.correct / n) + "; tokens greedy " + std::to_string(greedy.tokens) +
             ", adaptive " + std::to_string(dst.tokens) + ", full beam " + std::to_string(full.tokens) +
             " (adaptive/full " + fmt(100 * ratio, 3) + "%); " + fmt(secs, 3) +
             " s including collect and train");
  return out;
}

void tau_monotone(const std::vector<ExpansionEvent>& trace) {
  std::stringstream buf;
  write_trace(buf, trace);
  const auto replayed = read_trace(buf, "<benchmark trace>");
  bool ok = replayed.size() == trace.size() && !trace.empty();
  double prev = 1.0;
  std::string detail;
  for (double tau : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
    const double rate = replay_shortcut_rate(replayed, tau);
    ok = ok && rate <= prev;
    prev = rate;
    detail += fmt(tau, 2) + ":" + fmt(rate) + " ";
  }
  detail += "over " + std::to_string(replayed.size()) + " expansions";
  report(ok, 7, "shortcut rate non-increasing in tau", detail);
}

void numeric_verifier() {
  std::mt19937_64 rng(31337);
  const double rel_tol = 1e-6;
  const mpq_class tol(rel_tol);
  int disagreements = 0, accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto e = oracle::random_expr(rng, 1 + static_cast<int>(rng() % 4));
    const std::string text = oracle::render(*e, rng);
    const auto exact = oracle::oracle_eval(*e);
    std::string gold;
    mpq_class g;
    if (exact && rng() % 2 == 0 && !oracle::decimal_string(*exact).empty()) {
      gold = oracle::decimal_string(*exact);
      g = *exact;
    } else {
      const long base = exact ? mpz_class(exact->get_num() / exact->get_den()).get_si() : 3;
      g = base + static_cast<long>(rng() % 3) - 1;
      gold = g.get_str();
    }
    bool expect = false;
    if (exact) {
      const mpq_class diff = abs(mpq_class(*exact - g));
      const mpq_class scale = abs(g) > 1 ? mpq_class(abs(g)) : mpq_class(1);
      expect = diff <= tol * scale;
    }
    const bool got = verify_numeric(text, gold, rel_tol);
    disagreements += got != expect;
    accepted += got;
  }
  const bool fixtures = extract_answer("#### 42", "#### {answer}") == std::optional<std::string>("42") &&
                        verify_exact("#### 42", "42", "#### {answer}") &&
                        check_numeric("#### 42", "42", rel_tol, "#### {answer}").accepted &&
                        check_numeric("so 6 * 7\n#### 42.0", "42", rel_tol, "#### {answer}").accepted &&
                        !check_numeric("#### 43", "42", rel_tol, "#### {answer}").accepted &&
                        verify_numeric("6 * 7", "42");
  report(disagreements == 0 && fixtures, 8, "numeric verifier vs exact rational oracle",
         "10000 expressions, " + std::to_string(disagreements) + " disagreements, " +
             std::to_string(accepted) + " accepted; '#### 42' fixtures " + (fixtures ? "ok" : "broken"));
}

}  // namespace

int main() {
  try {
    propagation_oracle();

    // Train the benchmark predictor on problems disjoint from every evaluation set.
    SyntheticWorldConfig world;
    world.chain_length = 5;
    world.correct_step_prob = 0.7;
    world.separability = 0.8;
    const auto train_start = Clock::now();
    SyntheticGenerator gen(world);
    std::vector<TrainingExample> data;
    for (const auto& p : synthetic_problems(world, 30, 10000, "train-")) {
      auto tree = build_tree(p, gen, {3, world.chain_length, 11, 0.7, std::nullopt});
      propagate_scores(tree, p, 0.99, exact_verifier());
      const auto ex = emit_dataset(tree);
      data.insert(data.end(), ex.begin(), ex.end());
    }
    TrainReport train_report;
    const auto model = GbdtModel::train(data, {}, &train_report);
    const double train_secs = seconds_since(train_start);

    degeneration(model, world);
    effective_beam();
    walkthrough();
    gbdt_checks(data, model, train_report);
    const auto bench = benchmark(model, world, train_secs);
    tau_monotone(bench.full_beam_trace);
    numeric_verifier();
  } catch (const std::exception& e) {
    std::cerr << "[FAIL] acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
