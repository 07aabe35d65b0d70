// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dst/bench.hpp"
#include "dst/error.hpp"
#include "test_util.hpp"

using namespace dst;
using namespace dst::bench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(DST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

BenchConfig small_config(std::size_t problems) {
  BenchConfig c = parse_config("{}");
  c.problems.count = problems;
  c.report.timing = false;
  return c;
}

std::vector<std::map<std::string, std::string>> read_csv(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::stringstream l(line);
    std::string cell;
    std::map<std::string, std::string> row;
    for (const auto& name : header) {
      std::getline(l, cell, ',');
      row[name] = cell;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"seed": 4, "search": {"beam_width": 2, "tau": 0.8, "modes": ["adaptive"]},
                                  "generator": {"synthetic": {"separability": 0.9}},
                                  "collect": {"gamma": 0.95}, "train": {"n_rounds": 10}})");
  CHECK(c.seed == 4);
  CHECK(c.search.beam_width == 2);
  CHECK(c.search.tau == 0.8);
  CHECK(c.search.gamma == 0.95);
  CHECK(c.modes == std::vector<SearchMode>{SearchMode::adaptive});
  CHECK(c.generator.synthetic.separability == 0.9);
  CHECK(c.train.params.n_rounds == 10);
  CHECK_THROWS_AS(parse_config("{", "bad.json"), DeserializationError);
  CHECK_THROWS_AS(parse_config(R"({"search": {"beam_width": "x"}})"), DeserializationError);
  CHECK_THROWS_AS(parse_config(R"({"search": {"beam_width": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train": {"holdout_fraction": 1.0}})"), ConfigError);
  BenchConfig bad;
  bad.generator.kind = "oracle";
  CHECK_THROWS_AS(make_generator(bad.generator), ConfigError);
}

TEST_CASE("problem ingestion") {
  std::stringstream good(R"({"id": "a", "question": "q1", "answer": "work\n#### 42"}
{"id": 7, "question": "q2", "answer": "#### 1,000"}
)");
  const auto ps = read_problem_jsonl(good, "g.jsonl", "#### {answer}");
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].gold_answer == "42");
  CHECK(ps[1].id == "7");
  std::stringstream bad(R"({"id": "a", "question": "q1", "answer": "#### 1"}
{"id": "b", "question": "q2"}
)");
  try {
    read_problem_jsonl(bad, "b.jsonl", "#### {answer}");
    FAIL("expected DeserializationError");
  } catch (const DeserializationError& e) {
    CHECK(std::string(e.what()).find("b.jsonl:2") != std::string::npos);
  }
  auto c = small_config(5);
  const auto syn = load_problems(c);
  CHECK(syn.size() == 5);
  CHECK(syn[0].id == "syn-s0-0");
}

TEST_CASE("collect counts and determinism") {
  auto c = small_config(1);
  c.collect.fanout = 2;
  c.collect.max_depth = 1;
  SyntheticGenerator gen(c.generator.synthetic);
  const auto dir = test::scratch_dir("collect_small");
  const auto s = run_collect(c, gen, load_problems(c), dir.string());
  CHECK(s.examples == 2);
  CHECK(fs::exists(dir / "trees" / "syn-s0-0.json"));
  CHECK(fs::exists(dir / "summary.json"));

  auto big = small_config(200);
  big.collect.max_depth = 4;
  big.report.jobs = 2;
  const auto d1 = test::scratch_dir("collect_a");
  const auto d2 = test::scratch_dir("collect_b");
  const auto s1 = run_collect(big, gen, load_problems(big), d1.string());
  big.report.jobs = 1;
  run_collect(big, gen, load_problems(big), d2.string());
  CHECK(s1.examples >= 200 * 3);
  CHECK(s1.failed == 0);
  CHECK(slurp(d1 / "dataset.jsonl") == slurp(d2 / "dataset.jsonl"));
}

TEST_CASE("train") {
  auto c = small_config(12);
  SyntheticGenerator gen(c.generator.synthetic);
  const auto dir = test::scratch_dir("train");
  run_collect(c, gen, load_problems(c), dir.string());
  const auto data = load_dataset((dir / "dataset.jsonl").string());
  const auto out = train_model(c, data);
  CHECK(out.model.trees().size() == 500);
  CHECK(out.n_train + out.n_holdout == data.size());
  CHECK(out.n_holdout > 0);
  for (std::size_t r = 1; r < out.report.train_mse.size(); ++r)
    CHECK(out.report.train_mse[r] <= out.report.train_mse[r - 1]);

  auto tenth = c;
  tenth.train.subsample = 0.1;
  tenth.train.params.n_rounds = 50;
  const auto small = train_model(tenth, data);
  CHECK(small.n_train < out.n_train / 5);
  CHECK(small.n_train > 0);
  std::stringstream report;
  write_train_report(report, small);
  CHECK(report.str().find("holdout_auc") != std::string::npos);

  CHECK_THROWS_AS(train_model(c, {}), ValidationError);
}

TEST_CASE("solve reports") {
  auto c = small_config(30);
  SyntheticGenerator gen(c.generator.synthetic);
  const auto pred = load_predictor("probe:0", gen.meta().embedding_dim);
  const auto ps = load_problems(c);
  std::vector<SolveRun> runs;
  for (auto m : c.modes) runs.push_back(run_solve(c, m, gen, *pred, ps));
  std::stringstream csv;
  write_solve_csv(csv, runs);
  const auto rows = read_csv(csv.str());
  std::map<std::string, std::map<std::string, std::string>> agg;
  std::map<std::string, std::map<std::string, double>> sums;
  for (const auto& r : rows) {
    if (r.at("problem_id") == "ALL") {
      agg[r.at("method")] = r;
      continue;
    }
    for (const auto& col : {"correct", "generated_tokens", "generator_calls", "shortcut_rate"})
      sums[r.at("method")][col] += std::stod(r.at(col));
  }
  CHECK(agg.size() == 3);
  for (const auto& [method, row] : agg) {
    CHECK(std::stod(row.at("generated_tokens")) == sums[method]["generated_tokens"]);
    CHECK(std::stod(row.at("generator_calls")) == sums[method]["generator_calls"]);
    CHECK(std::stod(row.at("correct")) == doctest::Approx(sums[method]["correct"] / 30));
    CHECK(std::stod(row.at("shortcut_rate")) == doctest::Approx(sums[method]["shortcut_rate"] / 30));
  }
  CHECK(std::stod(agg["adaptive"].at("generated_tokens")) <= std::stod(agg["full_beam"].at("generated_tokens")));

  auto zero = c;
  zero.search.tau = 0.0;
  const auto a0 = run_solve(zero, SearchMode::adaptive, gen, *pred, ps);
  const auto g = run_solve(c, SearchMode::greedy, gen, *pred, ps);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(a0.rows[i].correct == g.rows[i].correct);
    CHECK(a0.rows[i].generated_tokens == g.rows[i].generated_tokens);
  }

  const FeatureProbePredictor wrong(3, 0);
  CHECK_THROWS_AS(run_solve(c, SearchMode::adaptive, gen, wrong, ps), ConfigError);
}

TEST_CASE("sweeps") {
  auto c = small_config(40);
  SyntheticGenerator gen(c.generator.synthetic);
  const auto pred = load_predictor("probe:0", gen.meta().embedding_dim);
  SweepInputs in;
  in.generator = &gen;
  in.predictor = pred.get();
  in.problems = load_problems(c);

  const auto tau = run_sweep(c, SweepParameter::tau, {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}, in);
  REQUIRE(tau.size() == 6);
  for (std::size_t i = 1; i < tau.size(); ++i) CHECK(tau[i].shortcut_rate <= tau[i - 1].shortcut_rate);

  auto beam_cfg = c;
  beam_cfg.modes = {SearchMode::full_beam};
  const auto beam = run_sweep(beam_cfg, SweepParameter::beam, {1, 3, 5}, in);
  REQUIRE(beam.size() == 3);
  CHECK(beam[0].generated_tokens < beam[1].generated_tokens);
  CHECK(beam[1].generated_tokens < beam[2].generated_tokens);

  CHECK_THROWS_AS(run_sweep(c, SweepParameter::tau, {}, in), ValidationError);
  CHECK_THROWS_AS(run_sweep(c, SweepParameter::tau, {-0.1}, in), ValidationError);
  CHECK_THROWS_AS(run_sweep(c, SweepParameter::beam, {0}, in), ValidationError);
  CHECK_THROWS_AS(parse_sweep_parameter("temperature"), ConfigError);

  const auto dir = test::scratch_dir("sweep_gamma");
  auto small = small_config(6);
  small.train.params.n_rounds = 20;
  run_collect(small, gen, load_problems(small), dir.string());
  const auto before = slurp(dir / "trees" / "syn-s0-0.json");
  const auto g1 = relabel_trees((dir / "trees").string(), 1.0, small.verifier, true);
  const auto g5 = relabel_trees((dir / "trees").string(), 0.5, small.verifier, true);
  REQUIRE(g1.size() == g5.size());
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g5[i].label <= g1[i].label);
  in.problems = load_problems(small);
  in.trees_dir = (dir / "trees").string();
  const auto gamma = run_sweep(small, SweepParameter::gamma, {0.9, 0.99}, in);
  CHECK(gamma.size() == 2);
  CHECK(slurp(dir / "trees" / "syn-s0-0.json") == before);
  CHECK_THROWS_AS(run_sweep(small, SweepParameter::gamma, {1.5}, in), ValidationError);
}

TEST_CASE("CLI end to end") {
  const auto dir = test::scratch_dir("cli");
  const std::string out = " --out " + dir.string();
  REQUIRE(cli("--problems 10 --k 2 --depth 3 --seed 3" + out + " collect") == 0);
  const auto first = slurp(dir / "dataset.jsonl");
  REQUIRE(cli("--problems 10 --k 2 --depth 3 --seed 3" + out + " collect") == 0);
  CHECK(slurp(dir / "dataset.jsonl") == first);
  CHECK(cli(out + " --problems 10 train") == 0);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "train_report.json"));
  CHECK(cli(out + " --problems 10 --depth 3 --no-timing solve --trace " + (dir / "t.jsonl").string()) == 0);
  const auto report = slurp(dir / "solve.csv");
  CHECK(cli(out + " --problems 10 --depth 3 --no-timing solve") == 0);
  CHECK(slurp(dir / "solve.csv") == report);
  CHECK(fs::file_size(dir / "t.jsonl") > 0);
  CHECK(cli(out + " --problems 10 --depth 3 sweep --param tau --grid 0.5,0.7,0.9") == 0);
  CHECK(fs::exists(dir / "sweep_tau.csv"));
  CHECK(cli(out + " --problems 10 sweep --param gamma --grid 0.9,1.0") == 0);

  // Exit codes: usage 1, data 2, generator 3.
  CHECK(cli("") != 0);
  CHECK(cli(out + " --beam 0 solve --model probe:0") == 1);
  CHECK(cli(out + " --problems 5 sweep --param tau --grid 0.5,x --model probe:0") == 1);
  std::ofstream(dir / "empty.jsonl").close();
  CHECK(cli(out + " train --dataset " + (dir / "empty.jsonl").string()) == 2);
  std::ofstream(dir / "bad.json") << "{\"search\": ";
  CHECK(cli("--config " + (dir / "bad.json").string() + out + " solve --model probe:0") == 2);
  CHECK(cli(out + " --problems 5 sweep --param tau --grid 2,-1 --model probe:0") == 2);
  const std::string script = std::string(DST_TEST_DATA_DIR) + "/apples_walkthrough.jsonl";
  const std::string problem = std::string(DST_TEST_DATA_DIR) + "/apples_problem.jsonl";
  CHECK(cli("--script " + script + " --problem-file " + problem +
            " --answer-template '#### {answer}' --depth 3 --mode full_beam" + out + " solve --model probe:0") == 3);
  CHECK(cli("--script " + script + " --problem-file " + problem +
            " --answer-template '#### {answer}' --depth 3 --mode adaptive" + out + " solve --model probe:0") == 0);
  CHECK(cli("--endpoint http://127.0.0.1:1" + out + " solve --model probe:0") == 3);
}
