// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/synthetic.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>
#include <sstream>

#include "dst/error.hpp"
#include "dst/hashing.hpp"

namespace dst {

namespace {

const char* op_word(SyntheticOp::Kind kind) {
  return kind == SyntheticOp::Kind::add ? "add" : "multiply by";
}

const char* op_symbol(SyntheticOp::Kind kind) {
  return kind == SyntheticOp::Kind::add ? "+" : "*";
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void SyntheticWorldConfig::validate() const {
  if (chain_length < 1) throw ConfigError("synthetic chain length must be >= 1");
  if (embedding_dim < 4) throw ConfigError("synthetic embedding dimension must be >= 4");
  if (!(correct_step_prob >= 0.0 && correct_step_prob <= 1.0))
    throw ConfigError("correct_step_prob must lie in [0, 1]");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ConfigError("momentum must lie in [0, 1]");
  if (!(separability >= 0.0 && separability <= 1.0))
    throw ConfigError("separability must lie in [0, 1]");
  if (value_min > value_max) throw ConfigError("value_min exceeds value_max");
  if (multiplier_max < 2) throw ConfigError("multiplier_max must be >= 2");
}

std::int64_t SyntheticOp::apply(std::int64_t value) const {
  return kind == Kind::add ? value + operand : value * operand;
}

std::vector<std::int64_t> SyntheticProblemSpec::trajectory() const {
  std::vector<std::int64_t> values{start};
  for (const auto& op : ops) values.push_back(op.apply(values.back()));
  return values;
}

Problem make_synthetic_problem(std::string id, std::int64_t start, std::vector<SyntheticOp> ops) {
  std::ostringstream text;
  text << "Start with " << start << ".";
  SyntheticProblemSpec spec{start, ops};
  for (std::size_t i = 0; i < ops.size(); ++i) {
    text << " Step " << (i + 1) << ": " << op_word(ops[i].kind) << " " << ops[i].operand << ".";
  }
  text << " What is the final value?";
  return Problem{std::move(id), text.str(), std::to_string(spec.trajectory().back())};
}

Problem make_synthetic_problem(const SyntheticWorldConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(hash_combine(seed, 0x5eedULL));
  const std::int64_t start = rng.uniform_int(config.value_min, config.value_max);
  std::vector<SyntheticOp> ops;
  for (std::size_t i = 0; i < config.chain_length; ++i) {
    SyntheticOp op;
    if (rng.uniform() < 0.5) {
      op.kind = SyntheticOp::Kind::add;
      op.operand = rng.uniform_int(config.value_min, config.value_max);
    } else {
      op.kind = SyntheticOp::Kind::multiply;
      op.operand = rng.uniform_int(2, config.multiplier_max);
    }
    ops.push_back(op);
  }
  return make_synthetic_problem("syn-" + std::to_string(seed), start, std::move(ops));
}

SyntheticProblemSpec parse_synthetic_problem(std::string_view text) {
  static const std::regex start_re(R"(^Start with (-?\d+)\.)");
  static const std::regex step_re(R"(Step (\d+): (add|multiply by) (-?\d+)\.)");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, start_re)) {
    throw ValidationError("not a synthetic problem: missing start value");
  }
  SyntheticProblemSpec spec;
  spec.start = parse_int(m[1].str());
  for (auto it = std::sregex_iterator(s.begin(), s.end(), step_re); it != std::sregex_iterator();
       ++it) {
    const auto& sm = *it;
    if (parse_int(sm[1].str()) != static_cast<std::int64_t>(spec.ops.size() + 1)) {
      throw ValidationError("synthetic problem steps out of order");
    }
    SyntheticOp op;
    op.kind = sm[2].str() == "add" ? SyntheticOp::Kind::add : SyntheticOp::Kind::multiply;
    op.operand = parse_int(sm[3].str());
    spec.ops.push_back(op);
  }
  if (spec.ops.empty()) throw ValidationError("not a synthetic problem: no steps");
  return spec;
}

std::int64_t synthetic_running_value(const SyntheticProblemSpec& spec,
                                     const ReasoningState& state) {
  if (state.thoughts.empty()) return spec.start;
  const std::string& text = state.thoughts.back().text;
  const auto eq = text.rfind("= ");
  if (eq == std::string::npos) throw ValidationError("synthetic thought without result: " + text);
  auto begin = eq + 2;
  auto end = begin;
  while (end < text.size() && (text[end] == '-' || std::isdigit(static_cast<unsigned char>(text[end]))))
    ++end;
  return parse_int(std::string_view(text).substr(begin, end - begin));
}

bool synthetic_on_track(const Problem& problem, const ReasoningState& state) {
  const auto spec = parse_synthetic_problem(problem.text);
  return synthetic_running_value(spec, state) == spec.trajectory().at(state.depth);
}

SyntheticGenerator::SyntheticGenerator(SyntheticWorldConfig config) : config_(config) {
  config_.validate();
  meta_ = GeneratorMeta{"synthetic", config_.embedding_dim, true, false};
  u_correct_.assign(config_.embedding_dim, 0.0);
  u_wrong_.assign(config_.embedding_dim, 0.0);
  u_correct_[0] = 1.0;
  u_wrong_[1] = 1.0;
}

std::vector<double> SyntheticGenerator::embed_root(const Problem&) { return u_correct_; }

std::vector<Candidate> SyntheticGenerator::generate(const Problem& problem,
                                                    const ReasoningState& state,
                                                    const GenerateRequest& request) {
  if (request.n < 1) throw GenerationError(state.problem_id, state.depth, "n must be >= 1");
  if (state.depth >= config_.chain_length) {
    throw GenerationError(state.problem_id, state.depth, "state is already at chain length");
  }
  const double q = config_.correct_step_prob;
  const bool momentum = state.depth > 0 && synthetic_on_track(problem, state);
  const double p_correct = momentum ? q + config_.momentum * (1.0 - q) : q;

  std::vector<Candidate> out;
  out.reserve(request.n);
  for (std::size_t j = 0; j < request.n; ++j) {
    Rng rng(hash_combine(request.seed_context, j));
    const bool correct = rng.uniform() < p_correct;
    out.push_back(step(problem, state, correct, rng.next()));
  }
  return out;
}

Candidate SyntheticGenerator::step(const Problem& problem, const ReasoningState& state,
                                   bool correct, std::uint64_t noise_seed) const {
  const auto spec = parse_synthetic_problem(problem.text);
  if (state.depth >= spec.ops.size()) {
    throw GenerationError(state.problem_id, state.depth, "no operation left to apply");
  }
  const auto truth = spec.trajectory();
  const SyntheticOp& op = spec.ops[state.depth];
  const std::int64_t current = synthetic_running_value(spec, state);
  const std::int64_t right = op.apply(current);

  Rng rng(noise_seed);
  std::int64_t value = right;
  if (!correct) {
    static constexpr std::int64_t kOffsets[] = {-2, -1, 1, 2};
    do {
      value = right + kOffsets[rng.uniform_int(0, 3)];
    } while (value == truth[state.depth + 1]);
  }

  const bool terminal = state.depth + 1 == spec.ops.size();
  std::ostringstream text;
  text << "Step " << (state.depth + 1) << ": " << current << " " << op_symbol(op.kind) << " "
       << op.operand << " = " << value;
  if (terminal) text << " . The answer is " << value;

  const double alpha = config_.separability;
  const auto& anchor = correct ? u_correct_ : u_wrong_;
  std::vector<double> embedding(config_.embedding_dim);
  double norm2 = 0.0;
  do {
    const auto eta = rng.unit_vector(config_.embedding_dim);
    norm2 = 0.0;
    for (std::size_t i = 0; i < embedding.size(); ++i) {
      embedding[i] = alpha * anchor[i] + (1.0 - alpha) * eta[i];
      norm2 += embedding[i] * embedding[i];
    }
  } while (norm2 == 0.0);
  if (alpha != 1.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : embedding) x *= inv;
  }

  Candidate c;
  c.thought.text = text.str();
  c.thought.tokens_generated = count_whitespace_tokens(c.thought.text);
  c.thought.terminal = terminal;
  c.embedding = std::move(embedding);
  if (terminal) c.answer = std::to_string(value);
  return c;
}

}  // namespace dst
