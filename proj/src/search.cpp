// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/search.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "dst/collect.hpp"
#include "dst/error.hpp"
#include "dst/features.hpp"

namespace dst {

namespace {

enum class Policy { greedy, adaptive, reference };

class Engine {
 public:
  Engine(const Problem& problem, Generator& generator, const Predictor& predictor,
         const SearchConfig& config)
      : problem_(problem),
        generator_(generator),
        predictor_(predictor),
        config_(config),
        dim_(generator.meta().embedding_dim),
        tree_(make_root(problem, generator.embed_root(problem))) {
    config_.validate();
    if (predictor_.n_features() != dim_ + 1) {
      throw ConfigError("predictor expects " + std::to_string(predictor_.n_features()) +
                        " features but the generator produces d+1 = " + std::to_string(dim_ + 1));
    }
    if (tree_.node(tree_.root()).features.dim() != dim_) {
      throw ConfigError("root embedding dimension does not match the generator");
    }
    base_prompt_tokens_ = count_whitespace_tokens(problem.text);
  }

  SearchResult run(Policy policy) {
    const std::size_t beam_width = policy == Policy::greedy ? 1 : config_.beam_width;
    std::vector<NodeId> beam{tree_.root()};

    for (std::size_t depth = 1; depth <= config_.max_depth; ++depth) {
      std::vector<NodeId> pool;
      std::size_t admitted_here = 0;
      for (NodeId node : beam) {
        if (tree_.node(node).terminal()) {
          pool.push_back(node);
          continue;
        }
        admitted_here += expand(node, policy, pool);
      }
      result_.per_depth_effective_beam.push_back(admitted_here);

      std::stable_sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) {
        const double sa = *tree_.node(a).predictor_score;
        const double sb = *tree_.node(b).predictor_score;
        if (sa != sb) return sa > sb;
        return a < b;
      });
      if (pool.size() > beam_width) pool.resize(beam_width);
      beam = std::move(pool);

      if (beam.empty()) {
        result_.beam_emptied = true;
        return std::move(result_);
      }
      if (std::all_of(beam.begin(), beam.end(), [&](NodeId id) { return tree_.node(id).terminal(); }))
        break;
    }

    // The beam is sorted, so its head is the argmax with the earliest tie.
    const NodeId best = beam.front();
    const auto& s = tree_.node(best);
    result_.final_path = path_of(tree_, best);
    result_.final_node_path = s.path;
    result_.answer = s.answer;
    result_.final_score = s.predictor_score;
    return std::move(result_);
  }

 private:
  /// Expands one beam node; returns the number of admitted candidates.
  std::size_t expand(NodeId node, Policy policy, std::vector<NodeId>& pool) {
    ExpansionEvent event;
    event.problem_id = problem_.id;
    event.depth = tree_.node(node).depth + 1;
    event.node_path = tree_.node(node).path;

    const auto ancestors = ancestor_embeddings(tree_, node);
    std::vector<NodeId> children;
    auto draw = [&](std::size_t slot) {
      const NodeId child = generate_child(node, slot, ancestors);
      children.push_back(child);
      event.scores.push_back(*tree_.node(child).predictor_score);
    };

    draw(0);
    const bool shortcut =
        policy == Policy::greedy ||
        (policy == Policy::adaptive && event.scores.front() >= config_.tau);
    if (shortcut) {
      event.action = ExpansionAction::shortcut;
      event.admitted.push_back(0);
      pool.push_back(children.front());
      ++result_.shortcut_events;
    } else {
      for (std::size_t slot = 1; slot < config_.fanout; ++slot) draw(slot);
      event.action = ExpansionAction::fallback;
      const bool filter = policy == Policy::adaptive &&
                          config_.fallback_pool_policy == FallbackPoolPolicy::above_threshold_only;
      for (std::size_t slot = 0; slot < children.size(); ++slot) {
        if (filter && event.scores[slot] < config_.tau) continue;
        event.admitted.push_back(slot);
        pool.push_back(children[slot]);
      }
      ++result_.fallback_events;
    }
    const std::size_t admitted = event.admitted.size();
    result_.admitted_candidates += admitted;
    result_.trace.push_back(std::move(event));
    return admitted;
  }

  NodeId generate_child(NodeId parent_id, std::size_t slot,
                        const std::vector<std::vector<double>>& ancestors) {
    const ReasoningState& parent = tree_.node(parent_id);
    std::size_t prompt = base_prompt_tokens_;
    for (const auto& t : parent.thoughts) prompt += count_whitespace_tokens(t.text);

    Candidate c = draw_candidate(generator_, problem_, parent, slot, config_.seed,
                                 config_.temperature);
    ++result_.generator_calls;
    result_.generated_tokens += c.thought.tokens_generated;
    result_.prompt_tokens += prompt;

    const double consistency = consistency_score(c.embedding, ancestors);
    ReasoningState child = extend_state(parent, std::move(c.thought),
                                        assemble_features(std::move(c.embedding), consistency),
                                        dim_, slot, std::move(c.answer));
    const double score = predictor_.score(child.features);
    if (std::isnan(score)) throw ValidationError("predictor returned NaN");
    child.predictor_score = score;
    result_.explored_paths.push_back(child.path);
    ++result_.explored_nodes;
    return tree_.add_child(parent_id, std::move(child));
  }

  const Problem& problem_;
  Generator& generator_;
  const Predictor& predictor_;
  SearchConfig config_;
  std::size_t dim_;
  ThoughtTree tree_;
  std::size_t base_prompt_tokens_ = 0;
  SearchResult result_;
};

}  // namespace

double SearchResult::shortcut_rate() const noexcept {
  const auto n = expansions();
  return n == 0 ? 0.0 : static_cast<double>(shortcut_events) / static_cast<double>(n);
}

double SearchResult::effective_beam_width() const noexcept {
  const auto n = expansions();
  return n == 0 ? 0.0 : static_cast<double>(admitted_candidates) / static_cast<double>(n);
}

SearchResult adaptive_search(const Problem& problem, Generator& generator,
                             const Predictor& predictor, const SearchConfig& config) {
  return Engine(problem, generator, predictor, config).run(Policy::adaptive);
}

SearchResult greedy_search(const Problem& problem, Generator& generator, const Predictor& predictor,
                           const SearchConfig& config) {
  return Engine(problem, generator, predictor, config).run(Policy::greedy);
}

SearchResult beam_search_reference(const Problem& problem, Generator& generator,
                                   const Predictor& predictor, const SearchConfig& config) {
  return Engine(problem, generator, predictor, config).run(Policy::reference);
}

SearchMode parse_search_mode(std::string_view text) {
  if (text == "greedy") return SearchMode::greedy;
  if (text == "adaptive") return SearchMode::adaptive;
  if (text == "full_beam") return SearchMode::full_beam;
  throw ConfigError("unknown search mode '" + std::string(text) + "'");
}

std::string_view to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::greedy: return "greedy";
    case SearchMode::adaptive: return "adaptive";
    case SearchMode::full_beam: return "full_beam";
  }
  return "unknown";
}

SearchResult run_search(SearchMode mode, const Problem& problem, Generator& generator,
                        const Predictor& predictor, const SearchConfig& config) {
  switch (mode) {
    case SearchMode::greedy: return greedy_search(problem, generator, predictor, config);
    case SearchMode::adaptive: return adaptive_search(problem, generator, predictor, config);
    case SearchMode::full_beam: return beam_search_reference(problem, generator, predictor, config);
  }
  throw ConfigError("unknown search mode");
}

double expected_beam_width(double shortcut_prob, std::size_t beam_width) {
  if (!(shortcut_prob >= 0.0 && shortcut_prob <= 1.0))
    throw ValidationError("shortcut probability must lie in [0, 1]");
  if (beam_width < 1) throw ValidationError("beam width must be >= 1");
  return 1.0 * shortcut_prob + static_cast<double>(beam_width) * (1.0 - shortcut_prob);
}

double measure_effective_beam(std::span<const SearchResult> results) {
  if (results.empty()) throw ValidationError("no search results to measure");
  std::size_t admitted = 0, expansions = 0;
  for (const auto& r : results) {
    admitted += r.admitted_candidates;
    expansions += r.expansions();
  }
  if (expansions == 0) throw ValidationError("search results contain no expansions");
  return static_cast<double>(admitted) / static_cast<double>(expansions);
}

double replay_shortcut_rate(std::span<const ExpansionEvent> trace, double tau) {
  if (trace.empty()) throw ValidationError("empty trace");
  std::size_t hits = 0;
  for (const auto& e : trace) {
    if (e.scores.empty()) throw ValidationError("trace event without scores");
    if (e.scores.front() >= tau) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trace.size());
}

void write_trace(std::ostream& out, std::span<const ExpansionEvent> trace) {
  for (const auto& e : trace) {
    nlohmann::json j{{"problem_id", e.problem_id},
                     {"depth", e.depth},
                     {"node_path", e.node_path},
                     {"action", e.action == ExpansionAction::shortcut ? "shortcut" : "fallback"},
                     {"scores", e.scores},
                     {"admitted", e.admitted}};
    out << j.dump() << '\n';
  }
}

std::vector<ExpansionEvent> read_trace(std::istream& in, const std::string& source) {
  std::vector<ExpansionEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ExpansionEvent e;
      e.problem_id = j.value("problem_id", "");
      e.depth = j.at("depth").get<std::size_t>();
      e.node_path = j.at("node_path").get<NodePath>();
      const auto action = j.at("action").get<std::string>();
      if (action != "shortcut" && action != "fallback")
        throw DeserializationError(source + ":" + std::to_string(lineno), "bad action " + action);
      e.action = action == "shortcut" ? ExpansionAction::shortcut : ExpansionAction::fallback;
      e.scores = j.at("scores").get<std::vector<double>>();
      e.admitted = j.at("admitted").get<std::vector<std::size_t>>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DeserializationError(source + ":" + std::to_string(lineno), ex.what());
    }
  }
  return out;
}

}  // namespace dst
