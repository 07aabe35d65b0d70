// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/collect.hpp"

#include <deque>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "dst/error.hpp"
#include "dst/features.hpp"

namespace dst {

using nlohmann::json;

std::vector<std::vector<double>> ancestor_embeddings(const ThoughtTree& tree, NodeId id) {
  std::vector<std::vector<double>> chain;
  std::optional<NodeId> cur = id;
  while (cur) {
    const auto& s = tree.node(*cur);
    chain.push_back(s.features.embedding);
    cur = s.parent;
  }
  return {chain.rbegin(), chain.rend()};
}

ThoughtTree build_tree(const Problem& problem, Generator& generator, const CollectOptions& options) {
  if (options.fanout < 1) throw ConfigError("fanout must be >= 1");
  if (options.max_depth < 1) throw ConfigError("max depth must be >= 1");
  const std::size_t dim = generator.meta().embedding_dim;

  auto root_embedding = generator.embed_root(problem);
  if (root_embedding.size() != dim) {
    throw ConfigError("root embedding dimension " + std::to_string(root_embedding.size()) +
                      " does not match generator dimension " + std::to_string(dim));
  }
  ThoughtTree tree(make_root(problem, std::move(root_embedding)));
  std::map<std::size_t, std::size_t> expanded_per_depth;

  std::deque<NodeId> queue{tree.root()};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    if (tree.node(id).depth >= options.max_depth || tree.node(id).terminal()) continue;
    auto& expanded = expanded_per_depth[tree.node(id).depth];
    if (options.expansion_cap && expanded >= *options.expansion_cap) continue;
    ++expanded;

    const auto ancestors = ancestor_embeddings(tree, id);
    for (std::size_t slot = 0; slot < options.fanout; ++slot) {
      // Re-fetch: add_child may reallocate the node storage.
      const ReasoningState& parent = tree.node(id);
      Candidate c = draw_candidate(generator, problem, parent, slot, options.seed,
                                   options.temperature);
      const double consistency = consistency_score(c.embedding, ancestors);
      ReasoningState child = extend_state(parent, std::move(c.thought),
                                          assemble_features(std::move(c.embedding), consistency),
                                          dim, slot, std::move(c.answer));
      queue.push_back(tree.add_child(id, std::move(child)));
    }
  }
  return tree;
}

void propagate_scores(ThoughtTree& tree, const Problem& problem, double gamma,
                      const VerifierChoice& verifier) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  tree.clear_labels();
  // Children always carry larger ids than their parent, so a reverse sweep
  // visits every child before its parent.
  for (NodeId id = tree.size(); id-- > 0;) {
    const auto kids = tree.children(id);
    if (kids.empty()) {
      tree.set_label(id, label_leaf(tree.node(id), problem, verifier));
      continue;
    }
    double sum = 0.0;
    for (NodeId child : kids) sum += *tree.label(child);
    tree.set_label(id, gamma * (sum / static_cast<double>(kids.size())));
  }
}

std::vector<TrainingExample> emit_dataset(const ThoughtTree& tree, bool include_leaves) {
  std::vector<TrainingExample> out;
  // Breadth-first order by (depth, id).
  std::deque<NodeId> queue{tree.root()};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    for (NodeId child : tree.children(id)) queue.push_back(child);
    if (id == tree.root()) continue;
    if (!include_leaves && tree.is_leaf(id)) continue;
    const auto y = tree.label(id);
    if (!y) throw std::logic_error("emit_dataset: node " + std::to_string(id) + " is unlabeled");
    const auto& s = tree.node(id);
    out.push_back(TrainingExample{s.features, *y, s.problem_id, s.depth, s.path});
  }
  return out;
}

namespace {

json problem_json(const Problem& p) {
  return json{{"id", p.id}, {"text", p.text}, {"gold_answer", p.gold_answer}};
}

}  // namespace

void write_tree(std::ostream& out, const Problem& problem, const ThoughtTree& tree) {
  json nodes = json::array();
  for (NodeId id = 0; id < tree.size(); ++id) {
    const auto& s = tree.node(id);
    json n;
    n["id"] = id;
    n["parent"] = s.parent ? json(*s.parent) : json(nullptr);
    n["path"] = s.path;
    n["thought"] = s.is_root() ? json(nullptr) : json(s.thoughts.back().text);
    n["tokens"] = s.is_root() ? 0 : s.thoughts.back().tokens_generated;
    n["terminal"] = s.terminal();
    n["answer"] = s.answer ? json(*s.answer) : json(nullptr);
    n["embedding"] = s.features.embedding;
    n["consistency"] = s.features.consistency;
    const auto y = tree.label(id);
    n["label"] = y ? json(*y) : json(nullptr);
    nodes.push_back(std::move(n));
  }
  json doc{{"problem", problem_json(problem)},
           {"embedding_dim", tree.node(tree.root()).features.dim()},
           {"nodes", std::move(nodes)}};
  out << doc.dump() << '\n';
}

TreeDump read_tree(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DeserializationError(source, e.what());
  }
  try {
    Problem problem{doc.at("problem").at("id").get<std::string>(),
                    doc.at("problem").at("text").get<std::string>(),
                    doc.at("problem").at("gold_answer").get<std::string>()};
    const auto dim = doc.at("embedding_dim").get<std::size_t>();
    const auto& nodes = doc.at("nodes");
    if (nodes.empty()) throw DeserializationError(source, "tree has no nodes");

    const auto& r = nodes.at(0);
    ThoughtTree tree(make_root(problem, r.at("embedding").get<std::vector<double>>()));
    if (!r.at("label").is_null()) tree.set_label(0, r.at("label").get<double>());
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (n.at("id").get<std::size_t>() != i) {
        throw DeserializationError(source + ": node " + std::to_string(i), "ids must be dense");
      }
      const auto parent = n.at("parent").get<NodeId>();
      if (parent >= i) {
        throw DeserializationError(source + ": node " + std::to_string(i),
                                   "parent must precede child");
      }
      const auto path = n.at("path").get<NodePath>();
      Thought t{n.at("thought").get<std::string>(), n.at("tokens").get<std::size_t>(),
                n.at("terminal").get<bool>()};
      std::optional<std::string> answer;
      if (!n.at("answer").is_null()) answer = n.at("answer").get<std::string>();
      auto features = assemble_features(n.at("embedding").get<std::vector<double>>(),
                                        n.at("consistency").get<double>());
      auto child = extend_state(tree.node(parent), std::move(t), std::move(features), dim,
                                path.empty() ? 0 : path.back(), std::move(answer));
      child.path = path;
      const NodeId id = tree.add_child(parent, std::move(child));
      if (!n.at("label").is_null()) tree.set_label(id, n.at("label").get<double>());
    }
    return TreeDump{std::move(problem), std::move(tree)};
  } catch (const json::exception& e) {
    throw DeserializationError(source, e.what());
  } catch (const DeserializationError&) {
    throw;
  } catch (const Error& e) {
    throw DeserializationError(source, e.what());
  }
}

void save_tree(const std::string& path, const Problem& problem, const ThoughtTree& tree) {
  std::ofstream out(path);
  if (!out) throw DeserializationError(path, "cannot write tree dump");
  write_tree(out, problem, tree);
}

TreeDump load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeserializationError(path, "cannot open tree dump");
  return read_tree(in, path);
}

void write_dataset(std::ostream& out, const std::vector<TrainingExample>& examples) {
  for (const auto& ex : examples) {
    json j{{"features", ex.features.flatten()},
           {"label", ex.label},
           {"problem_id", ex.problem_id},
           {"depth", ex.depth},
           {"path", ex.path}};
    out << j.dump() << '\n';
  }
}

std::vector<TrainingExample> read_dataset(std::istream& in, const std::string& source) {
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> width;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      auto flat = j.at("features").get<std::vector<double>>();
      if (flat.size() < 2) throw DeserializationError(where, "features must have length d+1 >= 2");
      if (width && flat.size() != *width) {
        throw DeserializationError(where, "features length " + std::to_string(flat.size()) +
                                              " differs from earlier lines (" +
                                              std::to_string(*width) + ")");
      }
      width = flat.size();
      TrainingExample ex;
      const double c = flat.back();
      flat.pop_back();
      ex.features = assemble_features(std::move(flat), c);
      ex.label = j.at("label").get<double>();
      if (!(ex.label >= 0.0 && ex.label <= 1.0)) throw DeserializationError(where, "label outside [0, 1]");
      ex.problem_id = j.at("problem_id").get<std::string>();
      ex.depth = j.at("depth").get<std::size_t>();
      ex.path = j.at("path").get<NodePath>();
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw DeserializationError(where, e.what());
    } catch (const ValidationError& e) {
      throw DeserializationError(where, e.what());
    }
  }
  return out;
}

std::vector<TrainingExample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeserializationError(path, "cannot open dataset");
  return read_dataset(in, path);
}

}  // namespace dst
