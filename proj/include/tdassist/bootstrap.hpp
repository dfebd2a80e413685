#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tdassist/ilp.hpp"

namespace tdassist::bootstrap {

struct RankedTarget {
  std::string label;
  double f1 = 0.0;
  std::size_t literals = 0;
};

using TargetRanking = std::vector<RankedTarget>;

struct StandardResult {
  logic::Program program;
  double f1 = 0.0;
};

// Ascending training F1, then descending program size, then label name.
TargetRanking rank_targets(const std::map<std::string, StandardResult>& results);

// Directed graph over labels; an edge a -> b means a depends on b.
class DependencyGraph {
 public:
  void add_node(const std::string& label);
  void add_edge(const std::string& dependent, const std::string& dependency);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::set<std::pair<std::string, std::string>>& edges() const { return edges_; }
  bool has_node(const std::string& label) const;

  std::vector<std::string> dependencies(const std::string& label) const;
  // Every label reachable from `label`, sorted.
  std::vector<std::string> descendants(const std::string& label) const;

  bool acyclic() const;
  // Dependencies before dependents; among ready labels, node insertion order.
  // Throws ConfigError on a cycle.
  std::vector<std::string> learning_order() const;

  friend bool operator==(const DependencyGraph&, const DependencyGraph&) = default;

 private:
  std::vector<std::string> nodes_;
  std::set<std::pair<std::string, std::string>> edges_;
};

// Each label depends on every label ranked after it.
DependencyGraph build_dependency_graph(const TargetRanking& ranking);

// Lines `a -> b`; '%' or '#' start comments. Checked for cycles.
DependencyGraph parse_dependency_graph(std::string_view text);
std::string to_string(const DependencyGraph& g);

// Body mode through which a learned dependency is called: the head mode with
// constants turned into inputs, outputs kept.
ilp::ModeDecl dependency_body_mode(const ilp::ModeDecl& head);

struct BootstrapResult {
  std::map<std::string, ilp::InductionResult> results;
  std::vector<std::string> order;
  // Background program each label was learned with.
  std::map<std::string, logic::Program> backgrounds;
};

// Learns labels dependencies-first, extending each label's background with
// the programs of its descendants and its bias with their body modes.
BootstrapResult induce_bootstrap(const std::map<std::string, ilp::LearningTask>& tasks,
                                 const DependencyGraph& graph,
                                 std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Standard ILP per label, then (when requested) ranking, graph and
// bootstrapped relearning. A manual graph replaces the derived one.
struct PipelineResult {
  std::map<std::string, ilp::InductionResult> standard;
  TargetRanking ranking;
  DependencyGraph graph;
  std::optional<BootstrapResult> bootstrapped;

  // Final program per label (bootstrapped when available) and the
  // background needed to run it.
  logic::Program program(const std::string& label) const;
  logic::Program background(const std::string& label) const;
  // Every learned clause, dependencies first.
  logic::Program combined() const;
};

PipelineResult learn_labels(const ilp::Corpus& corpus, const std::vector<std::string>& labels,
                            const ilp::Bias& bias, const ilp::SearchParams& params,
                            bool bootstrap, const std::optional<DependencyGraph>& manual = {},
                            std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace tdassist::bootstrap
