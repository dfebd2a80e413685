#include "tdassist/bootstrap.hpp"

#include <algorithm>
#include <sstream>

#include "tdassist/error.hpp"

namespace tdassist::bootstrap {

TargetRanking rank_targets(const std::map<std::string, StandardResult>& results) {
  TargetRanking out;
  for (const auto& [label, r] : results) out.push_back({label, r.f1, r.program.literal_count()});
  std::sort(out.begin(), out.end(), [](const RankedTarget& a, const RankedTarget& b) {
    if (a.f1 != b.f1) return a.f1 < b.f1;
    if (a.literals != b.literals) return a.literals > b.literals;
    return a.label < b.label;
  });
  return out;
}

void DependencyGraph::add_node(const std::string& label) {
  if (!has_node(label)) nodes_.push_back(label);
}

void DependencyGraph::add_edge(const std::string& dependent, const std::string& dependency) {
  if (dependent == dependency) throw ConfigError("label '" + dependent + "' depends on itself");
  add_node(dependent);
  add_node(dependency);
  edges_.emplace(dependent, dependency);
}

bool DependencyGraph::has_node(const std::string& label) const {
  return std::find(nodes_.begin(), nodes_.end(), label) != nodes_.end();
}

std::vector<std::string> DependencyGraph::dependencies(const std::string& label) const {
  std::vector<std::string> out;
  for (const auto& [from, to] : edges_)
    if (from == label) out.push_back(to);
  return out;
}

std::vector<std::string> DependencyGraph::descendants(const std::string& label) const {
  std::set<std::string> seen;
  std::vector<std::string> stack = dependencies(label);
  while (!stack.empty()) {
    auto l = stack.back();
    stack.pop_back();
    if (!seen.insert(l).second) continue;
    for (auto& d : dependencies(l)) stack.push_back(d);
  }
  return {seen.begin(), seen.end()};
}

bool DependencyGraph::acyclic() const {
  try {
    learning_order();
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

std::vector<std::string> DependencyGraph::learning_order() const {
  std::vector<std::string> order;
  std::set<std::string> done;
  while (order.size() < nodes_.size()) {
    bool progressed = false;
    for (const auto& n : nodes_) {
      if (done.contains(n)) continue;
      const auto deps = dependencies(n);
      if (std::all_of(deps.begin(), deps.end(), [&](const auto& d) { return done.contains(d); })) {
        order.push_back(n);
        done.insert(n);
        progressed = true;
        break;
      }
    }
    if (!progressed) throw ConfigError("dependency graph has a cycle");
  }
  return order;
}

DependencyGraph build_dependency_graph(const TargetRanking& ranking) {
  if (ranking.empty()) throw ConfigError("cannot build a dependency graph from an empty ranking");
  DependencyGraph g;
  for (const auto& t : ranking) g.add_node(t.label);
  for (std::size_t i = 0; i < ranking.size(); ++i)
    for (std::size_t j = i + 1; j < ranking.size(); ++j)
      g.add_edge(ranking[i].label, ranking[j].label);
  return g;
}

DependencyGraph parse_dependency_graph(std::string_view text) {
  DependencyGraph g;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find_first_of("%#"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      g.add_node(line);
      continue;
    }
    const auto a = trim(line.substr(0, arrow));
    const auto b = trim(line.substr(arrow + 2));
    if (a.empty() || b.empty())
      throw ParseError("dependency graph line " + std::to_string(line_no) + ": expected 'a -> b'");
    g.add_edge(a, b);
  }
  if (!g.acyclic()) throw ConfigError("dependency graph has a cycle");
  return g;
}

std::string to_string(const DependencyGraph& g) {
  std::string out;
  for (const auto& n : g.nodes()) {
    const auto deps = g.dependencies(n);
    if (deps.empty()) out += n + "\n";
    for (const auto& d : deps) out += n + " -> " + d + "\n";
  }
  return out;
}

ilp::ModeDecl dependency_body_mode(const ilp::ModeDecl& head) {
  ilp::ModeDecl m = head;
  m.head = false;
  for (auto& a : m.args)
    if (a.mode == ilp::ArgMode::Constant) a.mode = ilp::ArgMode::Input;
  return m;
}

BootstrapResult induce_bootstrap(const std::map<std::string, ilp::LearningTask>& tasks,
                                 const DependencyGraph& graph,
                                 std::optional<std::uint64_t> shuffle_seed) {
  for (const auto& n : graph.nodes())
    if (!tasks.contains(n)) throw ConfigError("dependency graph names unknown label '" + n + "'");

  // Labels absent from the graph are learned last, independently.
  DependencyGraph full = graph;
  for (const auto& [label, task] : tasks) full.add_node(label);

  BootstrapResult out;
  out.order = full.learning_order();
  for (const auto& label : out.order) {
    ilp::LearningTask task = tasks.at(label);
    for (const auto& dep : full.descendants(label)) {
      const auto& learned = out.results.at(dep).program;
      task.background_program.clauses.insert(task.background_program.clauses.end(),
                                             learned.clauses.begin(), learned.clauses.end());
      task.bias.add(dependency_body_mode(tasks.at(dep).head));
    }
    out.backgrounds[label] = task.background_program;
    out.results[label] = ilp::induce(task, shuffle_seed);
  }
  return out;
}

logic::Program PipelineResult::program(const std::string& label) const {
  if (bootstrapped) return bootstrapped->results.at(label).program;
  return standard.at(label).program;
}

logic::Program PipelineResult::background(const std::string& label) const {
  if (bootstrapped) return bootstrapped->backgrounds.at(label);
  return {};
}

logic::Program PipelineResult::combined() const {
  logic::Program out;
  std::vector<std::string> order;
  if (bootstrapped) {
    order = bootstrapped->order;
  } else {
    for (const auto& [label, r] : standard) order.push_back(label);
  }
  for (const auto& label : order) {
    const auto p = program(label);
    out.clauses.insert(out.clauses.end(), p.clauses.begin(), p.clauses.end());
  }
  return out;
}

PipelineResult learn_labels(const ilp::Corpus& corpus, const std::vector<std::string>& labels,
                            const ilp::Bias& bias, const ilp::SearchParams& params,
                            bool bootstrap, const std::optional<DependencyGraph>& manual,
                            std::optional<std::uint64_t> shuffle_seed) {
  if (labels.empty()) throw ConfigError("no labels to learn");
  PipelineResult out;
  std::map<std::string, ilp::LearningTask> tasks;
  for (const auto& label : labels) tasks.emplace(label, ilp::make_task(corpus, label, bias, params));

  std::map<std::string, StandardResult> standard;
  for (const auto& [label, task] : tasks) {
    out.standard[label] = ilp::induce(task, shuffle_seed);
    standard[label] = StandardResult{out.standard[label].program, out.standard[label].training.f1()};
  }
  out.ranking = rank_targets(standard);
  if (!bootstrap) {
    for (const auto& t : out.ranking) out.graph.add_node(t.label);
    return out;
  }
  out.graph = manual ? *manual : build_dependency_graph(out.ranking);
  out.bootstrapped = induce_bootstrap(tasks, out.graph, shuffle_seed);
  return out;
}

}  // namespace tdassist::bootstrap
