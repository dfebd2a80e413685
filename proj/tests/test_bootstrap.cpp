#include <doctest.h>

#include <algorithm>
#include <random>

#include "tdassist/bootstrap.hpp"
#include "tdassist/error.hpp"
#include "tdassist/fixtures.hpp"
#include "tdassist/logic/syntax.hpp"

using namespace tdassist;
using namespace tdassist::bootstrap;

namespace {

std::size_t position(const std::vector<std::string>& order, const std::string& label) {
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), label) - order.begin());
}

StandardResult result_of(double f1, std::size_t literals) {
  StandardResult r;
  r.f1 = f1;
  // Programs of the requested size: one fact-like clause per literal.
  for (std::size_t i = 0; i < literals; ++i)
    r.program.clauses.push_back(logic::parse_clause("p(" + std::to_string(i) + ")."));
  return r;
}

}  // namespace

TEST_SUITE("bootstrap") {
  TEST_CASE("ranking orders by F1, then size, then name") {
    std::map<std::string, StandardResult> results;
    results["materials"] = result_of(0.8, 9);
    results["header"] = result_of(1.0, 2);
    results["author"] = result_of(1.0, 2);
    results["date"] = result_of(0.8, 3);
    results["title"] = result_of(0.5, 1);
    const auto ranking = rank_targets(results);
    std::vector<std::string> names;
    for (const auto& r : ranking) names.push_back(r.label);
    CHECK(names == std::vector<std::string>{"title", "materials", "date", "author", "header"});
  }

  TEST_CASE("derived graph: each label depends on everything ranked after it") {
    TargetRanking ranking = {{"a", 0.2, 3}, {"b", 0.5, 1}, {"c", 0.9, 4}};
    const auto g = build_dependency_graph(ranking);
    CHECK(g.edges() == std::set<std::pair<std::string, std::string>>{
                           {"a", "b"}, {"a", "c"}, {"b", "c"}});
    CHECK(g.learning_order() == std::vector<std::string>{"c", "b", "a"});
    CHECK(g.descendants("a") == std::vector<std::string>{"b", "c"});
    CHECK(g.acyclic());
  }

  TEST_CASE("learning order is topological on random acyclic graphs") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + trial % 9;
      std::vector<std::string> labels;
      for (int i = 0; i < n; ++i) labels.push_back("t" + std::to_string(i));
      std::shuffle(labels.begin(), labels.end(), rng);
      DependencyGraph g;
      for (const auto& l : labels) g.add_node(l);
      // Edges only from a later to an earlier hidden position keeps it acyclic.
      std::bernoulli_distribution coin(0.3);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
          if (coin(rng)) g.add_edge(labels[i], labels[j]);
      const auto order = g.learning_order();
      CHECK(order.size() == static_cast<std::size_t>(n));
      for (const auto& [dependent, dependency] : g.edges())
        CHECK(position(order, dependency) < position(order, dependent));
    }
  }

  TEST_CASE("graph text and cycles") {
    const auto g = parse_dependency_graph("% manual\nmaterials -> header\nauthor\n# end\n");
    CHECK(g.has_node("author"));
    CHECK(g.dependencies("materials") == std::vector<std::string>{"header"});
    CHECK(parse_dependency_graph(to_string(g)) == g);
    CHECK_THROWS_AS(parse_dependency_graph("a -> b\nb -> a\n"), ConfigError);
    CHECK_THROWS_AS(parse_dependency_graph("a -> \n"), ParseError);
    DependencyGraph cyc;
    CHECK_THROWS_AS(cyc.add_edge("x", "x"), ConfigError);
    cyc.add_edge("x", "y");
    cyc.add_edge("y", "z");
    cyc.add_edge("z", "x");
    CHECK_FALSE(cyc.acyclic());
    CHECK_THROWS_AS(cyc.learning_order(), ConfigError);
  }

  TEST_CASE("dependency body mode") {
    const auto b = ilp::parse_bias("head f(+cell,#token,-index)");
    const auto m = dependency_body_mode(b.modes[0]);
    CHECK(m.to_string() == "body f(+cell,+token,-index)");
  }

  TEST_CASE("an empty graph reproduces standard induction") {
    const auto corpus = ilp::Corpus::build(fixtures::parts_list_corpus(4, 3, 2, 4));
    const auto bias = fixtures::parts_list_bias();
    std::map<std::string, ilp::LearningTask> tasks;
    DependencyGraph g;
    for (const std::string label : {"header", "author"}) {
      tasks.emplace(label, ilp::make_task(corpus, label, bias, {}));
      g.add_node(label);
    }
    const auto boot = induce_bootstrap(tasks, g, 17);
    for (const auto& [label, task] : tasks) {
      CHECK(boot.results.at(label).program == ilp::induce(task, 17).program);
      CHECK(boot.backgrounds.at(label).clauses.empty());
    }
  }
}
