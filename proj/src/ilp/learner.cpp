#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "tdassist/error.hpp"
#include "tdassist/ilp.hpp"
#include "tdassist/logic/solver.hpp"

namespace tdassist::ilp {

using logic::Atom;
using logic::Clause;
using logic::FactSet;
using logic::KnowledgeBase;
using logic::Program;
using logic::Solver;
using logic::SolverOptions;
using logic::Term;

namespace {

// Extensional coverage: the target predicate is answered from the positive
// examples (as facts) rather than from the clause being scored, which keeps
// recursive candidates cheap and terminating.
class CoverageEngine {
 public:
  explicit CoverageEngine(const LearningTask& task) : task_(task) {
    extensional_.resize(task.backgrounds.size());
    for (const auto& e : task.positives) extensional_[e.drawing].add(e.atom);
    SolverOptions opts;
    opts.depth_limit = task.params.proof_depth;
    for (std::size_t d = 0; d < task.backgrounds.size(); ++d) {
      KnowledgeBase kb{{task.backgrounds[d].get(), &extensional_[d]}, {&task.background_program}};
      solvers_.push_back(std::make_unique<Solver>(kb, opts));
    }
  }

  Solver& solver(std::size_t drawing) { return *solvers_[drawing]; }

  bool covers(const Clause& c, const Example& e) {
    const std::uint32_t vars = c.var_count();
    std::vector<std::optional<Term>> initial(vars);
    if (c.head.name != e.atom.name || c.head.args.size() != e.atom.args.size()) return false;
    for (std::size_t i = 0; i < c.head.args.size(); ++i) {
      const Term h = c.head.args[i];
      const Term v = e.atom.args[i];
      if (h.is_variable()) {
        auto& slot = initial[h.id()];
        if (slot && *slot != v) return false;
        slot = v;
      } else if (h != v) {
        return false;
      }
    }
    if (c.body.empty()) return true;
    return solvers_[e.drawing]->exists(c.body, vars, initial);
  }

 private:
  const LearningTask& task_;
  std::vector<FactSet> extensional_;
  std::vector<std::unique_ptr<Solver>> solvers_;
};

// Intensional coverage: background program plus the hypothesis.
class ProgramProver {
 public:
  ProgramProver(const LearningTask& task, const Program& program) {
    SolverOptions opts;
    opts.depth_limit = task.params.proof_depth;
    for (const auto& bg : task.backgrounds)
      solvers_.push_back(std::make_unique<Solver>(
          KnowledgeBase{{bg.get()}, {&task.background_program, &program}}, opts));
  }

  bool proves(const Example& e) {
    return solvers_[e.drawing]->exists(std::span<const Atom>(&e.atom, 1), 0);
  }

 private:
  std::vector<std::unique_ptr<Solver>> solvers_;
};

struct VarInfo {
  Term value;
  std::string type;
  int depth = 0;
};

std::vector<std::uint32_t> variables_of(const Atom& a) {
  std::vector<std::uint32_t> out;
  for (Term t : a.args)
    if (t.is_variable() && std::find(out.begin(), out.end(), t.id()) == out.end())
      out.push_back(t.id());
  return out;
}

// Input variables of each body literal, found by matching the literal
// against the body modes in the context of the variables already introduced
// (head, then earlier literals).
std::vector<std::vector<std::uint32_t>> literal_inputs(const Clause& bottom, const Bias& bias) {
  std::set<std::uint32_t> available;
  for (auto v : variables_of(bottom.head)) available.insert(v);
  std::vector<std::vector<std::uint32_t>> out;
  const auto modes = bias.body_modes();
  for (const Atom& lit : bottom.body) {
    std::optional<std::vector<std::uint32_t>> chosen;
    for (const ModeDecl* m : modes) {
      if (m->predicate != lit.name_str() || m->args.size() != lit.args.size()) continue;
      std::vector<std::uint32_t> inputs;
      bool ok = true;
      for (std::size_t i = 0; i < lit.args.size() && ok; ++i) {
        const Term t = lit.args[i];
        switch (m->args[i].mode) {
          case ArgMode::Constant:
            ok = t.is_constant();
            break;
          case ArgMode::Input:
            ok = t.is_variable() && available.contains(t.id());
            if (ok) inputs.push_back(t.id());
            break;
          case ArgMode::Output:
            ok = t.is_variable();
            break;
        }
      }
      if (ok) {
        chosen = std::move(inputs);
        break;
      }
    }
    if (!chosen) throw ValidationError("bottom-clause literal matches no body mode");
    out.push_back(std::move(*chosen));
    for (auto v : variables_of(lit)) available.insert(v);
  }
  return out;
}

bool is_step_predicate(const std::string& name) {
  return name == "succ" || name == "above_below" || name == "left_right";
}

// A recursive literal must take, in some argument position, a value reached
// from the head argument at that position by one succ/2 or adjacency step.
bool recursion_safe(const Clause& c, const Atom& rec) {
  for (std::size_t i = 0; i < rec.args.size() && i < c.head.args.size(); ++i) {
    const Term h = c.head.args[i];
    const Term r = rec.args[i];
    if (!h.is_variable() || !r.is_variable() || h == r) continue;
    for (const Atom& lit : c.body) {
      if (&lit == &rec || lit.args.size() != 2 || !is_step_predicate(lit.name_str())) continue;
      if (lit.name_str() == "succ") {
        if (lit.args[0] == r && lit.args[1] == h) return true;
      } else if ((lit.args[0] == h && lit.args[1] == r) || (lit.args[0] == r && lit.args[1] == h)) {
        return true;
      }
    }
  }
  return false;
}

bool clause_recursion_safe(const Clause& c) {
  for (const Atom& lit : c.body)
    if (lit.predicate() == c.head.predicate() && !recursion_safe(c, lit)) return false;
  return true;
}

struct Node {
  std::vector<std::uint32_t> literals;  // indices into the bottom body, increasing
  std::vector<std::uint32_t> pos;       // covered positive ids
  std::vector<std::uint32_t> neg;       // covered negative ids
  int score = 0;
  std::uint64_t order = 0;
};

Clause node_clause(const Clause& bottom, const Node& n) {
  Clause c;
  c.head = bottom.head;
  for (auto i : n.literals) c.body.push_back(bottom.body[i]);
  return c;
}

// Higher score first, then shorter body, then earlier generation.
bool better(const Node& a, const Node& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.literals.size() != b.literals.size()) return a.literals.size() < b.literals.size();
  return a.order < b.order;
}

struct SearchOutcome {
  std::optional<ScoredClause> best;
  std::vector<std::uint32_t> covered;  // positive ids covered by best
  int nodes = 0;
};

SearchOutcome search_impl(const Clause& bottom, const LearningTask& task, CoverageEngine& engine,
                          const std::vector<std::uint32_t>& active) {
  const auto inputs = literal_inputs(bottom, task.bias);
  const auto head_vars = variables_of(bottom.head);
  const std::size_t max_body = static_cast<std::size_t>(std::max(0, task.params.max_clause_len - 1));
  const auto target = bottom.head.predicate();

  int nodes = 0;
  std::uint64_t generated = 0;

  auto evaluate = [&](Node& n, const std::vector<std::uint32_t>& parent_pos,
                      const std::vector<std::uint32_t>& parent_neg) {
    const Clause c = node_clause(bottom, n);
    for (auto id : parent_pos)
      if (engine.covers(c, task.positives[id])) n.pos.push_back(id);
    // Negatives past the noise bound only matter for the score, and every
    // refinement covers a subset, so all of them are still needed.
    for (auto id : parent_neg)
      if (engine.covers(c, task.negatives[id])) n.neg.push_back(id);
    n.score = static_cast<int>(n.pos.size()) - static_cast<int>(n.neg.size()) -
              static_cast<int>(n.literals.size()) + 1;
    n.order = generated++;
    ++nodes;
  };

  auto acceptable = [&](const Node& n) {
    return !n.pos.empty() && static_cast<int>(n.neg.size()) <= task.params.noise;
  };

  std::vector<std::uint32_t> all_neg(task.negatives.size());
  for (std::uint32_t i = 0; i < all_neg.size(); ++i) all_neg[i] = i;

  Node root;
  evaluate(root, active, all_neg);
  std::optional<Node> best;
  if (acceptable(root)) best = root;

  auto worse_in_queue = [](const Node& a, const Node& b) { return better(b, a); };
  std::priority_queue<Node, std::vector<Node>, decltype(worse_in_queue)> open(worse_in_queue);
  open.push(std::move(root));

  while (!open.empty() && nodes < task.params.node_bound) {
    Node cur = open.top();
    open.pop();
    if (cur.literals.size() >= max_body) continue;
    // Best reachable by refinement: same positives, no negatives, one more literal.
    const int bound = static_cast<int>(cur.pos.size()) - static_cast<int>(cur.literals.size());
    if (best && bound <= best->score) continue;

    std::set<std::uint32_t> bound_vars(head_vars.begin(), head_vars.end());
    for (auto i : cur.literals)
      for (auto v : variables_of(bottom.body[i])) bound_vars.insert(v);

    const std::uint32_t start = cur.literals.empty() ? 0 : cur.literals.back() + 1;
    for (std::uint32_t j = start; j < bottom.body.size() && nodes < task.params.node_bound; ++j) {
      const bool connected = std::all_of(inputs[j].begin(), inputs[j].end(),
                                         [&](std::uint32_t v) { return bound_vars.contains(v); });
      if (!connected) continue;
      Node child;
      child.literals = cur.literals;
      child.literals.push_back(j);
      if (bottom.body[j].predicate() == target &&
          !clause_recursion_safe(node_clause(bottom, child)))
        continue;
      evaluate(child, cur.pos, cur.neg);
      if (child.pos.empty()) continue;
      if (acceptable(child) && (!best || better(child, *best))) best = child;
      const int child_bound =
          static_cast<int>(child.pos.size()) - static_cast<int>(child.literals.size());
      if (child.literals.size() < max_body && (!best || child_bound > best->score))
        open.push(std::move(child));
    }
  }

  SearchOutcome out;
  out.nodes = nodes;
  if (!best) return out;
  ScoredClause sc;
  sc.clause = node_clause(bottom, *best);
  sc.positives = static_cast<int>(best->pos.size());
  sc.negatives = static_cast<int>(best->neg.size());
  sc.score = best->score;
  sc.nodes = nodes;
  out.best = std::move(sc);
  out.covered = best->pos;
  return out;
}

}  // namespace

Clause saturate(const Example& seed, const LearningTask& task) {
  task.params.validate();
  if (seed.atom.predicate() != task.target)
    throw ValidationError("seed predicate differs from the target");
  if (seed.drawing >= task.backgrounds.size()) throw ValidationError("seed drawing out of range");

  FactSet extensional;
  for (const auto& e : task.positives)
    if (e.drawing == seed.drawing) extensional.add(e.atom);
  SolverOptions opts;
  opts.depth_limit = task.params.proof_depth;
  Solver solver(KnowledgeBase{{task.backgrounds[seed.drawing].get(), &extensional},
                              {&task.background_program}},
                opts);

  std::vector<VarInfo> vars;
  std::map<std::pair<Term, std::string>, std::uint32_t> var_of;
  auto lookup = [&](Term value, const std::string& type) -> std::optional<std::uint32_t> {
    auto it = var_of.find({value, type});
    if (it == var_of.end()) return std::nullopt;
    return it->second;
  };
  auto introduce = [&](Term value, const std::string& type, int depth) {
    if (auto v = lookup(value, type)) return *v;
    const auto id = static_cast<std::uint32_t>(vars.size());
    vars.push_back(VarInfo{value, type, depth});
    var_of.emplace(std::make_pair(value, type), id);
    return id;
  };

  Clause bottom;
  bottom.head.name = seed.atom.name;
  for (std::size_t i = 0; i < seed.atom.args.size(); ++i) {
    const ModeArg& a = task.head.args.at(i);
    if (a.mode == ArgMode::Constant) {
      bottom.head.args.push_back(seed.atom.args[i]);
    } else {
      bottom.head.args.push_back(Term::variable(introduce(seed.atom.args[i], a.type, 0)));
    }
  }

  std::set<Atom> seen;
  const auto cap = static_cast<std::size_t>(task.params.saturation_cap);
  const auto modes = task.bias.body_modes();

  for (int layer = 1; layer <= task.params.var_depth; ++layer) {
    for (const ModeDecl* m : modes) {
      if (bottom.body.size() >= cap) break;
      std::vector<std::size_t> input_pos;
      for (std::size_t i = 0; i < m->args.size(); ++i)
        if (m->args[i].mode == ArgMode::Input) input_pos.push_back(i);
      if (input_pos.empty() && layer > 1) continue;

      // Candidate variables per input position; snapshot so variables
      // introduced in this layer are not consumed in it.
      std::vector<std::vector<std::uint32_t>> choices;
      for (auto p : input_pos) {
        std::vector<std::uint32_t> c;
        for (std::uint32_t v = 0; v < vars.size(); ++v)
          if (vars[v].type == m->args[p].type && vars[v].depth < layer) c.push_back(v);
        choices.push_back(std::move(c));
      }
      if (std::any_of(choices.begin(), choices.end(), [](const auto& c) { return c.empty(); }))
        continue;

      std::vector<std::size_t> pick(choices.size(), 0);
      bool done = false;
      while (!done && bottom.body.size() < cap) {
        int max_depth = 0;
        for (std::size_t k = 0; k < choices.size(); ++k)
          max_depth = std::max(max_depth, vars[choices[k][pick[k]]].depth);

        // Tuples made only of older variables were handled in an earlier layer.
        if (max_depth == layer - 1) {
          Atom query(m->predicate, {});
          std::uint32_t free = 0;
          std::size_t k = 0;
          for (std::size_t i = 0; i < m->args.size(); ++i) {
            if (m->args[i].mode == ArgMode::Input) {
              query.args.push_back(vars[choices[k][pick[k]]].value);
              ++k;
            } else {
              query.args.push_back(Term::variable(free++));
            }
          }
          std::vector<std::vector<std::optional<Term>>> answers;
          std::set<std::vector<std::optional<Term>>> distinct;
          solver.solve(std::span<const Atom>(&query, 1), free,
                       [&](std::span<const std::optional<Term>> ans) {
                         std::vector<std::optional<Term>> a(ans.begin(), ans.end());
                         if (distinct.insert(a).second) answers.push_back(std::move(a));
                         return static_cast<int>(answers.size()) >= task.params.recall;
                       });

          for (const auto& ans : answers) {
            if (bottom.body.size() >= cap) break;
            if (std::any_of(ans.begin(), ans.end(), [](const auto& t) { return !t; })) continue;
            // Outputs reuse an existing variable for the same value and
            // type; fresh variables are only allocated for kept literals.
            Atom lit(m->predicate, {});
            std::uint32_t a = 0;
            std::size_t in = 0;
            bool fresh = false;
            for (std::size_t i = 0; i < m->args.size(); ++i) {
              const ModeArg& arg = m->args[i];
              if (arg.mode == ArgMode::Input) {
                lit.args.push_back(Term::variable(choices[in][pick[in]]));
                ++in;
                continue;
              }
              const Term value = *ans[a++];
              if (arg.mode == ArgMode::Constant) {
                lit.args.push_back(value);
              } else if (auto v = lookup(value, arg.type)) {
                lit.args.push_back(Term::variable(*v));
              } else {
                fresh = true;
                lit.args.push_back(value);  // resolved below
              }
            }
            if (!fresh) {
              if (lit == bottom.head || !seen.insert(lit).second) continue;
              bottom.body.push_back(std::move(lit));
              continue;
            }
            a = 0;
            for (std::size_t i = 0; i < m->args.size(); ++i) {
              if (m->args[i].mode == ArgMode::Input) continue;
              const Term value = *ans[a++];
              if (m->args[i].mode == ArgMode::Output)
                lit.args[i] = Term::variable(introduce(value, m->args[i].type, layer));
            }
            seen.insert(lit);
            bottom.body.push_back(std::move(lit));
          }
        }

        std::size_t k = choices.size();
        if (k == 0) break;
        while (true) {
          if (k == 0) {
            done = true;
            break;
          }
          --k;
          if (++pick[k] < choices[k].size()) break;
          pick[k] = 0;
        }
      }
    }
  }
  return bottom;
}

std::optional<ScoredClause> search_clause(const Clause& bottom, const LearningTask& task) {
  task.params.validate();
  CoverageEngine engine(task);
  std::vector<std::uint32_t> active(task.positives.size());
  for (std::uint32_t i = 0; i < active.size(); ++i) active[i] = i;
  return search_impl(bottom, task, engine, active).best;
}

double Metrics::precision() const {
  const int d = true_positives + false_positives;
  return d == 0 ? 0.0 : static_cast<double>(true_positives) / d;
}

double Metrics::recall() const {
  const int d = true_positives + false_negatives;
  return d == 0 ? 0.0 : static_cast<double>(true_positives) / d;
}

double Metrics::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Metrics& Metrics::operator+=(const Metrics& o) {
  true_positives += o.true_positives;
  false_positives += o.false_positives;
  false_negatives += o.false_negatives;
  return *this;
}

namespace {

std::size_t covered_count(const LearningTask& task, const Program& program) {
  ProgramProver prover(task, program);
  return static_cast<std::size_t>(std::count_if(task.positives.begin(), task.positives.end(),
                                                [&](const Example& e) { return prover.proves(e); }));
}

// Drops clauses whose removal keeps every covered positive covered.
void remove_redundant(const LearningTask& task, Program& program) {
  bool changed = true;
  while (changed && program.clauses.size() > 1) {
    changed = false;
    const std::size_t full = covered_count(task, program);
    for (std::size_t i = program.clauses.size(); i-- > 0;) {
      Program without = program;
      without.clauses.erase(without.clauses.begin() + static_cast<std::ptrdiff_t>(i));
      if (covered_count(task, without) >= full) {
        program = std::move(without);
        changed = true;
        break;
      }
    }
  }
}

}  // namespace

InductionResult induce(const LearningTask& input, std::optional<std::uint64_t> shuffle_seed) {
  input.validate();
  LearningTask task = input;
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(task.positives.begin(), task.positives.end(), rng);
  }

  InductionResult result;
  CoverageEngine engine(task);
  std::vector<bool> covered(task.positives.size(), false);

  while (true) {
    std::vector<std::uint32_t> active;
    for (std::uint32_t i = 0; i < covered.size(); ++i)
      if (!covered[i]) active.push_back(i);
    if (active.empty()) break;

    const std::uint32_t seed = active.front();
    const Clause bottom = saturate(task.positives[seed], task);
    SearchOutcome found = search_impl(bottom, task, engine, active);
    result.nodes += found.nodes;
    if (!found.best) break;
    for (auto id : found.covered) covered[id] = true;
    result.program.clauses.push_back(logic::normalize_variables(found.best->clause));
    if (!covered[seed]) break;  // no progress is possible from this seed
  }

  remove_redundant(task, result.program);

  ProgramProver prover(task, result.program);
  for (const auto& e : task.positives) {
    if (prover.proves(e)) {
      ++result.training.true_positives;
    } else {
      ++result.training.false_negatives;
    }
  }
  for (const auto& e : task.negatives)
    if (prover.proves(e)) ++result.training.false_positives;
  return result;
}

std::vector<Atom> predict(const Program& program, const FactSet& facts, const drawing::Drawing& d,
                          const ModeDecl& head, int proof_depth,
                          const Program& background_program) {
  SolverOptions opts;
  opts.depth_limit = proof_depth;
  Solver solver(KnowledgeBase{{&facts}, {&background_program, &program}}, opts);

  const auto arity = static_cast<std::uint32_t>(head.args.size());
  Atom goal(head.predicate, {});
  for (std::uint32_t i = 0; i < arity; ++i) goal.args.push_back(Term::variable(i));

  // Arguments a clause leaves unbound range over their type's domain.
  auto domain = [&](const std::string& type) {
    std::vector<Term> out;
    if (type == "cell") {
      for (const auto& c : d.cells) out.push_back(Term::symbol(c.id));
    } else if (type == "index") {
      for (std::size_t i = 0; i <= d.cells.size(); ++i)
        out.push_back(Term::integer(static_cast<std::int64_t>(i)));
    }
    return out;
  };

  std::set<Atom> found;
  solver.solve(std::span<const Atom>(&goal, 1), arity,
               [&](std::span<const std::optional<Term>> ans) {
                 std::vector<std::vector<Term>> partial{{}};
                 for (std::uint32_t i = 0; i < arity; ++i) {
                   std::vector<Term> options =
                       ans[i] ? std::vector<Term>{*ans[i]} : domain(head.args[i].type);
                   std::vector<std::vector<Term>> next;
                   for (const auto& p : partial)
                     for (Term t : options) {
                       auto q = p;
                       q.push_back(t);
                       next.push_back(std::move(q));
                     }
                   partial = std::move(next);
                 }
                 for (auto& args : partial) found.insert(Atom(goal.name, std::move(args)));
                 return false;
               });
  return {found.begin(), found.end()};
}

Evaluation evaluate(const Program& program, const Corpus& corpus, const std::string& label,
                    const ModeDecl& head, int proof_depth, const Program& background_program) {
  Evaluation out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& d = corpus.drawings[i];
    std::set<Atom> gold;
    for (auto& e : label_examples(d, i, label, head)) gold.insert(e.atom);
    const auto predicted =
        predict(program, *corpus.backgrounds[i], d, head, proof_depth, background_program);
    const std::set<Atom> pred(predicted.begin(), predicted.end());

    DrawingErrors errors;
    errors.drawing = d.id;
    Metrics m;
    for (const auto& a : pred) {
      if (gold.contains(a)) {
        ++m.true_positives;
      } else {
        ++m.false_positives;
        errors.false_positives.push_back(a);
      }
    }
    for (const auto& a : gold) {
      if (!pred.contains(a)) {
        ++m.false_negatives;
        errors.false_negatives.push_back(a);
      }
    }
    out.metrics += m;
    out.per_drawing.push_back(std::move(errors));
  }
  return out;
}

}  // namespace tdassist::ilp
