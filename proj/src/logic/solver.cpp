#include "tdassist/logic/solver.hpp"

#include <algorithm>
#include <set>

namespace tdassist::logic {

std::optional<Substitution> unify(const Atom& a, const Atom& b) {
  if (a.name != b.name || a.args.size() != b.args.size()) return std::nullopt;
  Substitution s;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    Term x = logic::apply(s, a.args[i]);
    Term y = logic::apply(s, b.args[i]);
    if (x == y) continue;
    // Terms are flat, so the occurs check reduces to x != y, handled above.
    if (x.is_variable()) {
      s[x.id()] = y;
    } else if (y.is_variable()) {
      s[y.id()] = x;
    } else {
      return std::nullopt;
    }
  }
  // Resolve chains so every binding maps straight to its final value.
  for (auto& [var, value] : s) value = logic::apply(s, value);
  return s;
}

std::size_t Solver::GroundKeyHash::operator()(const GroundKey& k) const noexcept {
  std::size_t h = k.name * 31u + static_cast<std::size_t>(k.depth);
  for (Term t : k.args) h = h * 1000003u ^ TermHash{}(t);
  return h;
}

Solver::Solver(KnowledgeBase kb, SolverOptions options)
    : kb_(std::move(kb)), options_(options) {
  for (const Program* p : kb_.programs)
    for (const Clause& c : p->clauses) rules_[c.head.predicate()].push_back(&c);
}

Term Solver::deref(Term t) const {
  while (t.is_variable() && slots_[t.id()].bound) t = slots_[t.id()].value;
  return t;
}

Term Solver::resolve(Term t, std::uint32_t offset) const {
  if (t.is_variable()) return deref(Term::variable(offset + t.id()));
  return t;
}

void Solver::bind(std::uint32_t slot, Term value) {
  slots_[slot].bound = true;
  slots_[slot].value = value;
  trail_.push_back(slot);
}

void Solver::undo(std::size_t trail_mark) {
  while (trail_.size() > trail_mark) {
    slots_[trail_.back()].bound = false;
    trail_.pop_back();
  }
}

std::uint32_t Solver::allocate(std::uint32_t count) {
  std::uint32_t base = next_slot_;
  next_slot_ += count;
  if (slots_.size() < next_slot_) slots_.resize(next_slot_ * 2 + 16);
  for (std::uint32_t i = base; i < next_slot_; ++i) slots_[i].bound = false;
  return base;
}

bool Solver::unify_terms(Term a, Term b) {
  a = deref(a);
  b = deref(b);
  if (a == b) return true;
  if (a.is_variable()) {
    bind(a.id(), b);
    return true;
  }
  if (b.is_variable()) {
    bind(b.id(), a);
    return true;
  }
  return false;
}

void Solver::solve(std::span<const Atom> goals, std::uint32_t var_count, const AnswerFn& on_answer,
                   std::span<const std::optional<Term>> initial) {
  trail_.clear();
  goals_.clear();
  next_slot_ = 0;
  const std::uint32_t base = allocate(var_count);
  for (std::size_t i = 0; i < initial.size() && i < var_count; ++i)
    if (initial[i]) bind(base + static_cast<std::uint32_t>(i), *initial[i]);

  std::int32_t next = -1;
  for (auto it = goals.rbegin(); it != goals.rend(); ++it) {
    goals_.push_back(GoalNode{&*it, base, options_.depth_limit, next});
    next = static_cast<std::int32_t>(goals_.size() - 1);
  }

  std::vector<std::optional<Term>> answer(var_count);
  solve_goals(next, [&]() {
    for (std::uint32_t i = 0; i < var_count; ++i) {
      Term t = deref(Term::variable(base + i));
      if (!t.is_variable()) {
        answer[i] = t;
      } else {
        answer[i].reset();
      }
    }
    return on_answer(answer);
  });
  undo(0);
}

bool Solver::exists(std::span<const Atom> goals, std::uint32_t var_count,
                    std::span<const std::optional<Term>> initial) {
  bool found = false;
  solve(
      goals, var_count,
      [&found](std::span<const std::optional<Term>>) {
        found = true;
        return true;
      },
      initial);
  return found;
}

std::vector<Substitution> Solver::all_answers(std::span<const Atom> goals,
                                              std::uint32_t var_count) {
  std::vector<Substitution> out;
  std::set<std::vector<std::optional<Term>>> seen;
  solve(goals, var_count, [&](std::span<const std::optional<Term>> answer) {
    std::vector<std::optional<Term>> key(answer.begin(), answer.end());
    if (seen.insert(key).second) {
      Substitution s;
      for (std::uint32_t i = 0; i < key.size(); ++i)
        if (key[i]) s.emplace(i, *key[i]);
      out.push_back(std::move(s));
    }
    return false;
  });
  return out;
}

bool Solver::solve_goals(std::int32_t goal, const Continuation& k) {
  if (goal < 0) return k();
  const GoalNode node = goals_[static_cast<std::size_t>(goal)];
  ++steps_;

  std::vector<Term> args;
  args.reserve(node.atom->args.size());
  bool ground = true;
  for (Term t : node.atom->args) {
    Term r = resolve(t, node.offset);
    ground = ground && !r.is_variable();
    args.push_back(r);
  }

  if (ground && options_.table_ground_goals) {
    GroundKey key{node.atom->name, node.depth, args};
    bool provable;
    if (auto it = table_.find(key); it != table_.end()) {
      provable = it->second;
    } else {
      provable = prove_ground_isolated(node);
      table_.emplace(std::move(key), provable);
    }
    return provable && solve_goals(node.next, k);
  }

  if (try_rules(node, args, k)) return true;
  return try_facts(node, args, k);
}

bool Solver::prove_ground_isolated(const GoalNode& node) {
  const std::size_t trail_mark = trail_.size();
  const std::size_t goals_mark = goals_.size();
  const std::uint32_t slot_mark = next_slot_;

  GoalNode alone = node;
  alone.next = -1;
  goals_.push_back(alone);
  const auto index = static_cast<std::int32_t>(goals_.size() - 1);

  std::vector<Term> args;
  for (Term t : node.atom->args) args.push_back(resolve(t, node.offset));
  bool found = false;
  const Continuation done = [&found]() {
    found = true;
    return true;
  };
  if (!try_rules(goals_[index], args, done)) try_facts(goals_[index], args, done);

  undo(trail_mark);
  goals_.resize(goals_mark);
  next_slot_ = slot_mark;
  return found;
}

bool Solver::try_rules(const GoalNode& node_ref, const std::vector<Term>& args,
                       const Continuation& k) {
  const GoalNode node = node_ref;
  auto it = rules_.find(node.atom->predicate());
  if (it == rules_.end()) return false;
  for (const Clause* c : it->second) {
    if (!c->body.empty() && node.depth < 1) continue;
    const std::size_t trail_mark = trail_.size();
    const std::size_t goals_mark = goals_.size();
    const std::uint32_t slot_mark = next_slot_;
    const std::uint32_t offset = allocate(c->var_count());

    bool ok = true;
    for (std::size_t i = 0; i < args.size() && ok; ++i)
      ok = unify_terms(args[i], resolve(c->head.args[i], offset));
    bool stop = false;
    if (ok) {
      std::int32_t next = node.next;
      for (auto b = c->body.rbegin(); b != c->body.rend(); ++b) {
        goals_.push_back(GoalNode{&*b, offset, node.depth - 1, next});
        next = static_cast<std::int32_t>(goals_.size() - 1);
      }
      stop = solve_goals(next, k);
    }
    undo(trail_mark);
    goals_.resize(goals_mark);
    next_slot_ = slot_mark;
    if (stop) return true;
  }
  return false;
}

bool Solver::try_facts(const GoalNode& node_ref, const std::vector<Term>& args,
                       const Continuation& k) {
  const GoalNode node = node_ref;
  const Predicate pred = node.atom->predicate();
  for (const FactSet* facts : kb_.facts) {
    std::span<const std::uint32_t> candidates;
    bool indexed = false;
    if (!(options_.bind_placeholders && facts->has_placeholders(pred))) {
      for (std::uint32_t i = 0; i < args.size(); ++i) {
        Term a = deref(args[i]);
        if (!a.is_variable()) {
          candidates = facts->lookup(pred, i, a);
          indexed = true;
          break;
        }
      }
    }
    if (!indexed) candidates = facts->lookup(pred);

    for (std::uint32_t index : candidates) {
      const Atom& fact = facts->atoms()[index];
      const std::size_t trail_mark = trail_.size();
      const std::uint32_t slot_mark = next_slot_;
      bool ok = true;
      for (std::size_t i = 0; i < args.size() && ok; ++i) {
        Term value = fact.args[i];
        if (value.is_placeholder() && options_.bind_placeholders) {
          // A fresh variable per use, shared only within this fact.
          std::size_t first = 0;
          while (fact.args[first] != value) ++first;
          value = first < i ? deref(args[first]) : Term::variable(allocate(1));
        }
        ok = unify_terms(args[i], value);
      }
      const bool stop = ok && solve_goals(node.next, k);
      undo(trail_mark);
      next_slot_ = slot_mark;
      if (stop) return true;
    }
  }
  return false;
}

std::vector<Substitution> prove(const KnowledgeBase& kb, const Atom& goal, int depth_limit,
                                SolverOptions options) {
  options.depth_limit = depth_limit;
  Solver solver(kb, options);
  std::uint32_t vars = 0;
  for (Term t : goal.args)
    if (t.is_variable()) vars = std::max(vars, t.id() + 1);
  return solver.all_answers(std::span<const Atom>(&goal, 1), vars);
}

}  // namespace tdassist::logic
