#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tdassist/logic/fact_set.hpp"
#include "tdassist/logic/term.hpp"

namespace tdassist::logic {

// Most general unifier of two atoms sharing one variable namespace, with
// occurs check. Absent when the atoms do not unify.
std::optional<Substitution> unify(const Atom& a, const Atom& b);

// Rules and facts visible to a proof. Non-owning: the referenced fact sets
// and programs must outlive every Solver built over the knowledge base.
struct KnowledgeBase {
  std::vector<const FactSet*> facts;
  std::vector<const Program*> programs;
};

struct SolverOptions {
  // Maximum height of a derivation, counted in rule expansions. Matching a
  // fact or a body-less clause costs nothing.
  int depth_limit = 12;
  // When false, placeholders behave as opaque constants. When true, every
  // use of a fact turns its placeholders into fresh variables, so an open
  // cell may match any number of different tokens.
  bool bind_placeholders = false;
  // Memoize provability of ground goals per remaining depth.
  bool table_ground_goals = true;
};

// Depth-bounded SLD resolution. Enumerates answers depth-first: program
// clauses in order, then facts in insertion order. A Solver keeps its
// ground-goal table between queries, so reuse one per knowledge base.
// Not thread-safe; build one per thread.
class Solver {
 public:
  Solver(KnowledgeBase kb, SolverOptions options = {});

  // Variables of `goals` are numbered 0..var_count-1. `initial` optionally
  // pre-binds some of them (same indexing). The callback receives the value
  // of every query variable (nullopt when left unbound) and returns true to
  // stop the enumeration.
  using AnswerFn = std::function<bool(std::span<const std::optional<Term>>)>;
  void solve(std::span<const Atom> goals, std::uint32_t var_count, const AnswerFn& on_answer,
             std::span<const std::optional<Term>> initial = {});

  bool exists(std::span<const Atom> goals, std::uint32_t var_count,
              std::span<const std::optional<Term>> initial = {});

  // All distinct answer substitutions, in first-found order.
  std::vector<Substitution> all_answers(std::span<const Atom> goals, std::uint32_t var_count);

  // Number of resolution attempts since construction (diagnostics).
  std::uint64_t steps() const { return steps_; }

 private:
  struct Slot {
    bool bound = false;
    Term value;
  };
  struct GoalNode {
    const Atom* atom;
    std::uint32_t offset;  // clause-variable id -> slot offset
    int depth;
    std::int32_t next;
  };
  struct GroundKey {
    std::uint32_t name;
    int depth;
    std::vector<Term> args;
    friend bool operator==(const GroundKey&, const GroundKey&) = default;
  };
  struct GroundKeyHash {
    std::size_t operator()(const GroundKey& k) const noexcept;
  };
  using Continuation = std::function<bool()>;

  bool solve_goals(std::int32_t goal, const Continuation& k);
  bool try_rules(const GoalNode& node, const std::vector<Term>& args, const Continuation& k);
  bool try_facts(const GoalNode& node, const std::vector<Term>& args, const Continuation& k);
  bool prove_ground_isolated(const GoalNode& node);

  Term resolve(Term t, std::uint32_t offset) const;
  Term deref(Term t) const;
  bool unify_terms(Term a, Term b);
  void bind(std::uint32_t slot, Term value);
  void undo(std::size_t trail_mark);
  std::uint32_t allocate(std::uint32_t count);

  KnowledgeBase kb_;
  SolverOptions options_;
  std::unordered_map<Predicate, std::vector<const Clause*>, PredicateHash> rules_;

  std::vector<Slot> slots_;
  std::uint32_t next_slot_ = 0;
  std::vector<std::uint32_t> trail_;
  std::vector<GoalNode> goals_;
  std::unordered_map<GroundKey, bool, GroundKeyHash> table_;
  std::uint64_t steps_ = 0;
};

// Convenience: all answers for `goal` against `kb`.
std::vector<Substitution> prove(const KnowledgeBase& kb, const Atom& goal, int depth_limit,
                                SolverOptions options = {});

}  // namespace tdassist::logic
