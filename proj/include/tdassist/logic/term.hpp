#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tdassist::logic {

// Process-wide interning of constant and predicate names. Thread-safe.
class SymbolTable {
 public:
  static std::uint32_t intern(std::string_view name);
  static const std::string& name(std::uint32_t id);
};

// A first-order term: no function symbols, so a term is either a constant
// (symbol or integer) or a variable. Placeholders are the open cell texts of
// partial designs; they are variables of the fact base rather than of a
// clause, and the solver decides per query whether they may be bound.
class Term {
 public:
  enum class Kind : std::uint8_t { Symbol, Integer, Variable, Placeholder };

  constexpr Term() = default;

  static Term symbol(std::string_view name) {
    return Term(Kind::Symbol, SymbolTable::intern(name));
  }
  static constexpr Term symbol_id(std::uint32_t id) { return Term(Kind::Symbol, id); }
  static constexpr Term integer(std::int64_t v) { return Term(Kind::Integer, v); }
  static constexpr Term variable(std::uint32_t id) { return Term(Kind::Variable, id); }
  static constexpr Term placeholder(std::uint32_t id) { return Term(Kind::Placeholder, id); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_variable() const { return kind_ == Kind::Variable; }
  constexpr bool is_placeholder() const { return kind_ == Kind::Placeholder; }
  constexpr bool is_constant() const {
    return kind_ == Kind::Symbol || kind_ == Kind::Integer;
  }
  constexpr std::int64_t value() const { return value_; }
  constexpr std::uint32_t id() const { return static_cast<std::uint32_t>(value_); }

  const std::string& symbol_name() const { return SymbolTable::name(id()); }

  friend constexpr bool operator==(const Term&, const Term&) = default;
  friend constexpr auto operator<=>(const Term&, const Term&) = default;

 private:
  constexpr Term(Kind k, std::int64_t v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::Symbol;
  std::int64_t value_ = 0;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    return std::hash<std::int64_t>{}(t.value()) * 31u + static_cast<std::size_t>(t.kind());
  }
};

struct Predicate {
  std::uint32_t name = 0;
  std::uint32_t arity = 0;

  const std::string& name_str() const { return SymbolTable::name(name); }
  std::string to_string() const;  // "name/arity"

  friend bool operator==(const Predicate&, const Predicate&) = default;
  friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

struct PredicateHash {
  std::size_t operator()(const Predicate& p) const noexcept {
    return (static_cast<std::size_t>(p.name) << 8) ^ p.arity;
  }
};

Predicate make_predicate(std::string_view name, std::uint32_t arity);

struct Atom {
  std::uint32_t name = 0;
  std::vector<Term> args;

  Atom() = default;
  Atom(std::string_view predicate, std::vector<Term> arguments);
  Atom(std::uint32_t predicate_id, std::vector<Term> arguments)
      : name(predicate_id), args(std::move(arguments)) {}

  Predicate predicate() const {
    return Predicate{name, static_cast<std::uint32_t>(args.size())};
  }
  const std::string& name_str() const { return SymbolTable::name(name); }

  // No clause variables. Placeholders do not count as variables here.
  bool is_ground() const;
  bool has_placeholder() const;

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const noexcept;
};

// Definite clause. Variables are numbered 0..var_count()-1 within the clause.
struct Clause {
  Atom head;
  std::vector<Atom> body;

  std::uint32_t var_count() const;
  std::size_t literal_count() const { return 1 + body.size(); }

  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Program {
  std::vector<Clause> clauses;

  std::size_t literal_count() const;
  // Predicates defined (appearing in some clause head).
  std::vector<Predicate> defined_predicates() const;

  friend bool operator==(const Program&, const Program&) = default;
};

// Variable id -> bound term.
using Substitution = std::map<std::uint32_t, Term>;

Term apply(const Substitution& s, Term t);
Atom apply(const Substitution& s, const Atom& a);

// Renumbers variables by first occurrence (head first, then body in order).
Clause normalize_variables(const Clause& c);

// Renders the clause with variables renamed in first-occurrence order and
// body literals in a canonical order, so two clauses that are equal up to
// variable renaming and body-literal order produce the same key.
std::string clause_variant_key(const Clause& c);
bool equivalent_programs(const Program& a, const Program& b);

// The same ordering and renaming for a bare conjunction: variables are
// renumbered from 0 in first-occurrence order of the returned literals.
std::vector<Atom> canonical_conjunction(const std::vector<Atom>& atoms);

}  // namespace tdassist::logic
