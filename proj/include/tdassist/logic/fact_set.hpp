#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tdassist/logic/term.hpp"

namespace tdassist::logic {

// Extensional set of atoms in insertion order, indexed by predicate and by
// (predicate, argument position, value). Atoms are ground except for
// placeholders. Duplicates are ignored.
class FactSet {
 public:
  FactSet() = default;
  explicit FactSet(std::vector<Atom> atoms);

  // Returns false when the atom was already present.
  bool add(Atom atom);
  void merge(const FactSet& other);

  bool contains(const Atom& atom) const { return members_.contains(atom); }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const std::vector<Atom>& atoms() const { return atoms_; }

  std::span<const std::uint32_t> lookup(Predicate p) const;
  std::span<const std::uint32_t> lookup(Predicate p, std::uint32_t position, Term value) const;
  bool has_placeholders(Predicate p) const { return placeholder_preds_.contains(p); }
  bool has_placeholders() const { return !placeholder_preds_.empty(); }
  // One past the largest placeholder id used by any atom (0 if none).
  std::uint32_t placeholder_bound() const { return placeholder_bound_; }

  std::vector<Atom> with_predicate(Predicate p) const;

  friend bool operator==(const FactSet& a, const FactSet& b) { return a.atoms_ == b.atoms_; }

 private:
  struct PositionKey {
    Predicate predicate;
    std::uint32_t position;
    Term value;
    friend bool operator==(const PositionKey&, const PositionKey&) = default;
  };
  struct PositionKeyHash {
    std::size_t operator()(const PositionKey& k) const noexcept {
      return PredicateHash{}(k.predicate) * 1000003u + k.position * 7919u + TermHash{}(k.value);
    }
  };

  std::vector<Atom> atoms_;
  std::unordered_set<Atom, AtomHash> members_;
  std::unordered_map<Predicate, std::vector<std::uint32_t>, PredicateHash> by_predicate_;
  std::unordered_map<PositionKey, std::vector<std::uint32_t>, PositionKeyHash> by_position_;
  std::unordered_set<Predicate, PredicateHash> placeholder_preds_;
  std::uint32_t placeholder_bound_ = 0;
};

}  // namespace tdassist::logic
