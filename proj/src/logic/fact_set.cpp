#include "tdassist/logic/fact_set.hpp"

namespace tdassist::logic {

FactSet::FactSet(std::vector<Atom> atoms) {
  for (auto& a : atoms) add(std::move(a));
}

bool FactSet::add(Atom atom) {
  if (members_.contains(atom)) return false;
  auto index = static_cast<std::uint32_t>(atoms_.size());
  Predicate p = atom.predicate();
  by_predicate_[p].push_back(index);
  for (std::uint32_t i = 0; i < atom.args.size(); ++i) {
    Term t = atom.args[i];
    by_position_[PositionKey{p, i, t}].push_back(index);
    if (t.is_placeholder()) {
      placeholder_preds_.insert(p);
      placeholder_bound_ = std::max(placeholder_bound_, t.id() + 1);
    }
  }
  members_.insert(atom);
  atoms_.push_back(std::move(atom));
  return true;
}

void FactSet::merge(const FactSet& other) {
  for (const auto& a : other.atoms_) add(a);
}

std::span<const std::uint32_t> FactSet::lookup(Predicate p) const {
  auto it = by_predicate_.find(p);
  if (it == by_predicate_.end()) return {};
  return it->second;
}

std::span<const std::uint32_t> FactSet::lookup(Predicate p, std::uint32_t position,
                                               Term value) const {
  auto it = by_position_.find(PositionKey{p, position, value});
  if (it == by_position_.end()) return {};
  return it->second;
}

std::vector<Atom> FactSet::with_predicate(Predicate p) const {
  std::vector<Atom> out;
  for (auto i : lookup(p)) out.push_back(atoms_[i]);
  return out;
}

}  // namespace tdassist::logic
