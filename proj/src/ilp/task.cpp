#include <algorithm>
#include <set>

#include "tdassist/error.hpp"
#include "tdassist/ilp.hpp"

namespace tdassist::ilp {

using logic::Atom;
using logic::Term;

void SearchParams::validate() const {
  if (proof_depth < 1 || max_clause_len < 1 || node_bound < 1 || noise < 0 || var_depth < 1 ||
      saturation_cap < 1 || recall < 1)
    throw ConfigError("search parameters must be positive (noise non-negative)");
}

Corpus Corpus::build(std::vector<drawing::Drawing> drawings,
                     const drawing::AdjacencyParams& adjacency) {
  Corpus c;
  for (auto& d : drawings) {
    c.backgrounds.push_back(
        std::make_shared<const logic::FactSet>(drawing::background_facts(d, adjacency)));
    c.drawings.push_back(std::move(d));
  }
  return c;
}

void LearningTask::validate() const {
  params.validate();
  if (!head.head || head.pred() != target)
    throw ConfigError("head mode does not match target " + target.to_string());
  if (bias.body_modes().empty()) throw ConfigError("bias declares no body modes");
  std::set<Example> pos(positives.begin(), positives.end());
  for (const auto& e : negatives)
    if (pos.contains(e)) throw ValidationError("example is both positive and negative");
  for (const auto* set : {&positives, &negatives})
    for (const auto& e : *set) {
      if (e.drawing >= backgrounds.size())
        throw ValidationError("example refers to a missing drawing");
      if (e.atom.predicate() != target)
        throw ValidationError("example predicate differs from the target");
    }
}

namespace {

Atom make_example_atom(const std::string& label, const ModeDecl& head,
                       const drawing::LabelRef& ref) {
  std::vector<Term> args;
  for (const auto& a : head.args) {
    if (a.type == "cell") {
      args.push_back(Term::symbol(ref.cell));
    } else if (a.type == "index") {
      if (!ref.index)
        throw ValidationError("label '" + label + "' on cell '" + ref.cell + "' lacks an index");
      args.push_back(Term::integer(*ref.index));
    } else {
      throw ConfigError("head mode argument type '" + a.type + "' cannot be filled from labels");
    }
  }
  return Atom(label, std::move(args));
}

}  // namespace

std::vector<Example> label_examples(const drawing::Drawing& d, std::size_t drawing_index,
                                    const std::string& label, const ModeDecl& head) {
  std::vector<Example> out;
  auto it = d.labels.find(label);
  if (it == d.labels.end()) return out;
  std::set<Atom> seen;
  for (const auto& ref : it->second) {
    Atom a = make_example_atom(label, head, ref);
    if (seen.insert(a).second) out.push_back(Example{std::move(a), drawing_index});
  }
  return out;
}

std::vector<Example> example_universe(const drawing::Drawing& d, std::size_t drawing_index,
                                      const std::string& label, const ModeDecl& head) {
  std::int64_t max_index = 0;
  if (auto it = d.labels.find(label); it != d.labels.end())
    for (const auto& r : it->second)
      if (r.index) max_index = std::max(max_index, *r.index);

  std::vector<std::vector<Term>> domains;
  for (const auto& a : head.args) {
    std::vector<Term> dom;
    if (a.type == "cell") {
      for (const auto& c : d.cells) dom.push_back(Term::symbol(c.id));
    } else if (a.type == "index") {
      for (std::int64_t i = 0; i <= max_index; ++i) dom.push_back(Term::integer(i));
    } else {
      throw ConfigError("head mode argument type '" + a.type + "' has no finite domain");
    }
    domains.push_back(std::move(dom));
  }

  std::vector<Example> out;
  std::vector<std::size_t> pick(domains.size(), 0);
  if (std::any_of(domains.begin(), domains.end(), [](const auto& dm) { return dm.empty(); }))
    return out;
  while (true) {
    std::vector<Term> args;
    for (std::size_t i = 0; i < domains.size(); ++i) args.push_back(domains[i][pick[i]]);
    out.push_back(Example{Atom(label, std::move(args)), drawing_index});
    std::size_t k = domains.size();
    while (k > 0) {
      --k;
      if (++pick[k] < domains[k].size()) break;
      pick[k] = 0;
      if (k == 0) return out;
    }
    if (domains.empty()) return out;
  }
}

std::vector<Example> derive_negatives(const std::vector<Example>& universe,
                                      const std::vector<Example>& positives) {
  std::set<Example> pos(positives.begin(), positives.end());
  std::vector<Example> out;
  for (const auto& e : universe)
    if (!pos.contains(e)) out.push_back(e);
  return out;
}

LearningTask make_task(const Corpus& corpus, const std::string& label, const Bias& bias,
                       const SearchParams& params, const logic::Program& background_program) {
  const ModeDecl* head = bias.head_mode(label);
  if (!head) throw ConfigError("bias has no head mode for '" + label + "'");
  LearningTask t;
  t.target = head->pred();
  t.head = *head;
  t.bias = bias;
  t.params = params;
  t.backgrounds = corpus.backgrounds;
  t.background_program = background_program;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto pos = label_examples(corpus.drawings[i], i, label, *head);
    auto neg = derive_negatives(example_universe(corpus.drawings[i], i, label, *head), pos);
    t.positives.insert(t.positives.end(), pos.begin(), pos.end());
    t.negatives.insert(t.negatives.end(), neg.begin(), neg.end());
  }
  return t;
}

}  // namespace tdassist::ilp
