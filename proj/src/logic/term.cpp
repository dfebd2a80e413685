#include "tdassist/logic/term.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

#include "tdassist/logic/syntax.hpp"

namespace tdassist::logic {

namespace {

struct SymbolStore {
  std::shared_mutex mutex;
  std::deque<std::string> names;
  std::unordered_map<std::string, std::uint32_t> ids;
};

SymbolStore& store() {
  static SymbolStore s;
  return s;
}

}  // namespace

std::uint32_t SymbolTable::intern(std::string_view name) {
  auto& s = store();
  {
    std::shared_lock lock(s.mutex);
    if (auto it = s.ids.find(std::string(name)); it != s.ids.end()) return it->second;
  }
  std::unique_lock lock(s.mutex);
  auto [it, inserted] = s.ids.emplace(std::string(name), static_cast<std::uint32_t>(s.names.size()));
  if (inserted) s.names.emplace_back(name);
  return it->second;
}

const std::string& SymbolTable::name(std::uint32_t id) {
  auto& s = store();
  std::shared_lock lock(s.mutex);
  if (id >= s.names.size()) throw std::out_of_range("unknown symbol id");
  return s.names[id];
}

std::string Predicate::to_string() const { return name_str() + "/" + std::to_string(arity); }

Predicate make_predicate(std::string_view name, std::uint32_t arity) {
  return Predicate{SymbolTable::intern(name), arity};
}

Atom::Atom(std::string_view predicate, std::vector<Term> arguments)
    : name(SymbolTable::intern(predicate)), args(std::move(arguments)) {}

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](Term t) { return t.is_variable(); });
}

bool Atom::has_placeholder() const {
  return std::any_of(args.begin(), args.end(), [](Term t) { return t.is_placeholder(); });
}

std::size_t AtomHash::operator()(const Atom& a) const noexcept {
  std::size_t h = a.name;
  for (Term t : a.args) h = h * 1000003u ^ TermHash{}(t);
  return h;
}

std::uint32_t Clause::var_count() const {
  std::uint32_t n = 0;
  auto scan = [&n](const Atom& a) {
    for (Term t : a.args)
      if (t.is_variable()) n = std::max(n, t.id() + 1);
  };
  scan(head);
  for (const auto& b : body) scan(b);
  return n;
}

std::size_t Program::literal_count() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.literal_count();
  return n;
}

std::vector<Predicate> Program::defined_predicates() const {
  std::vector<Predicate> out;
  for (const auto& c : clauses) {
    auto p = c.head.predicate();
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

Term apply(const Substitution& s, Term t) {
  // Chase chains so that {X->Y, Y->a} maps X to a.
  for (int guard = 0; t.is_variable() && guard < 1 << 16; ++guard) {
    auto it = s.find(t.id());
    if (it == s.end() || it->second == t) break;
    t = it->second;
  }
  return t;
}

Atom apply(const Substitution& s, const Atom& a) {
  Atom out = a;
  for (auto& t : out.args) t = apply(s, t);
  return out;
}

namespace {

std::string render_renamed(const Atom* head, const std::vector<const Atom*>& body) {
  std::unordered_map<std::uint32_t, std::uint32_t> rename;
  auto fix = [&rename](const Atom& a) {
    Atom c = a;
    for (auto& t : c.args) {
      if (!t.is_variable()) continue;
      auto [it, _] = rename.emplace(t.id(), static_cast<std::uint32_t>(rename.size()));
      t = Term::variable(it->second);
    }
    return to_string(c);
  };
  std::string out = head ? fix(*head) : std::string();
  for (const Atom* b : body) out += "|" + fix(*b);
  return out;
}

std::string anonymized(const Atom& a) {
  Atom c = a;
  for (auto& t : c.args)
    if (t.is_variable()) t = Term::variable(0);
  return to_string(c);
}

}  // namespace

Clause normalize_variables(const Clause& c) {
  std::unordered_map<std::uint32_t, std::uint32_t> rename;
  auto fix = [&rename](Atom a) {
    for (auto& t : a.args) {
      if (!t.is_variable()) continue;
      auto [it, _] = rename.emplace(t.id(), static_cast<std::uint32_t>(rename.size()));
      t = Term::variable(it->second);
    }
    return a;
  };
  Clause out;
  out.head = fix(c.head);
  for (const auto& b : c.body) out.body.push_back(fix(b));
  return out;
}

namespace {

// Orders `body` so that the renamed rendering is lexicographically least.
// Literals are grouped by their variable-blind rendering and only permuted
// within a group. Past `budget` renderings the search stops early, which
// keeps the result deterministic but possibly not canonical for very
// symmetric inputs.
std::vector<const Atom*> least_order(const Atom* head, std::vector<const Atom*> body) {
  std::vector<std::string> anon;
  std::vector<std::size_t> idx(body.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (const Atom* b : body) anon.push_back(anonymized(*b));
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return anon[x] < anon[y]; });
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) into idx
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i + 1;
    while (j < idx.size() && anon[idx[j]] == anon[idx[i]]) ++j;
    if (j - i > 1) groups.emplace_back(i, j);
    i = j;
  }

  auto render = [&] {
    std::vector<const Atom*> order;
    for (auto i : idx) order.push_back(body[i]);
    return std::make_pair(render_renamed(head, order), order);
  };
  auto [best_key, best] = render();
  int budget = 40320;
  // Odometer over the permutations of every group.
  std::function<void(std::size_t)> walk = [&](std::size_t g) {
    if (budget <= 0) return;
    if (g == groups.size()) {
      --budget;
      auto [key, order] = render();
      if (key < best_key) {
        best_key = std::move(key);
        best = std::move(order);
      }
      return;
    }
    auto first = idx.begin() + static_cast<std::ptrdiff_t>(groups[g].first);
    auto last = idx.begin() + static_cast<std::ptrdiff_t>(groups[g].second);
    std::sort(first, last);
    do {
      walk(g + 1);
    } while (budget > 0 && std::next_permutation(first, last));
  };
  walk(0);
  return best;
}

}  // namespace

std::string clause_variant_key(const Clause& c) {
  std::vector<const Atom*> body;
  for (const auto& b : c.body) body.push_back(&b);
  return render_renamed(&c.head, least_order(&c.head, std::move(body)));
}

std::vector<Atom> canonical_conjunction(const std::vector<Atom>& atoms) {
  std::vector<const Atom*> body;
  for (const auto& a : atoms) body.push_back(&a);
  std::unordered_map<std::uint32_t, std::uint32_t> rename;
  std::vector<Atom> out;
  for (const Atom* a : least_order(nullptr, std::move(body))) {
    Atom c = *a;
    for (auto& t : c.args) {
      if (!t.is_variable()) continue;
      auto [it, _] = rename.emplace(t.id(), static_cast<std::uint32_t>(rename.size()));
      t = Term::variable(it->second);
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool equivalent_programs(const Program& a, const Program& b) {
  std::multiset<std::string> ka, kb;
  for (const auto& c : a.clauses) ka.insert(clause_variant_key(c));
  for (const auto& c : b.clauses) kb.insert(clause_variant_key(c));
  return ka == kb;
}

}  // namespace tdassist::logic
