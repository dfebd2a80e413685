#include "tdassist/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "tdassist/error.hpp"
#include "tdassist/logic/syntax.hpp"

namespace tdassist::patterns {

using logic::Atom;
using logic::Term;

std::uint32_t Pattern::var_count() const {
  std::uint32_t n = 0;
  for (const auto& l : literals)
    for (Term t : l.args)
      if (t.is_variable()) n = std::max(n, t.id() + 1);
  return n;
}

std::string Pattern::to_string() const { return logic::conjunction_to_string(literals); }

std::string canonical_form(const Pattern& p) {
  return logic::conjunction_to_string(logic::canonical_conjunction(p.literals));
}

Pattern parse_pattern(std::string_view text) { return Pattern{logic::parse_conjunction(text)}; }

bool connected(const Pattern& p) {
  std::set<std::uint32_t> seen;
  for (std::size_t i = 0; i < p.literals.size(); ++i) {
    bool shares = i == 0;
    for (Term t : p.literals[i].args)
      if (t.is_variable() && seen.contains(t.id())) shares = true;
    if (!shares) return false;
    for (Term t : p.literals[i].args)
      if (t.is_variable()) seen.insert(t.id());
  }
  return true;
}

bool operator==(const PatternSet& a, const PatternSet& b) {
  if (a.corpus_size != b.corpus_size || a.patterns.size() != b.patterns.size()) return false;
  for (std::size_t i = 0; i < a.patterns.size(); ++i)
    if (a.patterns[i].key != b.patterns[i].key || a.patterns[i].support != b.patterns[i].support)
      return false;
  return true;
}

std::string to_text(const PatternSet& s) {
  std::string out = "# corpus " + std::to_string(s.corpus_size) + "\n";
  for (const auto& p : s.patterns) out += std::to_string(p.support) + "\t" + p.key + "\n";
  return out;
}

PatternSet parse_pattern_set(std::string_view text) {
  PatternSet s;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# corpus ", 0) == 0) {
      s.corpus_size = std::stoul(line.substr(9));
      continue;
    }
    if (line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("pattern set line " + std::to_string(line_no) + ": expected '<support>\\t<pattern>'");
    MinedPattern m;
    try {
      m.support = std::stoi(line.substr(0, tab));
    } catch (const std::exception&) {
      throw ParseError("pattern set line " + std::to_string(line_no) + ": bad support");
    }
    m.pattern = parse_pattern(line.substr(tab + 1));
    m.key = canonical_form(m.pattern);
    s.patterns.push_back(std::move(m));
  }
  return s;
}

namespace {

logic::KnowledgeBase knowledge_base(const Evidence& e) {
  logic::KnowledgeBase kb;
  if (e.facts) kb.facts.push_back(e.facts);
  if (e.programs) kb.programs.push_back(e.programs);
  return kb;
}

}  // namespace

bool pattern_holds(const Pattern& p, const Evidence& e, int depth) {
  logic::SolverOptions opts;
  opts.depth_limit = depth;
  logic::Solver solver(knowledge_base(e), opts);
  return solver.exists(p.literals, p.var_count());
}

int support_threshold(double min_support_frac, std::size_t n) {
  if (!(min_support_frac >= 0.0 && min_support_frac <= 1.0))
    throw ConfigError("min_support_frac must lie in [0,1]");
  const int t = static_cast<int>(std::ceil(min_support_frac * static_cast<double>(n) - 1e-9));
  return std::max(1, t);
}

namespace {

// The mode governing a literal: same predicate, constants exactly in '#' slots.
const ilp::ModeDecl* mode_of(const Atom& lit, const std::vector<const ilp::ModeDecl*>& modes) {
  for (const auto* m : modes) {
    if (m->predicate != lit.name_str() || m->args.size() != lit.args.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < lit.args.size() && ok; ++i)
      ok = (m->args[i].mode == ilp::ArgMode::Constant) == lit.args[i].is_constant();
    if (ok) return m;
  }
  return nullptr;
}

class Miner {
 public:
  Miner(const std::vector<Evidence>& corpus, const ilp::Bias& bias, const MiningParams& params)
      : corpus_(corpus), modes_(bias.body_modes()), params_(params) {
    logic::SolverOptions opts;
    opts.depth_limit = params.proof_depth;
    for (const auto& e : corpus) solvers_.push_back(std::make_unique<logic::Solver>(knowledge_base(e), opts));
    threshold_ = support_threshold(params.min_support_frac, corpus.size());
    collect_constants();
  }

  PatternSet run() {
    PatternSet out;
    out.corpus_size = corpus_.size();
    std::vector<std::size_t> everyone(corpus_.size());
    for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;

    std::vector<Frequent> level;
    for (std::size_t m = 0; m < modes_.size(); ++m)
      for (const auto& lit : literals_for(m, {}, 0, /*require_shared=*/false))
        consider(Pattern{{lit}}, everyone, level);
    while (!level.empty()) {
      std::sort(level.begin(), level.end(),
                [](const Frequent& a, const Frequent& b) { return a.mined.key < b.mined.key; });
      for (const auto& f : level) out.patterns.push_back(f.mined);
      if (static_cast<int>(level.front().mined.pattern.literals.size()) >= params_.max_literals)
        break;
      std::vector<Frequent> next;
      for (const auto& f : level) extend(f, next);
      level = std::move(next);
    }
    return out;
  }

 private:
  struct Frequent {
    MinedPattern mined;
    std::vector<std::size_t> holds_in;
  };

  void collect_constants() {
    constants_.resize(modes_.size());
    for (std::size_t m = 0; m < modes_.size(); ++m) {
      const auto* mode = modes_[m];
      constants_[m].resize(mode->args.size());
      Atom goal(mode->predicate, {});
      for (std::uint32_t i = 0; i < mode->args.size(); ++i) goal.args.push_back(Term::variable(i));
      std::vector<std::map<Term, int>> df(mode->args.size());
      for (auto& solver : solvers_) {
        std::vector<std::set<Term>> here(mode->args.size());
        solver->solve(std::span<const Atom>(&goal, 1), static_cast<std::uint32_t>(goal.args.size()),
                      [&](std::span<const std::optional<Term>> ans) {
                        for (std::size_t i = 0; i < ans.size(); ++i)
                          if (ans[i] && ans[i]->is_constant()) here[i].insert(*ans[i]);
                        return false;
                      });
        for (std::size_t i = 0; i < here.size(); ++i)
          for (Term t : here[i]) ++df[i][t];
      }
      for (std::size_t i = 0; i < mode->args.size(); ++i) {
        if (mode->args[i].mode != ilp::ArgMode::Constant) continue;
        for (const auto& [t, n] : df[i])
          if (n >= threshold_) constants_[m][i].push_back(t);
      }
    }
  }

  // Literals of mode m whose variable slots take an existing variable of the
  // right type (from `types`) or a fresh one; constant slots take frequent
  // constants. With require_shared, at least one slot reuses a variable.
  std::vector<Atom> literals_for(std::size_t m, const std::map<std::uint32_t, std::string>& types,
                                 std::uint32_t next_var, bool require_shared) const {
    const auto* mode = modes_[m];
    std::vector<Atom> out;
    std::vector<Term> args;
    std::function<void(std::size_t, std::uint32_t, bool)> fill = [&](std::size_t i,
                                                                     std::uint32_t fresh,
                                                                     bool shared) {
      if (i == mode->args.size()) {
        if (shared || !require_shared) out.push_back(Atom(mode->predicate, args));
        return;
      }
      const auto& slot = mode->args[i];
      if (slot.mode == ilp::ArgMode::Constant) {
        for (Term c : constants_[m][i]) {
          args.push_back(c);
          fill(i + 1, fresh, shared);
          args.pop_back();
        }
        return;
      }
      for (const auto& [v, type] : types) {
        if (type != slot.type) continue;
        args.push_back(Term::variable(v));
        fill(i + 1, fresh, true);
        args.pop_back();
      }
      args.push_back(Term::variable(fresh));
      fill(i + 1, fresh + 1, shared);
      args.pop_back();
    };
    fill(0, next_var, false);
    return out;
  }

  std::map<std::uint32_t, std::string> variable_types(const Pattern& p) const {
    std::map<std::uint32_t, std::string> types;
    for (const auto& lit : p.literals) {
      const auto* m = mode_of(lit, modes_);
      if (!m) continue;
      for (std::size_t i = 0; i < lit.args.size(); ++i)
        if (lit.args[i].is_variable()) types.emplace(lit.args[i].id(), m->args[i].type);
    }
    return types;
  }

  void extend(const Frequent& parent, std::vector<Frequent>& next) {
    const auto& p = parent.mined.pattern;
    const auto types = variable_types(p);
    for (std::size_t m = 0; m < modes_.size(); ++m) {
      for (auto& lit : literals_for(m, types, p.var_count(), /*require_shared=*/true)) {
        if (std::find(p.literals.begin(), p.literals.end(), lit) != p.literals.end()) continue;
        Pattern child = p;
        child.literals.push_back(std::move(lit));
        consider(std::move(child), parent.holds_in, next);
      }
    }
  }

  void consider(Pattern p, const std::vector<std::size_t>& candidates, std::vector<Frequent>& out) {
    if (params_.candidate_limit && evaluated_ >= params_.candidate_limit) return;
    Pattern canon{logic::canonical_conjunction(p.literals)};
    std::string key = logic::conjunction_to_string(canon.literals);
    if (!seen_.insert(key).second) return;
    ++evaluated_;
    std::vector<std::size_t> holds;
    for (auto d : candidates)
      if (solvers_[d]->exists(canon.literals, canon.var_count())) holds.push_back(d);
    if (static_cast<int>(holds.size()) < threshold_) return;
    Frequent f;
    f.mined.support = static_cast<int>(holds.size());
    f.mined.key = std::move(key);
    f.mined.pattern = std::move(canon);
    f.holds_in = std::move(holds);
    out.push_back(std::move(f));
  }

  const std::vector<Evidence>& corpus_;
  std::vector<const ilp::ModeDecl*> modes_;
  MiningParams params_;
  std::vector<std::unique_ptr<logic::Solver>> solvers_;
  int threshold_ = 1;
  std::vector<std::vector<std::vector<Term>>> constants_;  // mode -> slot -> values
  std::set<std::string> seen_;
  std::size_t evaluated_ = 0;
};

}  // namespace

PatternSet mine(const std::vector<Evidence>& corpus, const ilp::Bias& bias,
                const MiningParams& params) {
  if (bias.body_modes().empty()) throw ConfigError("mining bias declares no predicates");
  if (corpus.empty()) throw ValidationError("cannot mine an empty corpus");
  if (params.max_literals < 1) throw ConfigError("max_literals must be at least 1");
  return Miner(corpus, bias, params).run();
}

FeatureVector vectorize(const Evidence& e, const PatternSet& patterns, int depth) {
  logic::SolverOptions opts;
  opts.depth_limit = depth;
  logic::Solver solver(knowledge_base(e), opts);
  FeatureVector out;
  out.reserve(patterns.size());
  for (const auto& p : patterns.patterns)
    out.push_back(solver.exists(p.pattern.literals, p.pattern.var_count()));
  return out;
}

}  // namespace tdassist::patterns
