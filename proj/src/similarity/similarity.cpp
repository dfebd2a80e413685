#include "tdassist/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "tdassist/drawing.hpp"
#include "tdassist/error.hpp"

namespace tdassist::similarity {

double sim_tabular(const FeatureVector& x, const FeatureVector& y) {
  if (x.size() != y.size())
    throw ValidationError("feature vectors differ in length (" + std::to_string(x.size()) +
                          " vs " + std::to_string(y.size()) + ")");
  if (x.empty()) throw ValidationError("feature vectors are empty");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < x.size(); ++i) diff += x[i] != y[i];
  return 1.0 - static_cast<double>(diff) / static_cast<double>(x.size());
}

void validate_visual(std::span<const double> v) {
  if (v.size() != drawing::kVisualDims)
    throw ValidationError("visual vector must have " + std::to_string(drawing::kVisualDims) +
                          " entries, got " + std::to_string(v.size()));
  bool nonzero = false;
  for (double e : v) {
    if (!std::isfinite(e)) throw ValidationError("visual vector has a non-finite entry");
    nonzero |= e != 0.0;
  }
  if (!nonzero) throw ValidationError("visual vector is all zero");
}

double sim_visual(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("visual vectors differ in length");
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ValidationError("visual vector has a non-finite entry");
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) throw ValidationError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), 0.0, 1.0);
}

double weighted_geometric_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty())
    throw ValidationError("values and weights must be nonempty and of equal length");
  double total = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw ValidationError("weights must be finite and non-negative");
    if (!(values[i] >= 0.0 && values[i] <= 1.0))
      throw ValidationError("values must lie in [0,1]");
    total += weights[i];
  }
  if (total <= 0.0) throw ValidationError("weights sum to zero");
  double out = 1.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    out *= std::pow(std::max(values[i], kFloor), weights[i] / total);
  return out;
}

double combined(double st, double sv, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0,1]");
  const double v[] = {st, sv};
  const double w[] = {alpha, 1.0 - alpha};
  return weighted_geometric_mean(v, w);
}

const char* to_string(TriState t) {
  switch (t) {
    case TriState::True:
      return "true";
    case TriState::False:
      return "false";
    case TriState::Unknown:
      return "unknown";
  }
  return "unknown";
}

namespace {

logic::KnowledgeBase knowledge_base(const patterns::Evidence& e) {
  logic::KnowledgeBase kb;
  if (e.facts) kb.facts.push_back(e.facts);
  if (e.programs) kb.programs.push_back(e.programs);
  return kb;
}

TriState evaluate_with(const patterns::Pattern& p, logic::Solver& opaque, logic::Solver* binding) {
  if (opaque.exists(p.literals, p.var_count())) return TriState::True;
  if (!binding || !binding->exists(p.literals, p.var_count())) return TriState::False;
  return TriState::Unknown;
}

}  // namespace

TriState evaluate_partial(const patterns::Pattern& p, const patterns::Evidence& e, int depth) {
  patterns::PatternSet s;
  s.patterns.push_back({p, {}, 0});
  return evaluate_partial(s, e, depth).front();
}

std::vector<TriState> evaluate_partial(const patterns::PatternSet& s, const patterns::Evidence& e,
                                       int depth) {
  logic::SolverOptions opts;
  opts.depth_limit = depth;
  logic::Solver opaque(knowledge_base(e), opts);
  std::optional<logic::Solver> binding;
  // Without placeholders binding changes nothing, so failure is final.
  if (e.facts && e.facts->has_placeholders()) {
    opts.bind_placeholders = true;
    binding.emplace(knowledge_base(e), opts);
  }
  std::vector<TriState> out;
  out.reserve(s.size());
  for (const auto& m : s.patterns)
    out.push_back(evaluate_with(m.pattern, opaque, binding ? &*binding : nullptr));
  return out;
}

double sim_partial(std::span<const TriState> partial, const FeatureVector& candidate) {
  if (partial.size() != candidate.size())
    throw ValidationError("feature vectors differ in length (" + std::to_string(partial.size()) +
                          " vs " + std::to_string(candidate.size()) + ")");
  std::size_t known = 0, diff = 0;
  for (std::size_t i = 0; i < partial.size(); ++i) {
    if (partial[i] == TriState::Unknown) continue;
    ++known;
    diff += (partial[i] == TriState::True) != candidate[i];
  }
  if (known == 0)
    throw ValidationError("no-informative-features", "every pattern is unknown for this query");
  return 1.0 - static_cast<double>(diff) / static_cast<double>(known);
}

std::vector<Score> rank(const Query& q, const std::vector<Candidate>& candidates, double alpha,
                        std::size_t k) {
  if (q.features.has_value() == q.partial.has_value())
    throw ValidationError("query needs exactly one of full or partial features");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0,1]");
  if (k == 0) throw ValidationError("k must be at least 1");
  if (candidates.empty()) throw ValidationError("the index is empty");
  if (q.visual) validate_visual(*q.visual);

  std::vector<Score> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    Score s;
    s.id = c.id;
    s.sim_tabular = q.features ? sim_tabular(*q.features, *c.features)
                               : sim_partial(*q.partial, *c.features);
    if (q.visual && c.visual) {
      s.sim_visual = sim_visual(*q.visual, *c.visual);
      s.combined = combined(s.sim_tabular, *s.sim_visual, alpha);
    } else {
      s.combined = s.sim_tabular;
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Score& a, const Score& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.id < b.id;
  });
  if (out.size() > k) out.resize(k);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

}  // namespace tdassist::similarity
