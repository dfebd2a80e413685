#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdassist/patterns.hpp"

namespace tdassist::similarity {

using patterns::FeatureVector;

// 1 - normalized Hamming distance. Throws ValidationError on empty or
// mismatched vectors.
double sim_tabular(const FeatureVector& x, const FeatureVector& y);

// Cosine similarity clamped to [0,1]. Zero or non-finite vectors are rejected.
double sim_visual(std::span<const double> x, std::span<const double> y);

// Throws ValidationError unless v is finite, not all zero and of the
// expected length.
void validate_visual(std::span<const double> v);

// Values below this are raised to it before exponentiation.
inline constexpr double kFloor = 1e-6;

double weighted_geometric_mean(std::span<const double> values, std::span<const double> weights);

// st^alpha * sv^(1-alpha), through the floored geometric mean.
double combined(double st, double sv, double alpha = 0.5);

enum class TriState { False, True, Unknown };

const char* to_string(TriState t);

// True: provable with every placeholder held opaque. False: not provable
// even when placeholders may be bound. Unknown otherwise.
TriState evaluate_partial(const patterns::Pattern& p, const patterns::Evidence& e, int depth = 12);
std::vector<TriState> evaluate_partial(const patterns::PatternSet& s, const patterns::Evidence& e,
                                       int depth = 12);

// sim_tabular over the positions that are not Unknown. Throws
// ValidationError("no-informative-features") when every position is Unknown.
double sim_partial(std::span<const TriState> partial, const FeatureVector& candidate);

struct Candidate {
  std::string id;
  const FeatureVector* features = nullptr;
  const std::vector<double>* visual = nullptr;  // null when the design has none
};

struct Score {
  std::string id;
  double sim_tabular = 0.0;
  std::optional<double> sim_visual;
  double combined = 0.0;
  int rank = 0;

  friend bool operator==(const Score&, const Score&) = default;
};

// Query side of a ranking: full feature bits or three-valued ones.
struct Query {
  std::optional<FeatureVector> features;
  std::optional<std::vector<TriState>> partial;
  std::optional<std::vector<double>> visual;
};

// Descending combined score, ties by ascending id, ranks from 1. The visual
// term is used only when both query and candidate carry a vector.
std::vector<Score> rank(const Query& q, const std::vector<Candidate>& candidates, double alpha,
                        std::size_t k);

}  // namespace tdassist::similarity
