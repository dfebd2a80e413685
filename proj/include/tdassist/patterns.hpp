#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdassist/ilp.hpp"
#include "tdassist/logic/fact_set.hpp"
#include "tdassist/logic/solver.hpp"
#include "tdassist/logic/term.hpp"

namespace tdassist::patterns {

// Conjunctive query over extracted facts. Variables are numbered from 0.
struct Pattern {
  std::vector<logic::Atom> literals;

  std::uint32_t var_count() const;
  std::string to_string() const;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

// Same key iff the patterns are equal up to variable renaming and literal order.
std::string canonical_form(const Pattern& p);
Pattern parse_pattern(std::string_view text);

// Every literal after the first shares a variable with an earlier one.
bool connected(const Pattern& p);

struct MinedPattern {
  Pattern pattern;
  std::string key;
  int support = 0;
};

struct PatternSet {
  std::vector<MinedPattern> patterns;
  std::size_t corpus_size = 0;

  std::size_t size() const { return patterns.size(); }
  friend bool operator==(const PatternSet& a, const PatternSet& b);
};

// One pattern per line, "<support>\t<pattern>", preceded by a
// "# corpus <n>" line. Line order is the bit order of feature vectors.
std::string to_text(const PatternSet& s);
PatternSet parse_pattern_set(std::string_view text);

// Facts of one drawing together with the parser programs that may be
// called from patterns. Non-owning.
struct Evidence {
  const logic::FactSet* facts = nullptr;
  const logic::Program* programs = nullptr;
};

bool pattern_holds(const Pattern& p, const Evidence& e, int depth = 12);

struct MiningParams {
  double min_support_frac = 0.10;
  int max_literals = 6;
  int proof_depth = 12;
  // Stop after this many candidate evaluations per level (0 = unlimited).
  std::size_t candidate_limit = 0;
};

// Level-wise search. The bias's body modes give the allowed predicates:
// '+'/'-' slots hold typed variables, '#' slots hold constants.
PatternSet mine(const std::vector<Evidence>& corpus, const ilp::Bias& bias,
                const MiningParams& params = {});

using FeatureVector = std::vector<bool>;

FeatureVector vectorize(const Evidence& e, const PatternSet& patterns, int depth = 12);

// Minimum support count for a corpus of n drawings.
int support_threshold(double min_support_frac, std::size_t n);

}  // namespace tdassist::patterns
