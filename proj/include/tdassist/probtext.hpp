#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdassist::probtext {

// OCR output for one character position: Unicode scalar value -> probability.
// Entries keep their input order. Mass may sum to slightly under one when the
// OCR engine drops its tail.
class CharDistribution {
 public:
  CharDistribution() = default;
  // Validates: at least one entry, probabilities in (0,1], sum <= 1 + 1e-9,
  // no repeated characters.
  explicit CharDistribution(std::vector<std::pair<char32_t, double>> entries);

  const std::vector<std::pair<char32_t, double>>& entries() const { return entries_; }
  double probability(char32_t ch) const;
  bool contains(char32_t ch) const;
  double total() const;
  char32_t argmax() const;

  friend bool operator==(const CharDistribution&, const CharDistribution&) = default;

 private:
  std::vector<std::pair<char32_t, double>> entries_;
};

struct ProbString {
  std::vector<CharDistribution> positions;

  std::size_t length() const { return positions.size(); }
  std::string argmax_string() const;

  friend bool operator==(const ProbString&, const ProbString&) = default;
};

struct EditPenalties {
  double p_insert = 0.3;
  double p_delete = 0.3;
  double p_substitute = 0.3;

  void validate() const;
};

// Max-product (Viterbi) edit lattice between a candidate string and an OCR
// observation. Reading row r = candidate position, column c = observed
// position, with S(-1,-1) = 1 and every other cell on row -1 or column -1
// unreachable:
//   S(r,c) = max( p_delete     * S(r-1, c),
//                 p_insert     * S(r, c-1),
//                 max_x P_c(x) * (x == cand[r] ? 1 : p_substitute) * S(r-1, c-1) )
// Returns S(|cand|-1, |obs|-1).
double prob_levenshtein(std::u32string_view candidate, const ProbString& obs,
                        const EditPenalties& pen = {});
double prob_levenshtein(std::string_view candidate_utf8, const ProbString& obs,
                        const EditPenalties& pen = {});

struct Match {
  std::string candidate;
  double score = 0.0;
};

// Scores every candidate; descending score, ties in lexicographic order.
std::vector<Match> best_match(const std::vector<std::string>& candidates, const ProbString& obs,
                              const EditPenalties& pen = {});

// Bayes revision of a prior by uncertain evidence over the shared support.
// Throws ValidationError("no-overlap") when the supports are disjoint.
CharDistribution virtual_evidence_posterior(const CharDistribution& prior,
                                            const CharDistribution& ocr);

using CharClass = std::function<bool(char32_t)>;

// Weight `ratio` for characters of the class and 1 otherwise, normalized over
// the OCR support (in the order given).
CharDistribution type_prior(const std::vector<char32_t>& ocr_support, const CharClass& char_class,
                            double ratio = 8.0);

// Named classes: "digit", "upper_alpha", "alnum". Throws ConfigError otherwise.
CharClass char_class(std::string_view name);

// Applies the type prior position by position and returns the argmax string.
std::string correct_with_type(const ProbString& obs, const CharClass& cls, double ratio = 8.0);

// UTF-8 helpers. Invalid sequences raise ParseError.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);
std::string utf8_encode(char32_t ch);

}  // namespace tdassist::probtext
