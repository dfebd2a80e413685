#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdassist/drawing.hpp"
#include "tdassist/logic/fact_set.hpp"
#include "tdassist/logic/term.hpp"

namespace tdassist::ilp {

// Mode declarations ------------------------------------------------------

enum class ArgMode : char { Input = '+', Output = '-', Constant = '#' };

struct ModeArg {
  ArgMode mode = ArgMode::Input;
  std::string type;

  friend bool operator==(const ModeArg&, const ModeArg&) = default;
};

struct ModeDecl {
  bool head = false;
  std::string predicate;
  std::vector<ModeArg> args;

  logic::Predicate pred() const;
  std::string to_string() const;  // "body above_below(+cell,-cell)"

  friend bool operator==(const ModeDecl&, const ModeDecl&) = default;
};

// One declaration per line: `head materials(+index,+cell)` or
// `body cell_contains(+cell,#token)`. '%' starts a comment.
struct Bias {
  std::vector<ModeDecl> modes;

  const ModeDecl* head_mode(const logic::Predicate& p) const;
  const ModeDecl* head_mode(std::string_view predicate) const;
  std::vector<const ModeDecl*> body_modes() const;
  // Appends the declaration unless an identical one is present.
  void add(ModeDecl m);
};

Bias parse_bias(std::string_view text);
std::string to_string(const Bias& b);

// Learning task -----------------------------------------------------------

struct SearchParams {
  int proof_depth = 12;
  int max_clause_len = 5;  // literals, head included
  int node_bound = 60000;
  int noise = 0;
  int var_depth = 2;  // layers of new variables during saturation
  int saturation_cap = 64;
  int recall = 64;  // answers taken per mode call during saturation

  void validate() const;
};

// A target atom together with the drawing whose facts it is judged against.
struct Example {
  logic::Atom atom;
  std::size_t drawing = 0;

  friend bool operator==(const Example&, const Example&) = default;
  friend auto operator<=>(const Example&, const Example&) = default;
};

// Labeled drawings plus the background facts derived from each.
struct Corpus {
  std::vector<drawing::Drawing> drawings;
  std::vector<std::shared_ptr<const logic::FactSet>> backgrounds;

  static Corpus build(std::vector<drawing::Drawing> drawings,
                      const drawing::AdjacencyParams& adjacency = {});
  std::size_t size() const { return drawings.size(); }
};

struct LearningTask {
  logic::Predicate target;
  ModeDecl head;
  std::vector<Example> positives;
  std::vector<Example> negatives;
  std::vector<std::shared_ptr<const logic::FactSet>> backgrounds;
  // Clauses added to the background (learned dependency programs).
  logic::Program background_program;
  Bias bias;
  SearchParams params;

  void validate() const;
};

// Target atoms for a label. Arguments are filled by head-mode type: "cell"
// takes the annotated cell, "index" the annotation index.
std::vector<Example> label_examples(const drawing::Drawing& d, std::size_t drawing_index,
                                    const std::string& label, const ModeDecl& head);

// Every candidate target atom of a drawing: all cells, indices
// 0..max annotated index (0 when the label is absent).
std::vector<Example> example_universe(const drawing::Drawing& d, std::size_t drawing_index,
                                      const std::string& label, const ModeDecl& head);

std::vector<Example> derive_negatives(const std::vector<Example>& universe,
                                      const std::vector<Example>& positives);

// Builds the task for `label` over the whole corpus. Throws ConfigError when
// the bias has no head mode for the label.
LearningTask make_task(const Corpus& corpus, const std::string& label, const Bias& bias,
                       const SearchParams& params, const logic::Program& background_program = {});

// Search ------------------------------------------------------------------

// Most specific clause for `seed`, built layer by layer from the mode
// declarations. The body keeps derivation order and is truncated at
// params.saturation_cap literals.
logic::Clause saturate(const Example& seed, const LearningTask& task);

struct ScoredClause {
  logic::Clause clause;
  int positives = 0;
  int negatives = 0;
  int score = 0;
  int nodes = 0;
};

// Best-first branch-and-bound over connected subsets of the bottom clause's
// body, scored by compression P - N - L + 1. Returns nullopt ("no-clause")
// when nothing covers a positive within the noise bound.
std::optional<ScoredClause> search_clause(const logic::Clause& bottom, const LearningTask& task);

struct Metrics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  Metrics& operator+=(const Metrics& o);
};

struct InductionResult {
  logic::Program program;
  Metrics training;
  int nodes = 0;
};

// Greedy cover loop. When `shuffle_seed` is set the positives are shuffled
// with that seed before the first seed example is picked.
InductionResult induce(const LearningTask& task,
                       std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Evaluation ----------------------------------------------------------------

struct DrawingErrors {
  std::string drawing;
  std::vector<logic::Atom> false_positives;
  std::vector<logic::Atom> false_negatives;
};

struct Evaluation {
  Metrics metrics;
  std::vector<DrawingErrors> per_drawing;
};

// Predictions are every provable target atom over each drawing's facts.
Evaluation evaluate(const logic::Program& program, const Corpus& corpus, const std::string& label,
                    const ModeDecl& head, int proof_depth = 12,
                    const logic::Program& background_program = {});

// All target atoms the program proves on one drawing, sorted.
std::vector<logic::Atom> predict(const logic::Program& program, const logic::FactSet& facts,
                                 const drawing::Drawing& d, const ModeDecl& head,
                                 int proof_depth = 12,
                                 const logic::Program& background_program = {});

}  // namespace tdassist::ilp
