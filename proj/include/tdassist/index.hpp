#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tdassist/drawing.hpp"
#include "tdassist/ilp.hpp"
#include "tdassist/patterns.hpp"
#include "tdassist/similarity.hpp"

namespace tdassist::index {

inline constexpr int kFormatVersion = 1;

// Learned parser: the clauses plus the head modes that say how to
// enumerate each label's atoms.
struct ParserModel {
  logic::Program program;
  std::vector<ilp::ModeDecl> heads;
  int proof_depth = 12;

  friend bool operator==(const ParserModel&, const ParserModel&) = default;
};

// {"heads": ["materials(+index,+cell)", ...], "program": "<clauses>", "proof_depth": 12}
nlohmann::json to_json(const ParserModel& m);
ParserModel parser_from_json(const nlohmann::json& j);

struct IndexedDesign {
  std::string id;
  logic::FactSet facts;
  patterns::FeatureVector features;
  std::optional<std::vector<double>> visual;
  std::string digest;

  friend bool operator==(const IndexedDesign&, const IndexedDesign&) = default;
};

// SHA-256 (hex) of the drawing's canonical serialization.
std::string document_digest(const drawing::Drawing& d);

// Drawing facts plus every atom the parser proves on them.
logic::FactSet extract_facts(const drawing::Drawing& d, const ParserModel& parser);

class IndexLoader;

class DesignIndex {
 public:
  DesignIndex() = default;
  DesignIndex(patterns::PatternSet patterns, ParserModel parser);

  const patterns::PatternSet& patterns() const { return patterns_; }
  const ParserModel& parser() const { return parser_; }
  const std::map<std::string, IndexedDesign>& designs() const { return designs_; }
  std::size_t size() const { return designs_.size(); }
  // Bumped by every change.
  std::uint64_t revision() const { return revision_; }
  const IndexedDesign* find(const std::string& id) const;

  enum class AddOutcome { Added, Unchanged };
  // The drawing must be fully specified. Re-adding the same document is a
  // no-op; the same id with different content is a ConflictError.
  AddOutcome add_design(const drawing::Drawing& d);

  patterns::FeatureVector vectorize(const drawing::Drawing& d) const;
  std::vector<similarity::TriState> evaluate_partial(const drawing::Drawing& d) const;

  // rank_full needs a fully specified query; rank_partial accepts open cells.
  // rank picks the full path for fully specified queries.
  std::vector<similarity::Score> rank_full(const drawing::Drawing& q, double alpha,
                                           std::size_t k) const;
  std::vector<similarity::Score> rank_partial(const drawing::Drawing& q, double alpha,
                                              std::size_t k) const;
  std::vector<similarity::Score> rank(const drawing::Drawing& q, double alpha, std::size_t k) const;

  friend bool operator==(const DesignIndex&, const DesignIndex&) = default;

 private:
  friend class IndexLoader;

  std::vector<similarity::Score> rank_query(const similarity::Query& q, double alpha,
                                            std::size_t k) const;

  patterns::PatternSet patterns_;
  ParserModel parser_;
  std::map<std::string, IndexedDesign> designs_;
  std::uint64_t revision_ = 0;
};

// Mines the pattern set over the parsed corpus, then adds every drawing.
DesignIndex build_index(const std::vector<drawing::Drawing>& drawings, const ParserModel& parser,
                        const ilp::Bias& mining_bias, const patterns::MiningParams& params);

// Self-describing JSON with a format version and a digest of the payload.
// Loading throws MigrationError on another format version and
// IntegrityError on anything malformed.
std::string persist_to_string(const DesignIndex& index);
DesignIndex load_from_string(std::string_view text);
void persist(const DesignIndex& index, const std::string& path);
DesignIndex load(const std::string& path);

nlohmann::json ranking_to_json(const std::vector<similarity::Score>& scores);
nlohmann::json patterns_to_json(const patterns::PatternSet& s);
nlohmann::json provenance_to_json(const patterns::PatternSet& s,
                                  const std::vector<similarity::TriState>& states);

}  // namespace tdassist::index
