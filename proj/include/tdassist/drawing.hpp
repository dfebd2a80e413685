#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdassist/logic/fact_set.hpp"
#include "tdassist/probtext.hpp"

namespace tdassist::drawing {

struct BoundingBox {
  int x = 0;
  int y = 0;
  int width = 1;
  int height = 1;

  int right() const { return x + width; }
  int bottom() const { return y + height; }
  void validate() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Cell {
  std::string id;
  BoundingBox bbox;
  // Absent text means the cell is open (an empty cell of a partial design).
  std::optional<std::string> text;
  std::optional<probtext::ProbString> ocr;

  bool is_open() const { return !text.has_value(); }
  std::vector<std::string> tokens() const;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct LabelRef {
  std::string cell;
  std::optional<std::int64_t> index;

  friend bool operator==(const LabelRef&, const LabelRef&) = default;
  friend auto operator<=>(const LabelRef&, const LabelRef&) = default;
};

inline constexpr std::size_t kVisualDims = 64;

struct Drawing {
  std::string id;
  std::vector<Cell> cells;
  std::map<std::string, std::vector<LabelRef>> labels;
  std::optional<std::vector<double>> visual_features;

  const Cell* find(std::string_view cell_id) const;
  bool fully_specified() const;
  // Throws ValidationError on duplicate cell ids, dangling or negative label
  // references, bad boxes or a visual vector of the wrong size.
  void validate() const;

  friend bool operator==(const Drawing&, const Drawing&) = default;
};

// JSON drawing documents. Parse errors name the JSON path at fault.
Drawing load_drawing(std::string_view document);
Drawing load_drawing_file(const std::string& path);
std::string serialize(const Drawing& d);
// A standalone OCR observation, in the same form as a cell's "ocr" field.
probtext::ProbString load_ocr(std::string_view document);

struct AdjacencyParams {
  int gap_tol = 5;
  double overlap_frac = 0.5;
};

// above_below(A,B): A sits directly above B. left_right(A,B): A directly left
// of B. Only nearest neighbours are related.
logic::FactSet derive_adjacency(const Drawing& d, const AdjacencyParams& params = {});

// succ(i, i+1) for 0 <= i < max_index.
logic::FactSet derive_succ(std::int64_t max_index);

// cell/1, cell_contains/2 and bbox/5. Open cells contribute
// cell_contains(C, V_k) with a placeholder numbered from 1 in cell order.
logic::FactSet drawing_to_facts(const Drawing& d);

// Everything a parser sees for one drawing: drawing facts, adjacency,
// succ up to the cell count, and zero(0).
logic::FactSet background_facts(const Drawing& d, const AdjacencyParams& params = {});

}  // namespace tdassist::drawing
