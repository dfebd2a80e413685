#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdassist/drawing.hpp"
#include "tdassist/ilp.hpp"

namespace tdassist::fixtures {

// Synthetic title-block drawings modelled on a parts-list table: material
// rows stacked upwards from a header row, a list title below the header and
// a drawn-by/date row at the bottom. Labels: materials/2 (row index, cell),
// header/1, author/1, date/1.
struct PartsListOptions {
  int rows = 3;
  bool visual_features = true;
  // Column headers, left to right. Empty picks a seeded subset.
  std::vector<std::string> columns;
};

drawing::Drawing parts_list_drawing(const std::string& id, std::uint64_t seed,
                                    const PartsListOptions& options = {});

// `count` drawings with row counts cycling through [min_rows, max_rows].
std::vector<drawing::Drawing> parts_list_corpus(std::size_t count, std::uint64_t seed,
                                                int min_rows = 1, int max_rows = 6);

// Mode declarations for the parts-list labels.
const char* parts_list_bias_text();
ilp::Bias parts_list_bias();

}  // namespace tdassist::fixtures
