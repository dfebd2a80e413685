#include <algorithm>
#include <random>

#include "tdassist/fixtures.hpp"

namespace tdassist::fixtures {

using drawing::BoundingBox;
using drawing::Cell;
using drawing::Drawing;
using drawing::LabelRef;

namespace {

const std::vector<std::string> kTitles = {"PARTS LIST", "LIST OF PARTS", "COMPONENT LIST",
                                          "SPARES LIST"};
const std::vector<std::string> kDescriptions = {
    "O-RING",       "SEAL RING",   "Double Spring", "RETAINER", "SHAFT SLEEVE",
    "GASKET",       "BELLOWS",     "SEAL FACE",     "Single Spring", "DRIVE PIN",
    "THRUST WASHER", "SET SCREW"};
const std::vector<std::string> kMaterials = {"NICKEL", "STEEL 316", "PTFE",  "CARBON",
                                             "VITON",  "EPDM",      "BRASS", "SiC"};
const std::vector<std::string> kNames = {"J.SMITH", "A.JANSSENS", "M.PEETERS", "K.WU",
                                         "L.MARTIN", "R.COSTA"};

// Optional columns beyond ITEM and DESCRIPTION.
const std::vector<std::string> kOptionalColumns = {"QTY", "MATERIAL", "PART NO", "WEIGHT"};

template <class Rng>
const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
  return pool[d(rng)];
}

template <class Rng>
int uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <class Rng>
std::string column_value(const std::string& column, int row, Rng& rng) {
  if (column == "ITEM") return std::to_string(row + 1);
  if (column == "QTY") return std::to_string(uniform(rng, 1, 12));
  if (column == "DESCRIPTION") return pick(kDescriptions, rng);
  if (column == "MATERIAL") return pick(kMaterials, rng);
  if (column == "PART NO") return "P-" + std::to_string(uniform(rng, 1000, 9999));
  return std::to_string(uniform(rng, 1, 99)) + "g";
}

int column_width(const std::string& column) {
  if (column == "ITEM" || column == "QTY") return 50;
  if (column == "DESCRIPTION") return 180;
  return 110;
}

}  // namespace

Drawing parts_list_drawing(const std::string& id, std::uint64_t seed,
                           const PartsListOptions& options) {
  std::mt19937_64 rng(seed);
  Drawing d;
  d.id = id;

  std::vector<std::string> columns = options.columns;
  if (columns.empty()) {
    columns = {"ITEM", "DESCRIPTION"};
    for (const auto& c : kOptionalColumns)
      if (uniform(rng, 0, 2) > 0) columns.push_back(c);
  }

  const int gap = 2;
  const int x0 = uniform(rng, 20, 200);
  const int row_h = uniform(rng, 20, 30);
  int table_w = 0;
  for (const auto& c : columns) table_w += column_width(c) + gap;
  table_w -= gap;

  int next_id = 1;
  auto add = [&](BoundingBox box, std::optional<std::string> text) {
    Cell c;
    c.id = "c" + std::to_string(next_id++);
    c.bbox = box;
    c.text = std::move(text);
    d.cells.push_back(std::move(c));
    return d.cells.back().id;
  };

  // A notes cell sits above the table, clear of it.
  int y = uniform(rng, 20, 60);
  add(BoundingBox{x0, y, table_w, row_h}, "NOTES: BREAK ALL EDGES");
  y += row_h + 40;

  // Material rows, top row has the highest index.
  const int rows = std::max(1, options.rows);
  for (int r = rows - 1; r >= 0; --r) {
    int x = x0;
    for (const auto& col : columns) {
      const int w = column_width(col);
      const auto cid = add(BoundingBox{x, y, w, row_h}, column_value(col, r, rng));
      d.labels["materials"].push_back(LabelRef{cid, r});
      x += w + gap;
    }
    y += row_h + gap;
  }

  int x = x0;
  for (const auto& col : columns) {
    const int w = column_width(col);
    d.labels["header"].push_back(LabelRef{add(BoundingBox{x, y, w, row_h}, col), std::nullopt});
    x += w + gap;
  }
  y += row_h + gap;

  add(BoundingBox{x0, y, table_w, row_h}, pick(kTitles, rng));
  y += row_h + gap;

  const int half = (table_w - gap) / 2;
  const auto author = add(BoundingBox{x0, y, half, row_h}, "DRAWN " + pick(kNames, rng));
  d.labels["author"].push_back(LabelRef{author, std::nullopt});
  const std::string date = "20" + std::to_string(uniform(rng, 10, 23)) + "-0" +
                           std::to_string(uniform(rng, 1, 9)) + "-" +
                           std::to_string(uniform(rng, 10, 28));
  const auto date_cell =
      add(BoundingBox{x0 + half + gap, y, table_w - half - gap, row_h}, "DATE " + date);
  d.labels["date"].push_back(LabelRef{date_cell, std::nullopt});

  if (options.visual_features) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(drawing::kVisualDims);
    for (auto& e : v) e = u(rng);
    d.visual_features = std::move(v);
  }
  return d;
}

std::vector<Drawing> parts_list_corpus(std::size_t count, std::uint64_t seed, int min_rows,
                                       int max_rows) {
  std::vector<Drawing> out;
  const int span = std::max(1, max_rows - min_rows + 1);
  for (std::size_t i = 0; i < count; ++i) {
    PartsListOptions opt;
    opt.rows = min_rows + static_cast<int>(i % static_cast<std::size_t>(span));
    char id[32];
    std::snprintf(id, sizeof id, "dwg-%03zu", i + 1);
    out.push_back(parts_list_drawing(id, seed * 7919u + i, opt));
  }
  return out;
}

const char* parts_list_bias_text() {
  return R"(% Parts-list targets
head materials(+index,+cell)
head header(+cell)
head author(+cell)
head date(+cell)

body zero(+index)
body succ(-index,+index)
body above_below(+cell,-cell)
body cell_contains(+cell,#token)
body materials(+index,+cell)
)";
}

ilp::Bias parts_list_bias() { return ilp::parse_bias(parts_list_bias_text()); }

}  // namespace tdassist::fixtures
