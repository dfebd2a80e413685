#include "tdassist/drawing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tdassist/error.hpp"

namespace tdassist::drawing {

using nlohmann::json;
using logic::Atom;
using logic::FactSet;
using logic::Term;

void BoundingBox::validate() const {
  if (width <= 0 || height <= 0 || x < 0 || y < 0)
    throw ValidationError("invalid bounding box [" + std::to_string(x) + "," + std::to_string(y) +
                          "," + std::to_string(width) + "," + std::to_string(height) + "]");
}

std::vector<std::string> Cell::tokens() const {
  std::vector<std::string> out;
  if (!text) return out;
  std::istringstream in(*text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

const Cell* Drawing::find(std::string_view cell_id) const {
  for (const auto& c : cells)
    if (c.id == cell_id) return &c;
  return nullptr;
}

bool Drawing::fully_specified() const {
  return std::none_of(cells.begin(), cells.end(), [](const Cell& c) { return c.is_open(); });
}

void Drawing::validate() const {
  std::set<std::string_view> ids;
  for (const auto& c : cells) {
    if (c.id.empty()) throw ValidationError("cell with empty id in drawing '" + id + "'");
    if (!ids.insert(c.id).second)
      throw ValidationError("duplicate cell id '" + c.id + "' in drawing '" + id + "'");
    c.bbox.validate();
  }
  for (const auto& [label, refs] : labels) {
    for (const auto& r : refs) {
      if (!ids.contains(r.cell))
        throw ValidationError("label '" + label + "' refers to unknown cell '" + r.cell + "'");
      if (r.index && *r.index < 0)
        throw ValidationError("label '" + label + "' has a negative index");
    }
  }
  if (visual_features) {
    if (visual_features->size() != kVisualDims)
      throw ValidationError("visual feature vector must have " + std::to_string(kVisualDims) +
                            " entries, got " + std::to_string(visual_features->size()));
    for (double v : *visual_features)
      if (!std::isfinite(v)) throw ValidationError("non-finite visual feature");
  }
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(path, std::string("missing field '") + key + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<std::int64_t>();
}

probtext::CharDistribution read_position(const json& v, const std::string& path) {
  if (!v.is_object() || v.empty()) bad(path, "expected a non-empty {char: probability} object");
  std::vector<std::pair<char32_t, double>> entries;
  for (const auto& [key, p] : v.items()) {
    std::u32string ch;
    try {
      ch = probtext::utf8_decode(key);
    } catch (const ParseError&) {
      bad(path, "key is not valid UTF-8");
    }
    if (ch.size() != 1) bad(path + "." + key, "key must be a single character");
    if (!p.is_number()) bad(path + "." + key, "expected a probability");
    entries.emplace_back(ch[0], p.get<double>());
  }
  try {
    return probtext::CharDistribution(std::move(entries));
  } catch (const ValidationError& e) {
    bad(path, e.what());
  }
}

probtext::ProbString read_ocr(const json& v, const std::string& path) {
  const json* positions = &v;
  std::optional<std::int64_t> length;
  std::string ppath = path;
  if (v.is_object()) {
    positions = &field(v, "positions", path);
    ppath = path + ".positions";
    if (v.contains("length")) length = as_int(v["length"], path + ".length");
  }
  if (!positions->is_array()) bad(ppath, "expected an array of character distributions");
  probtext::ProbString out;
  for (std::size_t i = 0; i < positions->size(); ++i)
    out.positions.push_back(read_position((*positions)[i], ppath + "[" + std::to_string(i) + "]"));
  if (length && *length != static_cast<std::int64_t>(out.length()))
    bad(path + ".length", "length does not match the number of positions");
  return out;
}

Cell read_cell(const json& v, const std::string& path) {
  if (!v.is_object()) bad(path, "expected an object");
  Cell c;
  c.id = as_string(field(v, "id", path), path + ".id");
  const json& box = field(v, "bbox", path);
  if (!box.is_array() || box.size() != 4) bad(path + ".bbox", "expected [x, y, width, height]");
  int parts[4];
  for (int i = 0; i < 4; ++i)
    parts[i] = static_cast<int>(as_int(box[i], path + ".bbox[" + std::to_string(i) + "]"));
  c.bbox = BoundingBox{parts[0], parts[1], parts[2], parts[3]};
  if (auto it = v.find("text"); it != v.end() && !it->is_null())
    c.text = as_string(*it, path + ".text");
  if (auto it = v.find("ocr"); it != v.end() && !it->is_null()) c.ocr = read_ocr(*it, path + ".ocr");
  return c;
}

json write_ocr(const probtext::ProbString& s) {
  json positions = json::array();
  for (const auto& pos : s.positions) {
    json m = json::object();
    for (const auto& [ch, p] : pos.entries()) m[probtext::utf8_encode(ch)] = p;
    positions.push_back(std::move(m));
  }
  return json{{"length", s.length()}, {"positions", std::move(positions)}};
}

}  // namespace

probtext::ProbString load_ocr(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("$: invalid JSON: ") + e.what());
  }
  return read_ocr(doc, "$");
}

Drawing load_drawing(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  if (!doc.is_object()) bad("$", "expected an object");

  Drawing d;
  d.id = as_string(field(doc, "id", "$"), "$.id");
  const json& cells = field(doc, "cells", "$");
  if (!cells.is_array()) bad("$.cells", "expected an array");
  for (std::size_t i = 0; i < cells.size(); ++i)
    d.cells.push_back(read_cell(cells[i], "$.cells[" + std::to_string(i) + "]"));

  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) bad("$.labels", "expected an object");
    for (const auto& [label, refs] : it->items()) {
      const std::string path = "$.labels." + label;
      if (!refs.is_array()) bad(path, "expected an array");
      auto& out = d.labels[label];
      for (std::size_t i = 0; i < refs.size(); ++i) {
        const std::string rpath = path + "[" + std::to_string(i) + "]";
        if (!refs[i].is_object()) bad(rpath, "expected an object");
        LabelRef r;
        r.cell = as_string(field(refs[i], "cell", rpath), rpath + ".cell");
        if (auto idx = refs[i].find("index"); idx != refs[i].end() && !idx->is_null())
          r.index = as_int(*idx, rpath + ".index");
        out.push_back(std::move(r));
      }
    }
  }

  if (auto it = doc.find("visual_features"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) bad("$.visual_features", "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number()) bad("$.visual_features[" + std::to_string(i) + "]", "expected a number");
      v.push_back((*it)[i].get<double>());
    }
    d.visual_features = std::move(v);
  }

  d.validate();
  return d;
}

Drawing load_drawing_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("not-found", "cannot open drawing document '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_drawing(buf.str());
}

std::string serialize(const Drawing& d) {
  json cells = json::array();
  for (const auto& c : d.cells) {
    json cell{{"id", c.id},
              {"bbox", {c.bbox.x, c.bbox.y, c.bbox.width, c.bbox.height}},
              {"text", c.text ? json(*c.text) : json(nullptr)}};
    if (c.ocr) cell["ocr"] = write_ocr(*c.ocr);
    cells.push_back(std::move(cell));
  }
  json labels = json::object();
  for (const auto& [label, refs] : d.labels) {
    json arr = json::array();
    for (const auto& r : refs)
      arr.push_back({{"cell", r.cell}, {"index", r.index ? json(*r.index) : json(nullptr)}});
    labels[label] = std::move(arr);
  }
  json doc{{"id", d.id},
           {"cells", std::move(cells)},
           {"labels", std::move(labels)},
           {"visual_features", d.visual_features ? json(*d.visual_features) : json(nullptr)}};
  return doc.dump(2);
}

namespace {

// Overlap of [a0,a1) and [b0,b1).
int overlap(int a0, int a1, int b0, int b1) { return std::min(a1, b1) - std::max(a0, b0); }

bool vertical_candidate(const BoundingBox& a, const BoundingBox& b, const AdjacencyParams& p) {
  const int gap = b.y - a.bottom();
  if (gap < -p.gap_tol || gap > p.gap_tol || a.y >= b.y) return false;
  return overlap(a.x, a.right(), b.x, b.right()) >=
         p.overlap_frac * std::min(a.width, b.width);
}

bool horizontal_candidate(const BoundingBox& a, const BoundingBox& b, const AdjacencyParams& p) {
  const int gap = b.x - a.right();
  if (gap < -p.gap_tol || gap > p.gap_tol || a.x >= b.x) return false;
  return overlap(a.y, a.bottom(), b.y, b.bottom()) >=
         p.overlap_frac * std::min(a.height, b.height);
}

}  // namespace

FactSet derive_adjacency(const Drawing& d, const AdjacencyParams& params) {
  FactSet out;
  const std::size_t n = d.cells.size();
  auto emit = [&](const char* relation, auto&& candidate) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j || !candidate(d.cells[i].bbox, d.cells[j].bbox, params)) continue;
        // Skip i when another candidate k sits between i and j.
        bool shadowed = false;
        for (std::size_t k = 0; k < n && !shadowed; ++k)
          shadowed = k != i && k != j && candidate(d.cells[k].bbox, d.cells[j].bbox, params) &&
                     candidate(d.cells[i].bbox, d.cells[k].bbox, params);
        if (!shadowed)
          out.add(Atom(relation, {Term::symbol(d.cells[i].id), Term::symbol(d.cells[j].id)}));
      }
    }
  };
  emit("above_below", vertical_candidate);
  emit("left_right", horizontal_candidate);
  return out;
}

FactSet derive_succ(std::int64_t max_index) {
  if (max_index < 0) throw ValidationError("max_index must be non-negative");
  FactSet out;
  for (std::int64_t i = 0; i < max_index; ++i)
    out.add(Atom("succ", {Term::integer(i), Term::integer(i + 1)}));
  return out;
}

FactSet drawing_to_facts(const Drawing& d) {
  FactSet out;
  std::uint32_t next_placeholder = 1;
  for (const auto& c : d.cells) {
    const Term id = Term::symbol(c.id);
    out.add(Atom("cell", {id}));
    if (c.is_open()) {
      out.add(Atom("cell_contains", {id, Term::placeholder(next_placeholder++)}));
    } else {
      for (const auto& tok : c.tokens()) out.add(Atom("cell_contains", {id, Term::symbol(tok)}));
    }
    out.add(Atom("bbox", {id, Term::integer(c.bbox.x), Term::integer(c.bbox.y),
                          Term::integer(c.bbox.width), Term::integer(c.bbox.height)}));
  }
  return out;
}

FactSet background_facts(const Drawing& d, const AdjacencyParams& params) {
  FactSet out = drawing_to_facts(d);
  out.merge(derive_adjacency(d, params));
  out.merge(derive_succ(static_cast<std::int64_t>(d.cells.size())));
  out.add(Atom("zero", {Term::integer(0)}));
  return out;
}

}  // namespace tdassist::drawing
