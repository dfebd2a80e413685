#pragma once

// Shared fixtures for the index, service and acceptance tests.

#include <fstream>
#include <sstream>
#include <string>

#include "tdassist/fixtures.hpp"
#include "tdassist/index.hpp"
#include "tdassist/logic/syntax.hpp"

namespace support {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::string data_path(const std::string& name) {
  return std::string(TDASSIST_SOURCE_DIR) + "/data/" + name;
}

// The parts-list parser written out by hand, in the shape learning produces.
inline tdassist::index::ParserModel parts_list_parser() {
  tdassist::index::ParserModel m;
  m.program = tdassist::logic::parse_program(
      "header(A) :- above_below(A,B), cell_contains(B,'LIST').\n"
      "materials(A,B) :- zero(A), above_below(B,C), header(C).\n"
      "materials(A,B) :- succ(C,A), above_below(B,D), materials(C,D).\n"
      "author(A) :- cell_contains(A,'DRAWN').\n"
      "date(A) :- cell_contains(A,'DATE').\n");
  const auto bias = tdassist::fixtures::parts_list_bias();
  for (const auto& mode : bias.modes)
    if (mode.head) m.heads.push_back(mode);
  return m;
}

inline tdassist::ilp::Bias mining_bias() {
  return tdassist::ilp::parse_bias(read_file(data_path("mining.bias")));
}

// Patterns mined from `mined_over` fixture drawings; the index then holds
// `designs` further drawings.
inline tdassist::index::DesignIndex fixture_index(std::size_t mined_over, std::size_t designs,
                                                  std::uint64_t seed, int max_literals = 2) {
  tdassist::patterns::MiningParams params;
  params.max_literals = max_literals;
  auto idx = tdassist::index::build_index(
      tdassist::fixtures::parts_list_corpus(mined_over, seed), parts_list_parser(),
      mining_bias(), params);
  auto extra = tdassist::fixtures::parts_list_corpus(designs, seed + 1);
  for (auto& d : extra) {
    d.id = "ext-" + d.id;
    idx.add_design(d);
  }
  return idx;
}

}  // namespace support
