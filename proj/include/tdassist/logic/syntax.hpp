#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tdassist/logic/term.hpp"

namespace tdassist::logic {

// Text syntax, Prolog style:
//   materials(A,B) :- succ(C,A), above_below(B,D), materials(C,D).
// Lowercase identifiers and 'quoted text' are symbols, digits are integers,
// identifiers starting with an uppercase letter or '_' are variables.

std::string to_string(Term t);
std::string to_string(const Atom& a);
std::string to_string(const Clause& c);
std::string to_string(const Program& p);

// Name given to variable `id` by the printer: A..Z, then A1..Z1, ...
std::string variable_name(std::uint32_t id);
// Quotes the symbol when it would not read back as a bare symbol.
std::string quote_symbol(std::string_view name);

Atom parse_atom(std::string_view text);
Clause parse_clause(std::string_view text);
Program parse_program(std::string_view text);

// A comma-separated conjunction, optionally terminated by '.'. Variables are
// numbered in first-occurrence order.
std::vector<Atom> parse_conjunction(std::string_view text);
std::string conjunction_to_string(const std::vector<Atom>& atoms);

// Ground facts, one per clause. Variables in facts become placeholders:
// V_<n> maps to placeholder n, any other name gets the next free id.
std::vector<Atom> parse_facts(std::string_view text);

}  // namespace tdassist::logic
