#include "tdassist/logic/syntax.hpp"

#include <cctype>
#include <charconv>
#include <unordered_map>

#include "tdassist/error.hpp"

namespace tdassist::logic {

namespace {

bool is_bare_symbol(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  return true;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  // Variables named in the current clause, reset between clauses.
  void reset_variables() {
    variables_.clear();
    next_var_ = 0;
  }

  Atom atom() {
    skip_space();
    std::string name = identifier();
    if (name.empty() || !std::islower(static_cast<unsigned char>(name[0])))
      fail("expected predicate name");
    std::vector<Term> args;
    if (accept("(")) {
      do {
        args.push_back(term());
      } while (accept(","));
      expect(")");
    }
    return Atom(name, std::move(args));
  }

  // Placeholder mode: variables read as placeholders (for fact lists).
  void set_placeholder_mode(bool on) { placeholder_mode_ = on; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("clause syntax at offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else if (ch == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char ch = text_[pos_];
    if (ch == '\'') return Term::symbol(quoted());
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-') {
      std::size_t start = pos_;
      if (ch == '-') ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::int64_t v = 0;
      auto digits = text_.substr(start, pos_ - start);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) fail("bad integer");
      return Term::integer(v);
    }
    std::string name = identifier();
    if (name.empty()) fail(std::string("unexpected character '") + ch + "'");
    if (std::islower(static_cast<unsigned char>(name[0]))) return Term::symbol(name);
    if (placeholder_mode_) return placeholder(name);
    if (name == "_") return Term::variable(next_var_++);
    auto [it, inserted] = variables_.emplace(name, next_var_);
    if (inserted) ++next_var_;
    return Term::variable(it->second);
  }

  Term placeholder(const std::string& name) {
    if (name.size() > 2 && name.starts_with("V_")) {
      std::uint32_t id = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 2, name.data() + name.size(), id);
      if (ec == std::errc() && ptr == name.data() + name.size()) {
        next_placeholder_ = std::max(next_placeholder_, id + 1);
        return Term::placeholder(id);
      }
    }
    auto [it, inserted] = placeholders_.emplace(name, next_placeholder_);
    if (inserted) ++next_placeholder_;
    return Term::placeholder(it->second);
  }

  std::string quoted() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated quoted symbol");
      char ch = text_[pos_++];
      if (ch == '\\' && pos_ < text_.size()) {
        out.push_back(text_[pos_++]);
      } else if (ch == '\'') {
        if (pos_ < text_.size() && text_[pos_] == '\'') {
          out.push_back('\'');
          ++pos_;
        } else {
          return out;
        }
      } else {
        out.push_back(ch);
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::unordered_map<std::string, std::uint32_t> variables_;
  std::uint32_t next_var_ = 0;
  bool placeholder_mode_ = false;
  std::unordered_map<std::string, std::uint32_t> placeholders_;
  std::uint32_t next_placeholder_ = 0;
};

Clause read_clause(Reader& r) {
  r.reset_variables();
  Clause c;
  c.head = r.atom();
  if (r.accept(":-")) {
    do {
      c.body.push_back(r.atom());
    } while (r.accept(","));
  }
  r.expect(".");
  return c;
}

}  // namespace

std::string variable_name(std::uint32_t id) {
  std::string name(1, static_cast<char>('A' + id % 26));
  if (id >= 26) name += std::to_string(id / 26);
  return name;
}

std::string quote_symbol(std::string_view name) {
  if (is_bare_symbol(name)) return std::string(name);
  std::string out = "'";
  for (char ch : name) {
    if (ch == '\'' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('\'');
  return out;
}

std::string to_string(Term t) {
  switch (t.kind()) {
    case Term::Kind::Symbol:
      return quote_symbol(t.symbol_name());
    case Term::Kind::Integer:
      return std::to_string(t.value());
    case Term::Kind::Variable:
      return variable_name(t.id());
    case Term::Kind::Placeholder:
      return "V_" + std::to_string(t.id());
  }
  return {};
}

std::string to_string(const Atom& a) {
  std::string out = a.name_str();
  if (a.args.empty()) return out;
  out.push_back('(');
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out.push_back(',');
    out += to_string(a.args[i]);
  }
  out.push_back(')');
  return out;
}

std::string to_string(const Clause& c) {
  std::string out = to_string(c.head);
  if (!c.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i) out += ", ";
      out += to_string(c.body[i]);
    }
  }
  out.push_back('.');
  return out;
}

std::string to_string(const Program& p) {
  std::string out;
  for (const auto& c : p.clauses) out += to_string(c) + "\n";
  return out;
}

std::string conjunction_to_string(const std::vector<Atom>& atoms) {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ",";
    out += to_string(atoms[i]);
  }
  return out;
}

Atom parse_atom(std::string_view text) {
  Reader r(text);
  Atom a = r.atom();
  r.accept(".");
  if (!r.at_end()) r.fail("trailing input after atom");
  return a;
}

Clause parse_clause(std::string_view text) {
  Reader r(text);
  Clause c = read_clause(r);
  if (!r.at_end()) r.fail("trailing input after clause");
  return c;
}

Program parse_program(std::string_view text) {
  Reader r(text);
  Program p;
  while (!r.at_end()) p.clauses.push_back(read_clause(r));
  return p;
}

std::vector<Atom> parse_conjunction(std::string_view text) {
  Reader r(text);
  std::vector<Atom> out;
  if (r.at_end()) return out;
  do {
    out.push_back(r.atom());
  } while (r.accept(","));
  r.accept(".");
  if (!r.at_end()) r.fail("trailing input after conjunction");
  return out;
}

std::vector<Atom> parse_facts(std::string_view text) {
  Reader r(text);
  r.set_placeholder_mode(true);
  std::vector<Atom> out;
  while (!r.at_end()) {
    out.push_back(r.atom());
    r.expect(".");
  }
  return out;
}

}  // namespace tdassist::logic
