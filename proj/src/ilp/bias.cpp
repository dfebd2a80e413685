#include <cctype>
#include <sstream>

#include "tdassist/error.hpp"
#include "tdassist/ilp.hpp"

namespace tdassist::ilp {

logic::Predicate ModeDecl::pred() const {
  return logic::make_predicate(predicate, static_cast<std::uint32_t>(args.size()));
}

std::string ModeDecl::to_string() const {
  std::string out = head ? "head " : "body ";
  out += predicate;
  if (!args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += static_cast<char>(args[i].mode);
      out += args[i].type;
    }
    out += ')';
  }
  return out;
}

const ModeDecl* Bias::head_mode(const logic::Predicate& p) const {
  for (const auto& m : modes)
    if (m.head && m.pred() == p) return &m;
  return nullptr;
}

const ModeDecl* Bias::head_mode(std::string_view predicate) const {
  for (const auto& m : modes)
    if (m.head && m.predicate == predicate) return &m;
  return nullptr;
}

std::vector<const ModeDecl*> Bias::body_modes() const {
  std::vector<const ModeDecl*> out;
  for (const auto& m : modes)
    if (!m.head) out.push_back(&m);
  return out;
}

void Bias::add(ModeDecl m) {
  for (const auto& existing : modes)
    if (existing == m) return;
  modes.push_back(std::move(m));
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

[[noreturn]] void bias_error(int line_no, const std::string& what) {
  throw ParseError("bias line " + std::to_string(line_no) + ": " + what);
}

ModeDecl parse_mode_line(std::string_view line, int line_no) {
  auto fail = [line_no](const std::string& what) { bias_error(line_no, what); };
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
  };
  auto word = [&] {
    skip();
    std::size_t start = pos;
    while (pos < line.size() && ident_char(line[pos])) ++pos;
    return std::string(line.substr(start, pos - start));
  };

  ModeDecl m;
  const std::string kind = word();
  if (kind == "head") {
    m.head = true;
  } else if (kind != "body") {
    fail("expected 'head' or 'body', got '" + kind + "'");
  }
  m.predicate = word();
  if (m.predicate.empty() || !std::islower(static_cast<unsigned char>(m.predicate[0])))
    fail("expected a predicate name");
  skip();
  if (pos < line.size() && line[pos] == '(') {
    ++pos;
    while (true) {
      skip();
      if (pos >= line.size()) fail("unterminated argument list");
      ModeArg arg;
      switch (line[pos]) {
        case '+': arg.mode = ArgMode::Input; break;
        case '-': arg.mode = ArgMode::Output; break;
        case '#': arg.mode = ArgMode::Constant; break;
        default:
          bias_error(line_no, std::string("expected '+', '-' or '#', got '") + line[pos] + "'");
      }
      ++pos;
      arg.type = word();
      if (arg.type.empty()) fail("argument without a type");
      m.args.push_back(std::move(arg));
      skip();
      if (pos < line.size() && line[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < line.size() && line[pos] == ')') {
        ++pos;
        break;
      }
      fail("expected ',' or ')'");
    }
  }
  skip();
  if (pos < line.size() && line[pos] == '.') ++pos;
  skip();
  if (pos != line.size()) fail("trailing text");
  return m;
}

}  // namespace

Bias parse_bias(std::string_view text) {
  Bias b;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find('%'); c != std::string::npos) line.erase(c);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    b.add(parse_mode_line(line, line_no));
  }
  return b;
}

std::string to_string(const Bias& b) {
  std::string out;
  for (const auto& m : b.modes) out += m.to_string() + "\n";
  return out;
}

}  // namespace tdassist::ilp
