// Command-line front end: segment, learn, parse, mine, index, rank, correct
// and serve.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdassist/bootstrap.hpp"
#include "tdassist/error.hpp"
#include "tdassist/fixtures.hpp"
#include "tdassist/index.hpp"
#include "tdassist/logic/syntax.hpp"
#include "tdassist/probtext.hpp"
#include "tdassist/segmentation.hpp"
#include "tdassist/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tdassist;

namespace {

struct Config {
  std::string bias;
  std::string mining_bias;
  std::string programs;
  std::string index;
  ilp::SearchParams search;
  probtext::EditPenalties penalties;
  double min_support = 0.10;
  int max_literals = 6;
  double alpha = 0.5;
  std::size_t k = 10;
  std::string bind = "127.0.0.1:8080";

  void validate() const {
    search.validate();
    penalties.validate();
    if (!(min_support >= 0.0 && min_support <= 1.0))
      throw ConfigError("min_support must lie in [0,1]");
    if (max_literals < 1) throw ConfigError("max_literals must be at least 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (k < 1) throw ConfigError("k must be at least 1");
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("not-found", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Keys mirror the flags; paths are taken as given.
Config load_config(const std::string& path) {
  Config c;
  const json j = read_json_file(path);
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  try {
    c.bias = j.value("bias", c.bias);
    c.mining_bias = j.value("mining_bias", c.mining_bias);
    c.programs = j.value("programs", c.programs);
    c.index = j.value("index", c.index);
    if (j.contains("search")) {
      const auto& s = j["search"];
      c.search.proof_depth = s.value("proof_depth", c.search.proof_depth);
      c.search.max_clause_len = s.value("max_clause_len", c.search.max_clause_len);
      c.search.node_bound = s.value("node_bound", c.search.node_bound);
      c.search.noise = s.value("noise", c.search.noise);
    }
    if (j.contains("penalties")) {
      const auto& p = j["penalties"];
      c.penalties.p_insert = p.value("insert", c.penalties.p_insert);
      c.penalties.p_delete = p.value("delete", c.penalties.p_delete);
      c.penalties.p_substitute = p.value("substitute", c.penalties.p_substitute);
    }
    if (j.contains("mining")) {
      c.min_support = j["mining"].value("min_support", c.min_support);
      c.max_literals = j["mining"].value("max_literals", c.max_literals);
    }
    c.alpha = j.value("alpha", c.alpha);
    c.k = j.value("k", c.k);
    c.bind = j.value("bind", c.bind);
  } catch (const json::type_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

std::vector<drawing::Drawing> load_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not-found", "'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .json drawings in '" + dir + "'");
  std::vector<drawing::Drawing> out;
  for (const auto& f : files) out.push_back(drawing::load_drawing_file(f.string()));
  return out;
}

ilp::Bias load_bias(const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string("a bias file is required (") + flag + ")");
  return ilp::parse_bias(read_file(path));
}

// Accepts the output of `learn` (parser under "parser") or a bare parser model.
index::ParserModel load_parser(const std::string& path) {
  if (path.empty()) return {};
  const json j = read_json_file(path);
  return index::parser_from_json(j.contains("parser") ? j["parser"] : j);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Output {
  bool pretty = false;

  void emit(const json& j, const std::string& table = {}) const {
    if (pretty && !table.empty()) {
      std::cout << table;
    } else {
      std::cout << (pretty ? j.dump(2) : j.dump()) << "\n";
    }
  }
};

// Commands ----------------------------------------------------------------

void cmd_segment(const std::string& image, const segmentation::SegmentParams& params,
                 const Output& out) {
  const auto bmp = segmentation::load_bitmap(image);
  const auto segs = segmentation::segment(bmp, params);
  std::string table = "cluster  pixels  bbox\n";
  for (const auto& s : segs)
    table += std::to_string(s.cluster) + "  " + std::to_string(s.pixels) + "  [" +
             std::to_string(s.bbox.x) + "," + std::to_string(s.bbox.y) + "," +
             std::to_string(s.bbox.width) + "," + std::to_string(s.bbox.height) + "]\n";
  out.emit(json::parse(segmentation::segments_to_json(segs)), table);
}

struct LearnArgs {
  std::string dir;
  std::string test_dir;
  std::string graph;
  std::string labels;
  bool bootstrap = false;
};

json program_report(const logic::Program& p, double f1) {
  return {{"program", logic::to_string(p)},
          {"clauses", p.clauses.size()},
          {"literals", p.literal_count()},
          {"train_f1", f1}};
}

void cmd_learn(const LearnArgs& a, const Config& cfg, std::optional<std::uint64_t> seed,
               const Output& out) {
  const auto bias = load_bias(cfg.bias, "--bias");
  auto corpus = ilp::Corpus::build(load_corpus(a.dir));

  std::vector<std::string> labels = split_list(a.labels);
  if (labels.empty()) {
    for (const auto& m : bias.modes) {
      if (!m.head) continue;
      const bool present = std::any_of(corpus.drawings.begin(), corpus.drawings.end(),
                                       [&](const auto& d) { return d.labels.contains(m.predicate); });
      if (present) labels.push_back(m.predicate);
    }
  }
  std::optional<bootstrap::DependencyGraph> manual;
  if (!a.graph.empty()) manual = bootstrap::parse_dependency_graph(read_file(a.graph));

  const auto r = bootstrap::learn_labels(corpus, labels, bias, cfg.search, a.bootstrap, manual, seed);

  index::ParserModel parser;
  parser.program = r.combined();
  parser.proof_depth = cfg.search.proof_depth;
  for (const auto& l : labels) parser.heads.push_back(*bias.head_mode(l));

  std::optional<ilp::Corpus> test;
  if (!a.test_dir.empty()) test = ilp::Corpus::build(load_corpus(a.test_dir));

  json report = json::object();
  std::string table = "label      variant       clauses  literals  train_f1";
  table += test ? "  test_f1\n" : "\n";
  for (const auto& l : labels) {
    const auto& head = *bias.head_mode(l);
    json entry;
    const auto& std_res = r.standard.at(l);
    entry["standard"] = program_report(std_res.program, std_res.training.f1());
    if (r.bootstrapped) {
      const auto& b = r.bootstrapped->results.at(l);
      entry["bootstrapped"] = program_report(b.program, b.training.f1());
    }
    if (test) {
      entry["standard"]["test_f1"] =
          ilp::evaluate(std_res.program, *test, l, head, cfg.search.proof_depth).metrics.f1();
      if (r.bootstrapped)
        entry["bootstrapped"]["test_f1"] =
            ilp::evaluate(r.program(l), *test, l, head, cfg.search.proof_depth, r.background(l))
                .metrics.f1();
    }
    for (const char* variant : {"standard", "bootstrapped"}) {
      if (!entry.contains(variant)) continue;
      const auto& e = entry[variant];
      char line[160];
      std::snprintf(line, sizeof line, "%-10s %-13s %7zu %9zu  %8s", l.c_str(), variant,
                    e["clauses"].get<std::size_t>(), e["literals"].get<std::size_t>(),
                    fixed(e["train_f1"].get<double>()).c_str());
      table += line;
      table += test ? "  " + fixed(e["test_f1"].get<double>()) + "\n" : "\n";
    }
    report[l] = std::move(entry);
  }
  json ranking = json::array();
  for (const auto& t : r.ranking)
    ranking.push_back({{"label", t.label}, {"f1", t.f1}, {"literals", t.literals}});
  json result = {{"parser", index::to_json(parser)},
                 {"labels", report},
                 {"ranking", ranking},
                 {"graph", bootstrap::to_string(r.graph)}};
  if (r.bootstrapped) result["order"] = r.bootstrapped->order;
  table += "\n" + logic::to_string(parser.program);
  out.emit(result, table);
}

void cmd_parse(const std::string& document, const Config& cfg, const Output& out) {
  const auto d = drawing::load_drawing_file(document);
  const auto parser = load_parser(cfg.programs);
  const auto facts = index::extract_facts(d, parser);
  json labels = json::object();
  std::string table;
  for (const auto& head : parser.heads) {
    json atoms = json::array();
    const auto found = facts.with_predicate(head.pred());
    for (const auto& a : found) {
      atoms.push_back(logic::to_string(a));
      table += logic::to_string(a) + "\n";
    }
    labels[head.predicate] = atoms;
  }
  json all = json::array();
  for (const auto& a : facts.atoms()) all.push_back(logic::to_string(a));
  out.emit({{"id", d.id}, {"labels", labels}, {"facts", all}}, table);
}

patterns::MiningParams mining_params(const Config& cfg) {
  patterns::MiningParams p;
  p.min_support_frac = cfg.min_support;
  p.max_literals = cfg.max_literals;
  p.proof_depth = cfg.search.proof_depth;
  return p;
}

std::string pattern_table(const patterns::PatternSet& s) {
  std::string t = "support  pattern\n";
  for (const auto& p : s.patterns) t += std::to_string(p.support) + "  " + p.key + "\n";
  return t;
}

void cmd_mine(const std::string& dir, const std::string& out_file, const Config& cfg,
              const Output& out) {
  const auto bias = load_bias(cfg.mining_bias, "--bias");
  const auto parser = load_parser(cfg.programs);
  const auto drawings = load_corpus(dir);
  std::vector<logic::FactSet> facts;
  for (const auto& d : drawings) facts.push_back(index::extract_facts(d, parser));
  std::vector<patterns::Evidence> corpus;
  for (const auto& f : facts) corpus.push_back({&f, &parser.program});
  const auto set = patterns::mine(corpus, bias, mining_params(cfg));
  if (!out_file.empty()) {
    std::ofstream f(out_file);
    if (!f) throw ValidationError("cannot write '" + out_file + "'");
    f << patterns::to_text(set);
  }
  out.emit(index::patterns_to_json(set), pattern_table(set));
}

void cmd_index_build(const std::string& dir, const Config& cfg, const Output& out) {
  if (cfg.index.empty()) throw ConfigError("an index path is required (--out)");
  const auto bias = load_bias(cfg.mining_bias, "--bias");
  const auto idx =
      index::build_index(load_corpus(dir), load_parser(cfg.programs), bias, mining_params(cfg));
  index::persist(idx, cfg.index);
  out.emit({{"index", cfg.index}, {"designs", idx.size()}, {"patterns", idx.patterns().size()}});
}

void cmd_rank(const std::string& document, bool partial, const Config& cfg, const Output& out) {
  if (cfg.index.empty()) throw ConfigError("an index path is required (--index)");
  const auto idx = index::load(cfg.index);
  const auto q = drawing::load_drawing_file(document);
  const auto scores =
      partial ? idx.rank_partial(q, cfg.alpha, cfg.k) : idx.rank(q, cfg.alpha, cfg.k);
  std::string table = "rank  id          combined  tabular   visual\n";
  for (const auto& s : scores) {
    char line[160];
    std::snprintf(line, sizeof line, "%4d  %-10s  %8s  %8s  %7s\n", s.rank, s.id.c_str(),
                  fixed(s.combined).c_str(), fixed(s.sim_tabular).c_str(),
                  s.sim_visual ? fixed(*s.sim_visual).c_str() : "-");
    table += line;
  }
  out.emit(index::ranking_to_json(scores), table);
}

struct CorrectArgs {
  std::string document;
  std::string dictionary;
  std::string type;
  double ratio = 8.0;
  std::size_t top = 5;
};

json correct_one(const probtext::ProbString& obs, const std::vector<std::string>& dict,
                 const CorrectArgs& a, const probtext::EditPenalties& pen) {
  json r = {{"observed", obs.argmax_string()}};
  if (!dict.empty()) {
    const auto matches = probtext::best_match(dict, obs, pen);
    r["corrected"] = matches.front().candidate;
    r["score"] = matches.front().score;
    json cands = json::array();
    for (std::size_t i = 0; i < matches.size() && i < a.top; ++i)
      cands.push_back({{"candidate", matches[i].candidate}, {"score", matches[i].score}});
    r["candidates"] = cands;
  } else {
    r["corrected"] = probtext::correct_with_type(obs, probtext::char_class(a.type), a.ratio);
  }
  return r;
}

void cmd_correct(const CorrectArgs& a, const Config& cfg, const Output& out) {
  if (a.dictionary.empty() && a.type.empty())
    throw ConfigError("correct needs --dictionary or --type");
  std::vector<std::string> dict;
  if (!a.dictionary.empty()) {
    std::istringstream in(read_file(a.dictionary));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) dict.push_back(line);
    }
    if (dict.empty()) throw ValidationError("dictionary '" + a.dictionary + "' is empty");
  }
  const std::string text = read_file(a.document);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(a.document + ": " + e.what());
  }
  std::string table;
  if (doc.is_object() && doc.contains("cells")) {
    const auto d = drawing::load_drawing(text);
    json cells = json::array();
    for (const auto& c : d.cells) {
      if (!c.ocr) continue;
      json r = correct_one(*c.ocr, dict, a, cfg.penalties);
      r["id"] = c.id;
      table += c.id + "  " + r["observed"].get<std::string>() + " -> " +
               r["corrected"].get<std::string>() + "\n";
      cells.push_back(std::move(r));
    }
    out.emit({{"id", d.id}, {"cells", cells}}, table);
    return;
  }
  // A single cell {"id", "ocr"} or a bare observation.
  const json& ocr = doc.is_object() && doc.contains("ocr") ? doc["ocr"] : doc;
  json r = correct_one(drawing::load_ocr(ocr.dump()), dict, a, cfg.penalties);
  if (doc.is_object() && doc.contains("id")) r["id"] = doc["id"];
  table = r["observed"].get<std::string>() + " -> " + r["corrected"].get<std::string>() + "\n";
  out.emit(r, table);
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("bind address must be host:port");
  try {
    const int port = std::stoi(bind.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("port out of range");
    return {bind.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw ConfigError("bind address must be host:port");
  }
}

void cmd_serve(const Config& cfg, bool write_back) {
  if (cfg.index.empty()) throw ConfigError("an index path is required (--index)");
  auto idx = index::load(cfg.index);
  const auto [host, port] = split_bind(cfg.bind);
  index::Service service(std::move(idx), write_back ? std::optional(cfg.index) : std::nullopt);
  const int bound = service.bind(host, port);
  std::cerr << "serving " << host << ":" << bound << "\n";
  service.run();
}

void cmd_fixtures(const std::string& dir, std::size_t count, std::uint64_t seed, int min_rows,
                  int max_rows, const Output& out) {
  fs::create_directories(dir);
  json written = json::array();
  for (const auto& d : fixtures::parts_list_corpus(count, seed, min_rows, max_rows)) {
    const auto path = (fs::path(dir) / (d.id + ".json")).string();
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write '" + path + "'");
    f << drawing::serialize(d) << "\n";
    written.push_back(path);
  }
  out.emit(written);
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"code", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parser learning and design search for technical drawings"};
  app.require_subcommand(1);
  app.fallthrough();

  Config cfg;
  if (const char* path = std::getenv("TDASSIST_CONFIG"); path && *path) {
    try {
      cfg = load_config(path);
    } catch (const Error& e) {
      print_error(e.code(), std::string("TDASSIST_CONFIG: ") + e.what());
      return 1;
    }
  }

  Output out;
  std::optional<std::uint64_t> seed;
  app.add_flag("--pretty", out.pretty, "Human-readable output");
  app.add_option("--seed", seed, "Shuffle seed for example order");

  segmentation::SegmentParams seg_params;
  std::string image;
  auto* segment = app.add_subcommand("segment", "Segment a bitmap drawing (PGM or PNG)");
  segment->add_option("image", image, "Image file")->required();
  segment->add_option("--eps", seg_params.eps, "Neighbourhood radius in pixels");
  segment->add_option("--threshold", seg_params.threshold, "Foreground intensity threshold");
  segment->add_option("--min-pts", seg_params.min_pts, "Core point threshold (default from size)");

  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "Learn parser programs from labeled drawings");
  learn->add_option("dir", learn_args.dir, "Directory of labeled drawings")->required();
  learn->add_option("--bias", cfg.bias, "Mode declarations");
  learn->add_flag("--bootstrap", learn_args.bootstrap, "Relearn with learned dependencies");
  learn->add_option("--graph", learn_args.graph, "Manual dependency graph");
  learn->add_option("--labels", learn_args.labels, "Comma-separated labels (default: all)");
  learn->add_option("--test-dir", learn_args.test_dir, "Held-out drawings for test F1");
  learn->add_option("--depth", cfg.search.proof_depth, "Proof depth");
  learn->add_option("--clause-length", cfg.search.max_clause_len, "Max literals per clause");
  learn->add_option("--node-bound", cfg.search.node_bound, "Search nodes per clause");
  learn->add_option("--noise", cfg.search.noise, "Negatives a clause may cover");

  std::string document;
  auto* parse = app.add_subcommand("parse", "Run learned programs on a drawing");
  parse->add_option("document", document, "Drawing JSON")->required();
  parse->add_option("--programs", cfg.programs, "Output of `learn` or a parser model");

  std::string dir, patterns_out;
  auto* mine = app.add_subcommand("mine", "Mine frequent patterns over a corpus");
  mine->add_option("dir", dir, "Directory of drawings")->required();
  mine->add_option("--bias", cfg.mining_bias, "Allowed predicates");
  mine->add_option("--programs", cfg.programs, "Parser programs");
  mine->add_option("--min-support", cfg.min_support, "Minimum support fraction");
  mine->add_option("--max-literals", cfg.max_literals, "Longest pattern");
  mine->add_option("--out", patterns_out, "Also write the pattern set as text");

  auto* index_cmd = app.add_subcommand("index", "Design index operations");
  index_cmd->require_subcommand(1);
  auto* build = index_cmd->add_subcommand("build", "Build and persist an index");
  build->add_option("dir", dir, "Directory of drawings")->required();
  build->add_option("--out", cfg.index, "Index file to write");
  build->add_option("--bias", cfg.mining_bias, "Allowed pattern predicates");
  build->add_option("--programs", cfg.programs, "Parser programs");
  build->add_option("--min-support", cfg.min_support, "Minimum support fraction");
  build->add_option("--max-literals", cfg.max_literals, "Longest pattern");

  bool partial = false;
  auto* rank = app.add_subcommand("rank", "Rank indexed designs against a drawing");
  rank->add_option("document", document, "Query drawing JSON")->required();
  rank->add_option("--index", cfg.index, "Index file");
  rank->add_option("--alpha", cfg.alpha, "Weight of the tabular similarity");
  rank->add_option("-k", cfg.k, "Number of results");
  rank->add_flag("--partial", partial, "Use three-valued evaluation even when complete");

  CorrectArgs correct_args;
  auto* correct = app.add_subcommand("correct", "Correct OCR text against a dictionary");
  correct->add_option("document", correct_args.document, "Drawing, cell or OCR JSON")->required();
  correct->add_option("--dictionary", correct_args.dictionary, "One candidate per line");
  correct->add_option("--type", correct_args.type, "Character class: digit, upper_alpha, alnum");
  correct->add_option("--ratio", correct_args.ratio, "Type prior ratio");
  correct->add_option("--top", correct_args.top, "Candidates to report");
  correct->add_option("--p-insert", cfg.penalties.p_insert, "Insertion penalty");
  correct->add_option("--p-delete", cfg.penalties.p_delete, "Deletion penalty");
  correct->add_option("--p-substitute", cfg.penalties.p_substitute, "Substitution penalty");

  bool write_back = false;
  auto* serve = app.add_subcommand("serve", "Serve the search API");
  serve->add_option("--index", cfg.index, "Index file");
  serve->add_option("--bind", cfg.bind, "host:port");
  serve->add_flag("--write-back", write_back, "Persist added designs to the index file");

  std::size_t fixture_count = 20;
  std::uint64_t fixture_seed = 42;
  int min_rows = 1, max_rows = 6;
  auto* fixture = app.add_subcommand("fixtures", "Write synthetic parts-list drawings");
  fixture->add_option("dir", dir, "Output directory")->required();
  fixture->add_option("--count", fixture_count, "Number of drawings");
  fixture->add_option("--fixture-seed", fixture_seed, "Generator seed");
  fixture->add_option("--min-rows", min_rows, "Fewest material rows");
  fixture->add_option("--max-rows", max_rows, "Most material rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    cfg.validate();
    if (*segment) cmd_segment(image, seg_params, out);
    if (*learn) cmd_learn(learn_args, cfg, seed, out);
    if (*parse) cmd_parse(document, cfg, out);
    if (*mine) cmd_mine(dir, patterns_out, cfg, out);
    if (*build) cmd_index_build(dir, cfg, out);
    if (*rank) cmd_rank(document, partial, cfg, out);
    if (*correct) cmd_correct(correct_args, cfg, out);
    if (*serve) cmd_serve(cfg, write_back);
    if (*fixture) cmd_fixtures(dir, fixture_count, fixture_seed, min_rows, max_rows, out);
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal-error", e.what());
    return 2;
  }
  return 0;
}
