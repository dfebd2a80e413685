#include "tdassist/index.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "tdassist/error.hpp"
#include "tdassist/logic/syntax.hpp"

namespace tdassist::index {

using nlohmann::json;

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string facts_to_text(const logic::FactSet& f) {
  std::string out;
  for (const auto& a : f.atoms()) out += logic::to_string(a) + ".\n";
  return out;
}

std::string bits_to_text(const patterns::FeatureVector& v) {
  std::string out;
  for (bool b : v) out += b ? '1' : '0';
  return out;
}

patterns::FeatureVector bits_from_text(const std::string& s) {
  patterns::FeatureVector v;
  for (char c : s) {
    if (c != '0' && c != '1') throw IntegrityError("feature bits must be 0 or 1");
    v.push_back(c == '1');
  }
  return v;
}

patterns::Evidence evidence(const logic::FactSet& facts, const ParserModel& parser) {
  return {&facts, &parser.program};
}

}  // namespace

json to_json(const ParserModel& m) {
  json heads = json::array();
  for (const auto& h : m.heads) heads.push_back(h.to_string());
  return {{"heads", heads}, {"program", logic::to_string(m.program)}, {"proof_depth", m.proof_depth}};
}

ParserModel parser_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("parser model must be a JSON object");
  ParserModel m;
  std::string bias_text;
  for (const auto& h : j.value("heads", json::array())) bias_text += h.get<std::string>() + "\n";
  for (auto& mode : ilp::parse_bias(bias_text).modes) {
    if (!mode.head) throw ParseError("parser heads must be head modes: " + mode.to_string());
    m.heads.push_back(std::move(mode));
  }
  m.program = logic::parse_program(j.value("program", std::string()));
  m.proof_depth = j.value("proof_depth", 12);
  return m;
}

std::string document_digest(const drawing::Drawing& d) { return sha256_hex(drawing::serialize(d)); }

logic::FactSet extract_facts(const drawing::Drawing& d, const ParserModel& parser) {
  logic::FactSet facts = drawing::background_facts(d);
  logic::FactSet derived;
  for (const auto& head : parser.heads)
    for (auto& a : ilp::predict(parser.program, facts, d, head, parser.proof_depth))
      derived.add(std::move(a));
  facts.merge(derived);
  return facts;
}

DesignIndex::DesignIndex(patterns::PatternSet patterns, ParserModel parser)
    : patterns_(std::move(patterns)), parser_(std::move(parser)) {}

const IndexedDesign* DesignIndex::find(const std::string& id) const {
  auto it = designs_.find(id);
  return it == designs_.end() ? nullptr : &it->second;
}

DesignIndex::AddOutcome DesignIndex::add_design(const drawing::Drawing& d) {
  d.validate();
  if (!d.fully_specified())
    throw ValidationError("design '" + d.id + "' has open cells; only complete designs are indexed");
  if (d.visual_features) similarity::validate_visual(*d.visual_features);
  const auto digest = document_digest(d);
  if (const auto* existing = find(d.id)) {
    if (existing->digest == digest) return AddOutcome::Unchanged;
    throw ConflictError("design '" + d.id + "' is already indexed with different content");
  }
  IndexedDesign rec;
  rec.id = d.id;
  rec.facts = extract_facts(d, parser_);
  rec.features = patterns::vectorize(evidence(rec.facts, parser_), patterns_, parser_.proof_depth);
  rec.visual = d.visual_features;
  rec.digest = digest;
  designs_.emplace(d.id, std::move(rec));
  ++revision_;
  return AddOutcome::Added;
}

patterns::FeatureVector DesignIndex::vectorize(const drawing::Drawing& d) const {
  const auto facts = extract_facts(d, parser_);
  return patterns::vectorize(evidence(facts, parser_), patterns_, parser_.proof_depth);
}

std::vector<similarity::TriState> DesignIndex::evaluate_partial(const drawing::Drawing& d) const {
  const auto facts = extract_facts(d, parser_);
  return similarity::evaluate_partial(patterns_, evidence(facts, parser_), parser_.proof_depth);
}

std::vector<similarity::Score> DesignIndex::rank_query(const similarity::Query& q, double alpha,
                                                       std::size_t k) const {
  std::vector<similarity::Candidate> cands;
  cands.reserve(designs_.size());
  for (const auto& [id, rec] : designs_)
    cands.push_back({id, &rec.features, rec.visual ? &*rec.visual : nullptr});
  return similarity::rank(q, cands, alpha, k);
}

std::vector<similarity::Score> DesignIndex::rank_full(const drawing::Drawing& q, double alpha,
                                                      std::size_t k) const {
  q.validate();
  if (!q.fully_specified())
    throw ValidationError("query has open cells; use the partial query");
  similarity::Query query;
  query.features = vectorize(q);
  query.visual = q.visual_features;
  return rank_query(query, alpha, k);
}

std::vector<similarity::Score> DesignIndex::rank_partial(const drawing::Drawing& q, double alpha,
                                                         std::size_t k) const {
  q.validate();
  similarity::Query query;
  query.partial = evaluate_partial(q);
  query.visual = q.visual_features;
  return rank_query(query, alpha, k);
}

std::vector<similarity::Score> DesignIndex::rank(const drawing::Drawing& q, double alpha,
                                                 std::size_t k) const {
  return q.fully_specified() ? rank_full(q, alpha, k) : rank_partial(q, alpha, k);
}

DesignIndex build_index(const std::vector<drawing::Drawing>& drawings, const ParserModel& parser,
                        const ilp::Bias& mining_bias, const patterns::MiningParams& params) {
  std::vector<logic::FactSet> facts;
  facts.reserve(drawings.size());
  for (const auto& d : drawings) {
    d.validate();
    facts.push_back(extract_facts(d, parser));
  }
  std::vector<patterns::Evidence> corpus;
  for (const auto& f : facts) corpus.push_back(evidence(f, parser));
  DesignIndex index(patterns::mine(corpus, mining_bias, params), parser);
  for (const auto& d : drawings) index.add_design(d);
  return index;
}

std::string persist_to_string(const DesignIndex& index) {
  json designs = json::array();
  for (const auto& [id, rec] : index.designs()) {
    designs.push_back({{"id", rec.id},
                       {"digest", rec.digest},
                       {"facts", facts_to_text(rec.facts)},
                       {"features", bits_to_text(rec.features)},
                       {"visual", rec.visual ? json(*rec.visual) : json(nullptr)}});
  }
  json payload = {{"revision", index.revision()},
                  {"patterns", patterns::to_text(index.patterns())},
                  {"parser", to_json(index.parser())},
                  {"designs", designs}};
  const std::string body = payload.dump();
  json doc = {{"format", "tdassist-index"},
              {"version", kFormatVersion},
              {"digest", sha256_hex(body)},
              {"payload", body}};
  return doc.dump() + "\n";
}

// Rebuilds an index from its parts without re-running the parser.
class IndexLoader {
 public:
  static DesignIndex load(const json& payload);
};

DesignIndex IndexLoader::load(const json& payload) {
  DesignIndex index(patterns::parse_pattern_set(payload.at("patterns").get<std::string>()),
                    parser_from_json(payload.at("parser")));
  for (const auto& d : payload.at("designs")) {
    IndexedDesign rec;
    rec.id = d.at("id").get<std::string>();
    rec.digest = d.at("digest").get<std::string>();
    rec.facts = logic::FactSet(logic::parse_facts(d.at("facts").get<std::string>()));
    rec.features = bits_from_text(d.at("features").get<std::string>());
    if (!d.at("visual").is_null()) rec.visual = d.at("visual").get<std::vector<double>>();
    if (rec.features.size() != index.patterns_.size())
      throw IntegrityError("design '" + rec.id + "' has a feature vector of the wrong length");
    if (!index.designs_.emplace(rec.id, rec).second)
      throw IntegrityError("duplicate design '" + rec.id + "'");
  }
  index.revision_ = payload.at("revision").get<std::uint64_t>();
  return index;
}

DesignIndex load_from_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("index file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "tdassist-index")
    throw IntegrityError("not an index file");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw IntegrityError("index file has no format version");
  const int version = doc["version"].get<int>();
  if (version != kFormatVersion)
    throw MigrationError("index format version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  if (!doc.contains("payload") || !doc["payload"].is_string() || !doc.contains("digest"))
    throw IntegrityError("index file lacks payload or digest");
  const auto& body = doc["payload"].get_ref<const std::string&>();
  if (sha256_hex(body) != doc["digest"].get<std::string>())
    throw IntegrityError("index payload digest mismatch");
  try {
    return IndexLoader::load(json::parse(body));
  } catch (const IntegrityError&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrityError(std::string("malformed index payload: ") + e.what());
  }
}

void persist(const DesignIndex& index, const std::string& path) {
  const auto text = persist_to_string(index);
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp + "'");
    out << text;
    if (!out) throw ValidationError("failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ValidationError("cannot replace '" + path + "'");
}

DesignIndex load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("not-found", "cannot open index '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_from_string(ss.str());
}

json ranking_to_json(const std::vector<similarity::Score>& scores) {
  json out = json::array();
  for (const auto& s : scores)
    out.push_back({{"id", s.id},
                   {"sim_tabular", s.sim_tabular},
                   {"sim_visual", s.sim_visual ? json(*s.sim_visual) : json(nullptr)},
                   {"combined", s.combined},
                   {"rank", s.rank}});
  return out;
}

json patterns_to_json(const patterns::PatternSet& s) {
  json list = json::array();
  for (const auto& p : s.patterns) list.push_back({{"pattern", p.key}, {"support", p.support}});
  return {{"corpus_size", s.corpus_size}, {"patterns", list}};
}

json provenance_to_json(const patterns::PatternSet& s,
                        const std::vector<similarity::TriState>& states) {
  json out = json::array();
  for (std::size_t i = 0; i < s.size() && i < states.size(); ++i)
    out.push_back({{"pattern", s.patterns[i].key}, {"state", similarity::to_string(states[i])}});
  return out;
}

}  // namespace tdassist::index
