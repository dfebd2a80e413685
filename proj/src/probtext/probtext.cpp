#include "tdassist/probtext.hpp"

#include <algorithm>
#include <cmath>

#include "tdassist/error.hpp"

namespace tdassist::probtext {

CharDistribution::CharDistribution(std::vector<std::pair<char32_t, double>> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("character distribution has no entries");
  double sum = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double p = entries_[i].second;
    if (!(p > 0.0 && p <= 1.0))
      throw ValidationError("character probability outside (0,1]: " + std::to_string(p));
    for (std::size_t j = 0; j < i; ++j)
      if (entries_[j].first == entries_[i].first)
        throw ValidationError("character repeated in distribution");
    sum += p;
  }
  if (sum > 1.0 + 1e-9) throw ValidationError("character distribution sums to " + std::to_string(sum));
}

double CharDistribution::probability(char32_t ch) const {
  for (const auto& [c, p] : entries_)
    if (c == ch) return p;
  return 0.0;
}

bool CharDistribution::contains(char32_t ch) const {
  return std::any_of(entries_.begin(), entries_.end(), [ch](const auto& e) { return e.first == ch; });
}

double CharDistribution::total() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

char32_t CharDistribution::argmax() const {
  if (entries_.empty()) throw ValidationError("argmax of empty distribution");
  // First entry wins ties.
  auto best = entries_.begin();
  for (auto it = entries_.begin(); it != entries_.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

std::string ProbString::argmax_string() const {
  std::u32string out;
  for (const auto& p : positions) out.push_back(p.argmax());
  return utf8_encode(out);
}

void EditPenalties::validate() const {
  for (double p : {p_insert, p_delete, p_substitute})
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("edit penalty outside (0,1)");
}

double prob_levenshtein(std::u32string_view candidate, const ProbString& obs,
                        const EditPenalties& pen) {
  pen.validate();
  for (const auto& pos : obs.positions)
    if (pos.entries().empty()) throw ValidationError("observation position with empty distribution");
  if (candidate.empty() && obs.length() != 0)
    throw ValidationError("empty candidate against a non-empty observation");

  const std::size_t rows = candidate.size() + 1;
  const std::size_t cols = obs.length() + 1;
  // Index shifted by one: cell (i,j) holds S(i-1, j-1).
  std::vector<double> s(rows * cols, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return s[i * cols + j]; };
  at(0, 0) = 1.0;
  for (std::size_t i = 1; i < rows; ++i) {
    for (std::size_t j = 1; j < cols; ++j) {
      double best = std::max(pen.p_delete * at(i - 1, j), pen.p_insert * at(i, j - 1));
      double emit = 0.0;
      for (const auto& [ch, p] : obs.positions[j - 1].entries())
        emit = std::max(emit, p * (ch == candidate[i - 1] ? 1.0 : pen.p_substitute));
      best = std::max(best, emit * at(i - 1, j - 1));
      at(i, j) = best;
    }
  }
  return at(rows - 1, cols - 1);
}

double prob_levenshtein(std::string_view candidate_utf8, const ProbString& obs,
                        const EditPenalties& pen) {
  return prob_levenshtein(utf8_decode(candidate_utf8), obs, pen);
}

std::vector<Match> best_match(const std::vector<std::string>& candidates, const ProbString& obs,
                              const EditPenalties& pen) {
  if (candidates.empty()) throw ValidationError("no candidates to match");
  std::vector<Match> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(Match{c, prob_levenshtein(c, obs, pen)});
  std::stable_sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.candidate < b.candidate;
  });
  return out;
}

CharDistribution virtual_evidence_posterior(const CharDistribution& prior,
                                            const CharDistribution& ocr) {
  std::vector<std::pair<char32_t, double>> joint;
  double norm = 0.0;
  for (const auto& [ch, p] : ocr.entries()) {
    const double q = prior.probability(ch);
    if (q <= 0.0) continue;
    joint.emplace_back(ch, p * q);
    norm += p * q;
  }
  if (joint.empty() || norm <= 0.0)
    throw ValidationError("no-overlap", "prior and OCR distributions share no character");
  for (auto& e : joint) e.second /= norm;
  return CharDistribution(std::move(joint));
}

CharDistribution type_prior(const std::vector<char32_t>& ocr_support, const CharClass& char_class,
                            double ratio) {
  if (ocr_support.empty()) throw ValidationError("type prior over an empty support");
  if (!(ratio >= 1.0)) throw ValidationError("type prior ratio must be >= 1");
  std::vector<std::pair<char32_t, double>> weights;
  double total = 0.0;
  for (char32_t ch : ocr_support) {
    const double w = char_class(ch) ? ratio : 1.0;
    weights.emplace_back(ch, w);
    total += w;
  }
  for (auto& w : weights) w.second /= total;
  return CharDistribution(std::move(weights));
}

CharClass char_class(std::string_view name) {
  if (name == "digit") return [](char32_t c) { return c >= U'0' && c <= U'9'; };
  if (name == "upper_alpha") return [](char32_t c) { return c >= U'A' && c <= U'Z'; };
  if (name == "alnum")
    return [](char32_t c) {
      return (c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z');
    };
  throw ConfigError("unknown character class '" + std::string(name) + "'");
}

std::string correct_with_type(const ProbString& obs, const CharClass& cls, double ratio) {
  std::u32string out;
  for (const auto& pos : obs.positions) {
    std::vector<char32_t> support;
    for (const auto& e : pos.entries()) support.push_back(e.first);
    out.push_back(virtual_evidence_posterior(type_prior(support, cls, ratio), pos).argmax());
  }
  return utf8_encode(out);
}

std::u32string utf8_decode(std::string_view text) {
  std::u32string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int extra;
    char32_t cp;
    if (b0 < 0x80) {
      extra = 0;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      cp = b0 & 0x07;
    } else {
      throw ParseError("invalid UTF-8 lead byte");
    }
    if (i + static_cast<std::size_t>(extra) >= text.size() && extra > 0)
      throw ParseError("truncated UTF-8 sequence");
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) throw ParseError("invalid UTF-8 continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw ParseError("invalid code point");
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  for (char32_t cp : text) out += utf8_encode(cp);
  return out;
}

}  // namespace tdassist::probtext
