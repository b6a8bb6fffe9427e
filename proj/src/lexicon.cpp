#include "mortem/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "mortem/error.hpp"
#include "resources.hpp"

namespace mortem {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool skip_line(std::string_view line) { return line.empty() || line.front() == '#'; }

}  // namespace

bool LexiconCategory::matches(std::string_view token) const {
  if (exact_terms.contains(std::string(token))) return true;
  for (const auto& prefix : prefix_terms) {
    if (token.starts_with(prefix)) return true;
  }
  return false;
}

Lexicon parse_lexicon(std::istream& in) {
  Lexicon lexicon;
  std::unordered_set<std::string> names;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (skip_line(line)) continue;
    const auto where = "lexicon line " + std::to_string(line_no) + ": ";
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw Error(where + "expected 'name: pattern, ...'");
    LexiconCategory category;
    category.name = std::string(trim(line.substr(0, colon)));
    if (category.name.empty()) throw Error(where + "empty category name");
    if (!names.insert(category.name).second) {
      throw Error(where + "duplicate category '" + category.name + "'");
    }
    std::string_view rest = line.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto pattern = lowercase(trim(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (pattern.empty()) continue;
      const auto star = pattern.find('*');
      if (star == std::string::npos) {
        category.exact_terms.insert(pattern);
      } else if (star + 1 == pattern.size() && star > 0) {
        category.prefix_terms.insert(pattern.substr(0, star));
      } else {
        throw Error(where + "malformed pattern '" + pattern + "' ('*' allowed only at the end)");
      }
    }
    lexicon.push_back(std::move(category));
  }
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon '" + path.string() + "'");
  return parse_lexicon(in);
}

const Lexicon& demo_lexicon() {
  static const Lexicon lexicon = [] {
    std::istringstream in{std::string(resources::demo_lexicon())};
    return parse_lexicon(in);
  }();
  return lexicon;
}

double category_proportion(std::span<const std::string> tokens, const LexiconCategory& category) {
  if (tokens.empty()) return 0.0;
  const auto matched = std::count_if(tokens.begin(), tokens.end(),
                                     [&](const std::string& t) { return category.matches(t); });
  return static_cast<double>(matched) / static_cast<double>(tokens.size());
}

SentimentLexicon::SentimentLexicon(std::map<std::string, double> valences) : valences_(std::move(valences)) {
  for (const auto& [token, v] : valences_) {
    if (!(v >= -4.0 && v <= 4.0)) throw Error("sentiment valence out of [-4, 4] for '" + token + "'");
  }
}

SentimentLexicon SentimentLexicon::parse(std::istream& in) {
  std::map<std::string, double> valences;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (skip_line(line)) continue;
    const auto where = "sentiment lexicon line " + std::to_string(line_no) + ": ";
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(where + "expected 'token<TAB>valence'");
    const auto token = lowercase(trim(line.substr(0, tab)));
    const std::string number(trim(line.substr(tab + 1)));
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(number, &used);
      if (used != number.size()) throw std::invalid_argument(number);
    } catch (const std::exception&) {
      throw Error(where + "invalid valence '" + number + "'");
    }
    if (!(value >= -4.0 && value <= 4.0)) throw Error(where + "valence outside [-4, 4]");
    valences[token] = value;
  }
  return SentimentLexicon(std::move(valences));
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sentiment lexicon '" + path.string() + "'");
  return parse(in);
}

const SentimentLexicon& SentimentLexicon::standard() {
  static const SentimentLexicon lexicon = [] {
    std::istringstream in{std::string(resources::sentiment_lexicon())};
    return parse(in);
  }();
  return lexicon;
}

std::optional<double> SentimentLexicon::valence(std::string_view token) const {
  const auto it = valences_.find(std::string(token));
  if (it == valences_.end()) return std::nullopt;
  return it->second;
}

NegationSet parse_negations(std::istream& in) {
  NegationSet out;
  std::string raw;
  while (std::getline(in, raw)) {
    const auto line = trim(raw);
    if (!skip_line(line)) out.insert(lowercase(line));
  }
  return out;
}

NegationSet load_negations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open negation list '" + path.string() + "'");
  return parse_negations(in);
}

const NegationSet& default_negations() {
  static const NegationSet set = [] {
    std::istringstream in{std::string(resources::negations())};
    return parse_negations(in);
  }();
  return set;
}

SentimentScores sentiment_scores(const TokenizedText& text, const SentimentLexicon& lexicon,
                                 const NegationSet& negations) {
  const auto& tokens = text.tokens;
  if (tokens.empty()) return {0.0, 0.0, 1.0};
  std::size_t positive = 0;
  std::size_t negative = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto v = lexicon.valence(tokens[i]);
    if (!v || *v == 0.0) continue;
    bool negated = false;
    for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
      if (negations.contains(tokens[i - back])) {
        negated = true;
        break;
      }
    }
    const double effective = negated ? -*v : *v;
    if (effective > 0.0) ++positive;
    if (effective < 0.0) ++negative;
  }
  const double n = static_cast<double>(tokens.size());
  SentimentScores s;
  s.pos = static_cast<double>(positive) / n;
  s.neg = static_cast<double>(negative) / n;
  s.neu = 1.0 - s.pos - s.neg;
  return s;
}

std::optional<double> CltProfile::get(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  return std::nullopt;
}

CltExtractor::CltExtractor(Lexicon lexicon, SentimentLexicon sentiment, NegationSet negations,
                           CltConfig config)
    : lexicon_(std::move(lexicon)),
      sentiment_(std::move(sentiment)),
      negations_(std::move(negations)),
      config_(config) {
  if (!(config_.word_count_cap > 0.0)) throw Error("word_count_cap must be positive");
  std::unordered_set<std::string> seen;
  for (const auto& c : lexicon_) {
    names_.push_back(c.name);
  }
  for (const char* fixed : {"unique_word_proportion", "question_mark_rate", "exclamation_mark_rate",
                            "word_count_norm", "sentiment_pos", "sentiment_neg", "sentiment_neu"}) {
    names_.emplace_back(fixed);
  }
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw Error("duplicate linguistic metric name '" + n + "'");
  }
}

const CltExtractor& CltExtractor::standard() {
  static const CltExtractor extractor(demo_lexicon(), SentimentLexicon::standard(), default_negations());
  return extractor;
}

std::vector<double> CltExtractor::values(std::string_view text) const {
  const auto tokenized = tokenize(text);
  const auto& tokens = tokenized.tokens;
  const double n = static_cast<double>(tokens.size());
  std::vector<double> out;
  out.reserve(names_.size());
  for (const auto& category : lexicon_) out.push_back(category_proportion(tokens, category));

  std::unordered_set<std::string_view> distinct(tokens.begin(), tokens.end());
  out.push_back(tokens.empty() ? 0.0 : static_cast<double>(distinct.size()) / n);
  const auto rate = [n](std::size_t count) {
    if (count == 0) return 0.0;
    return std::clamp(static_cast<double>(count) / (n + static_cast<double>(count)), 0.0, 1.0);
  };
  out.push_back(rate(tokenized.question_marks));
  out.push_back(rate(tokenized.exclamation_marks));
  out.push_back(std::min(1.0, n / config_.word_count_cap));
  const auto s = sentiment_scores(tokenized, sentiment_, negations_);
  out.push_back(s.pos);
  out.push_back(s.neg);
  out.push_back(s.neu);
  return out;
}

CltProfile CltExtractor::assemble(std::string_view text) const { return {names_, values(text)}; }

CltProfile assemble_clt(std::string_view text, const CltExtractor& extractor) {
  return extractor.assemble(text);
}

}  // namespace mortem
