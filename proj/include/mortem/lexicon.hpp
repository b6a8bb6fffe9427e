#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mortem/text.hpp"

namespace mortem {

struct LexiconCategory {
  std::string name;
  std::set<std::string> exact_terms;
  std::set<std::string> prefix_terms;  // patterns given as "prefix*"

  bool matches(std::string_view token) const;
};

/// Categories in file order.
using Lexicon = std::vector<LexiconCategory>;

/// Lines "category_name: pattern, pattern*, ...". Blank lines and lines
/// starting with '#' are skipped. '*' may only end a pattern.
Lexicon parse_lexicon(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& path);
const Lexicon& demo_lexicon();

double category_proportion(std::span<const std::string> tokens, const LexiconCategory& category);

class SentimentLexicon {
 public:
  SentimentLexicon() = default;
  explicit SentimentLexicon(std::map<std::string, double> valences);

  /// "token<TAB>valence" per line, valence in [-4, 4].
  static SentimentLexicon parse(std::istream& in);
  static SentimentLexicon load(const std::filesystem::path& path);
  static const SentimentLexicon& standard();

  std::optional<double> valence(std::string_view token) const;
  const std::map<std::string, double>& entries() const { return valences_; }

 private:
  std::map<std::string, double> valences_;
};

using NegationSet = std::set<std::string>;

NegationSet parse_negations(std::istream& in);
NegationSet load_negations(const std::filesystem::path& path);
const NegationSet& default_negations();

struct SentimentScores {
  double pos = 0.0;
  double neg = 0.0;
  double neu = 1.0;
};

/// Fractions of tokens with positive / negative effective valence. A valence
/// flips sign when any of the three preceding tokens is a negation.
SentimentScores sentiment_scores(const TokenizedText& text, const SentimentLexicon& lexicon,
                                 const NegationSet& negations = default_negations());

struct CltConfig {
  double word_count_cap = 200.0;
};

/// Named metrics in [0, 1], in the extractor's metric order.
struct CltProfile {
  std::vector<std::string> names;
  std::vector<double> values;

  std::optional<double> get(std::string_view name) const;
};

/// Computes the linguistic-tool metric block: one proportion per lexicon
/// category, followed by unique_word_proportion, question_mark_rate,
/// exclamation_mark_rate, word_count_norm, sentiment_pos, sentiment_neg,
/// sentiment_neu. Tokens are NOT stopworded here.
class CltExtractor {
 public:
  CltExtractor(Lexicon lexicon, SentimentLexicon sentiment, NegationSet negations,
               CltConfig config = {});

  /// Demo lexicon, shipped sentiment lexicon and negations, default config.
  static const CltExtractor& standard();

  const std::vector<std::string>& metric_names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  CltProfile assemble(std::string_view text) const;
  std::vector<double> values(std::string_view text) const;

  const Lexicon& lexicon() const { return lexicon_; }
  const SentimentLexicon& sentiment() const { return sentiment_; }
  const NegationSet& negations() const { return negations_; }
  const CltConfig& config() const { return config_; }

 private:
  Lexicon lexicon_;
  SentimentLexicon sentiment_;
  NegationSet negations_;
  CltConfig config_;
  std::vector<std::string> names_;
};

CltProfile assemble_clt(std::string_view text, const CltExtractor& extractor);

}  // namespace mortem
