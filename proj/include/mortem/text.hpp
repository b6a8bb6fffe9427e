#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mortem/corpus.hpp"

namespace mortem {

struct TokenizedText {
  std::vector<std::string> tokens;
  std::size_t question_marks = 0;
  std::size_t exclamation_marks = 0;

  std::size_t total_tokens() const { return tokens.size(); }
};

/// Lowercased word tokens: maximal runs of letters/digits (bytes >= 0x80 count
/// as letters so UTF-8 words survive intact), with apostrophes kept when they
/// sit between two word characters. A period between two letters is deleted
/// before splitting, so "R.I.P." becomes "rip".
TokenizedText tokenize(std::string_view text);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// One token per line; blank lines and '#' comments ignored.
  static StopwordList parse(std::istream& in);

  /// The shipped English list (data/stopwords.txt).
  static const StopwordList& english();

  bool contains(std::string_view token) const { return words_.contains(std::string(token)); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const StopwordList& stopwords = StopwordList::english());

/// Contiguous n-grams for every n in [min_n, max_n], joined by one space.
/// Grouped by n ascending, then by position.
std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int min_n, int max_n);

struct TextConfig {
  int ngram_max = 3;
  std::size_t min_df = 2;
  bool remove_stopwords = true;
};

/// tokenize -> optional stopword removal -> n-grams 1..ngram_max.
std::vector<std::string> analyze(std::string_view text, const TextConfig& config);

struct FeatureEntry {
  std::size_t index = 0;
  double value = 0.0;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sparse nonnegative vector with strictly increasing indices.
struct FeatureVector {
  std::size_t dimension = 0;
  std::vector<FeatureEntry> entries;

  double at(std::size_t index) const;
  double norm() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// N-gram index with smoothed idf: idf(t) = ln((1 + N) / (1 + df(t))) + 1.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Rebuilds a vocabulary from persisted parts.
  Vocabulary(std::vector<std::string> terms, std::vector<double> idf,
             std::vector<std::size_t> document_frequency, TextConfig config,
             std::size_t document_count);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  std::optional<std::size_t> index_of(std::string_view ngram) const;
  const std::string& term(std::size_t index) const { return terms_.at(index); }
  double idf(std::size_t index) const { return idf_.at(index); }
  std::size_t document_frequency(std::size_t index) const { return df_.at(index); }
  const TextConfig& config() const { return config_; }
  std::size_t document_count() const { return document_count_; }

  std::span<const std::string> terms() const { return terms_; }
  std::span<const double> idf_values() const { return idf_; }
  std::span<const std::size_t> document_frequencies() const { return df_; }

  /// FNV-1a over terms, document frequencies and N. Identifies a fitted state.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  TextConfig config_;
  std::size_t document_count_ = 0;
};

/// Indexes n-grams with df >= min_df. Index order: documents in input order,
/// each document contributing its not-yet-indexed n-grams in lexicographic
/// order. An empty result is allowed here; vectorizing against it throws.
Vocabulary build_vocabulary(std::span<const std::string> train_texts, const TextConfig& config);
Vocabulary build_vocabulary(std::span<const Document> train_documents, const TextConfig& config);

/// count * idf per in-vocabulary n-gram, then L2 normalization. Vectors with
/// no in-vocabulary n-gram stay all-zero.
FeatureVector vectorize_tfidf(std::string_view text, const Vocabulary& vocabulary);

}  // namespace mortem
