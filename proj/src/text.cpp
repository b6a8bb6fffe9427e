#include "mortem/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include "mortem/error.hpp"
#include "resources.hpp"

namespace mortem {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_letter_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  std::string current;
  const auto at = [&](std::size_t i) -> unsigned char {
    return i < text.size() ? static_cast<unsigned char>(text[i]) : 0;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = at(i);
    if (c == '?') ++out.question_marks;
    if (c == '!') ++out.exclamation_marks;
    if (is_word_byte(c)) {
      current.push_back(lower(c));
      continue;
    }
    const bool inside = !current.empty() && is_word_byte(at(i + 1));
    if (c == '.' && inside && is_letter_byte(at(i - 1)) && is_letter_byte(at(i + 1))) {
      continue;  // "r.i.p" -> "rip"
    }
    if (c == '\'' && inside) {
      current.push_back('\'');
      continue;
    }
    if (!current.empty()) {
      out.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.tokens.push_back(std::move(current));
  return out;
}

StopwordList StopwordList::parse(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto word = trim(line);
    if (word.empty() || word.front() == '#') continue;
    std::string lowered(word);
    for (auto& ch : lowered) ch = lower(static_cast<unsigned char>(ch));
    words.insert(std::move(lowered));
  }
  return StopwordList(std::move(words));
}

const StopwordList& StopwordList::english() {
  static const StopwordList list = [] {
    std::istringstream in{std::string(resources::stopwords())};
    return parse(in);
  }();
  return list;
}

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const StopwordList& stopwords) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (!stopwords.contains(token)) kept.push_back(token);
  }
  return kept;
}

std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int min_n, int max_n) {
  std::vector<std::string> ngrams;
  for (int n = std::max(min_n, 1); n <= max_n; ++n) {
    const auto width = static_cast<std::size_t>(n);
    if (tokens.size() < width) break;
    for (std::size_t start = 0; start + width <= tokens.size(); ++start) {
      std::string gram = tokens[start];
      for (std::size_t j = 1; j < width; ++j) {
        gram.push_back(' ');
        gram += tokens[start + j];
      }
      ngrams.push_back(std::move(gram));
    }
  }
  return ngrams;
}

std::vector<std::string> analyze(std::string_view text, const TextConfig& config) {
  auto tokens = tokenize(text).tokens;
  if (config.remove_stopwords) tokens = remove_stopwords(tokens);
  return extract_ngrams(tokens, 1, config.ngram_max);
}

double FeatureVector::at(std::size_t index) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const FeatureEntry& e, std::size_t i) { return e.index < i; });
  return (it != entries.end() && it->index == index) ? it->value : 0.0;
}

double FeatureVector::norm() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.value * e.value;
  return std::sqrt(sum);
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<double> idf,
                       std::vector<std::size_t> document_frequency, TextConfig config,
                       std::size_t document_count)
    : terms_(std::move(terms)),
      idf_(std::move(idf)),
      df_(std::move(document_frequency)),
      config_(config),
      document_count_(document_count) {
  if (idf_.size() != terms_.size() || df_.size() != terms_.size()) {
    throw Error("vocabulary: terms, idf and df lengths differ");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) throw Error("vocabulary: duplicate term '" + terms_[i] + "'");
    if (!(idf_[i] > 0.0) || !std::isfinite(idf_[i])) throw Error("vocabulary: idf must be positive");
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view ngram) const {
  const auto it = index_.find(std::string(ngram));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ULL;
  const auto mix = [&hash](std::string_view bytes) {
    for (const char c : bytes) {
      hash ^= static_cast<unsigned char>(c);
      hash *= 1099511628211ULL;
    }
  };
  const auto mix_number = [&](std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    mix(std::string_view(buf, 8));
  };
  mix_number(document_count_);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    mix(terms_[i]);
    mix(std::string_view("\0", 1));
    mix_number(df_[i]);
  }
  return hash;
}

Vocabulary build_vocabulary(std::span<const std::string> train_texts, const TextConfig& config) {
  if (train_texts.empty()) throw Error("build_vocabulary: empty training corpus");

  std::vector<std::vector<std::string>> per_document;
  per_document.reserve(train_texts.size());
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& text : train_texts) {
    auto grams = analyze(text, config);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (const auto& g : grams) ++df[g];
    per_document.push_back(std::move(grams));
  }

  const std::size_t n = train_texts.size();
  std::vector<std::string> terms;
  std::vector<double> idf;
  std::vector<std::size_t> dfs;
  std::unordered_set<std::string> seen;
  for (const auto& grams : per_document) {
    for (const auto& g : grams) {
      const std::size_t count = df.at(g);
      if (count < config.min_df || !seen.insert(g).second) continue;
      terms.push_back(g);
      dfs.push_back(count);
      idf.push_back(std::log((1.0 + static_cast<double>(n)) / (1.0 + static_cast<double>(count))) + 1.0);
    }
  }
  return Vocabulary(std::move(terms), std::move(idf), std::move(dfs), config, n);
}

Vocabulary build_vocabulary(std::span<const Document> train_documents, const TextConfig& config) {
  std::vector<std::string> texts;
  texts.reserve(train_documents.size());
  for (const auto& d : train_documents) texts.push_back(d.text);
  return build_vocabulary(texts, config);
}

FeatureVector vectorize_tfidf(std::string_view text, const Vocabulary& vocabulary) {
  if (vocabulary.empty()) throw Error("vectorize_tfidf: vocabulary is empty");
  std::map<std::size_t, double> counts;
  for (const auto& gram : analyze(text, vocabulary.config())) {
    if (const auto index = vocabulary.index_of(gram)) counts[*index] += 1.0;
  }
  FeatureVector out;
  out.dimension = vocabulary.size();
  out.entries.reserve(counts.size());
  double sum_sq = 0.0;
  for (const auto& [index, count] : counts) {
    const double value = count * vocabulary.idf(index);
    out.entries.push_back({index, value});
    sum_sq += value * value;
  }
  if (sum_sq > 0.0) {
    const double scale = 1.0 / std::sqrt(sum_sq);
    for (auto& e : out.entries) e.value *= scale;
  }
  return out;
}

}  // namespace mortem
