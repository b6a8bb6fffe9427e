#include "mortem/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mortem/error.hpp"

namespace mortem {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::ngram: return "ngram";
    case FeatureKind::clt: return "clt";
    case FeatureKind::combined: return "combined";
  }
  return "ngram";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "ngram") return FeatureKind::ngram;
  if (text == "clt") return FeatureKind::clt;
  if (text == "combined") return FeatureKind::combined;
  throw Error("unknown feature kind '" + std::string(text) + "' (expected ngram|clt|combined)");
}

std::size_t FeatureSpace::full_dimension() const {
  return (vocabulary ? vocabulary->size() : 0) + (clt ? clt->size() : 0);
}

std::size_t FeatureSpace::dimension() const {
  return selection_mask ? selection_mask->size() : full_dimension();
}

std::string FeatureSpace::feature_name(std::size_t index) const {
  std::size_t full = index;
  if (selection_mask) full = selection_mask->at(index);
  const std::size_t vocab_size = vocabulary ? vocabulary->size() : 0;
  if (full < vocab_size) return vocabulary->term(full);
  if (clt && full - vocab_size < clt->size()) return clt->metric_names()[full - vocab_size];
  throw Error("feature index " + std::to_string(index) + " outside the feature space");
}

std::vector<std::string> FeatureSpace::clt_metric_names() const {
  return clt ? clt->metric_names() : std::vector<std::string>{};
}

FeatureSpace build_feature_space(FeatureKind kind, std::span<const Document> train,
                                 const TextConfig& text_config, const CltExtractor& clt) {
  FeatureSpace space;
  space.kind = kind;
  if (kind != FeatureKind::clt) space.vocabulary = build_vocabulary(train, text_config);
  if (kind != FeatureKind::ngram) space.clt = clt;
  return space;
}

FeatureVector compose_unmasked(std::string_view text, const FeatureSpace& space) {
  FeatureVector out;
  out.dimension = space.full_dimension();
  std::size_t offset = 0;
  if (space.vocabulary) {
    // An empty vocabulary contributes nothing rather than failing, so a
    // combined space still works on tiny corpora.
    if (!space.vocabulary->empty()) {
      out.entries = vectorize_tfidf(text, *space.vocabulary).entries;
    } else if (space.kind == FeatureKind::ngram) {
      throw Error("feature space has an empty vocabulary");
    }
    offset = space.vocabulary->size();
  }
  if (space.clt) {
    const auto values = space.clt->values(text);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] != 0.0) out.entries.push_back({offset + i, values[i]});
    }
  }
  return out;
}

FeatureVector apply_mask(const FeatureVector& vector, std::span<const std::size_t> mask) {
  FeatureVector out;
  out.dimension = mask.size();
  std::size_t m = 0;
  for (const auto& e : vector.entries) {
    while (m < mask.size() && mask[m] < e.index) ++m;
    if (m == mask.size()) break;
    if (mask[m] == e.index) out.entries.push_back({m, e.value});
  }
  return out;
}

FeatureVector compose(std::string_view text, const FeatureSpace& space) {
  auto full = compose_unmasked(text, space);
  if (!space.selection_mask) return full;
  return apply_mask(full, *space.selection_mask);
}

std::vector<FeatureVector> compose_all(std::span<const Document> documents, const FeatureSpace& space) {
  std::vector<FeatureVector> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(compose(d.text, space));
  return out;
}

std::vector<double> chi2_scores(std::span<const FeatureVector> vectors, std::span<const Label> labels) {
  if (vectors.size() != labels.size()) throw Error("chi2_scores: vectors and labels differ in length");
  if (vectors.empty()) throw Error("chi2_scores: no data");
  const std::size_t dim = vectors.front().dimension;
  std::vector<double> observed[2] = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  double class_count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int c = static_cast<int>(labels[i]);
    class_count[c] += 1.0;
    if (vectors[i].dimension != dim) throw Error("chi2_scores: inconsistent vector dimensions");
    for (const auto& e : vectors[i].entries) {
      if (e.value < 0.0) throw Error("chi2_scores: negative feature value");
      observed[c][e.index] += e.value;
    }
  }
  if (class_count[0] == 0.0 || class_count[1] == 0.0) {
    throw Error("chi2_scores: both classes must be present");
  }
  const double n = class_count[0] + class_count[1];
  std::vector<double> scores(dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    const double total = observed[0][d] + observed[1][d];
    if (total <= 0.0) continue;
    double score = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double expected = total * class_count[c] / n;
      const double diff = observed[c][d] - expected;
      score += diff * diff / expected;
    }
    scores[d] = score;
  }
  return scores;
}

std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k) {
  if (k == 0) throw Error("select_top_k: k must be at least 1");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(k, scores.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

Chi2Result chi2_select(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                       std::size_t k) {
  Chi2Result result;
  result.scores = chi2_scores(vectors, labels);
  result.selected_indices = select_top_k(result.scores, k);
  result.selected_k = result.selected_indices.size();
  return result;
}

SparseRowMatrix to_row_matrix(std::span<const FeatureVector> vectors) {
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().dimension;
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dimension != dim) throw Error("inconsistent feature vector dimensions");
    for (const auto& e : vectors[i].entries) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(e.index), e.value);
    }
  }
  SparseRowMatrix m(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace mortem
