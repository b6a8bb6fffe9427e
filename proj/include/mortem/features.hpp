#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "mortem/corpus.hpp"
#include "mortem/lexicon.hpp"
#include "mortem/text.hpp"

namespace mortem {

enum class FeatureKind { ngram, clt, combined };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

/// The fitted input space of a model: n-gram TF-IDF block, linguistic-tool
/// block, or both concatenated as [ngram | clt]. An optional selection mask
/// (sorted indices into the full space) is applied last.
struct FeatureSpace {
  FeatureKind kind = FeatureKind::ngram;
  std::optional<Vocabulary> vocabulary;
  std::optional<CltExtractor> clt;
  std::optional<std::vector<std::size_t>> selection_mask;

  std::size_t full_dimension() const;
  std::size_t dimension() const;

  /// Name of a (masked) dimension: the n-gram itself or the metric name.
  std::string feature_name(std::size_t index) const;
  std::vector<std::string> clt_metric_names() const;
};

/// Fits the vocabulary (when the kind needs one) on the training texts only.
FeatureSpace build_feature_space(FeatureKind kind, std::span<const Document> train,
                                 const TextConfig& text_config,
                                 const CltExtractor& clt = CltExtractor::standard());

FeatureVector compose_unmasked(std::string_view text, const FeatureSpace& space);
FeatureVector compose(std::string_view text, const FeatureSpace& space);
std::vector<FeatureVector> compose_all(std::span<const Document> documents, const FeatureSpace& space);

/// Keeps the dimensions listed in `mask` (sorted) and re-indexes densely.
FeatureVector apply_mask(const FeatureVector& vector, std::span<const std::size_t> mask);

struct Chi2Result {
  std::vector<double> scores;
  std::size_t selected_k = 0;
  std::vector<std::size_t> selected_indices;
};

/// Per dimension: O_c = sum of values over class c, E_c = (O_pre + O_post) *
/// n_c / n, score = sum_c (O_c - E_c)^2 / E_c. Zero-total dimensions score 0.
std::vector<double> chi2_scores(std::span<const FeatureVector> vectors, std::span<const Label> labels);

/// Indices of the k highest scores (ties to the lower index), returned sorted
/// ascending. k larger than the dimension selects everything.
std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k);

Chi2Result chi2_select(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                       std::size_t k);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Stacks vectors as rows. All vectors must share one dimension.
SparseRowMatrix to_row_matrix(std::span<const FeatureVector> vectors);

}  // namespace mortem
