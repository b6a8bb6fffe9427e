#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mortem/corpus.hpp"
#include "mortem/features.hpp"
#include "mortem/lexicon.hpp"
#include "mortem/models.hpp"
#include "mortem/statistics.hpp"

namespace mortem {

/// Confusion counts and metrics with post as the positive class.
struct EvalMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

EvalMetrics confusion_and_metrics(std::span<const Label> y_true, std::span<const Label> y_pred);

/// Everything needed to fit a model from documents.
struct PipelineConfig {
  UnitKind unit = UnitKind::profile;
  ModelKind model = ModelKind::lr;
  FeatureKind features = FeatureKind::combined;
  std::optional<std::size_t> select_k;
  TextConfig text;
  Hyperparameters hyperparameters;

  std::string describe() const;
};

nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig pipeline_from_json(const nlohmann::json& j);

/// Fits feature space, chi-squared mask and model on `train` only.
TrainedModel fit_pipeline(const PipelineConfig& config, std::span<const Document> train,
                          const CltExtractor& clt = CltExtractor::standard());

struct FoldReport {
  EvalMetrics metrics;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t vocabulary_fingerprint = 0;  // 0 when the space has no vocabulary
};

struct MeanMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct CvReport {
  PipelineConfig config;
  std::vector<FoldReport> folds;
  MeanMetrics mean;
  std::size_t fold_count = 0;
  std::uint64_t seed = 0;

  std::vector<double> fold_f1() const;
};

/// When `misclassified` is set, every held-out error is written to it as a
/// JSONL row (see export_misclassified) with an extra "fold" field.
CvReport cross_validate(const PipelineConfig& config, std::span<const Document> documents,
                        std::size_t k, std::uint64_t seed,
                        const CltExtractor& clt = CltExtractor::standard(),
                        std::ostream* misclassified = nullptr);

struct GridResult {
  std::size_t best = 0;
  std::vector<CvReport> reports;

  const CvReport& best_report() const { return reports.at(best); }
};

/// Highest mean F1 wins; ties go to the earlier grid entry.
GridResult grid_search(std::span<const PipelineConfig> grid, std::span<const Document> documents,
                       std::size_t k, std::uint64_t seed,
                       const CltExtractor& clt = CltExtractor::standard());

/// The default hyperparameter grid for one model kind, crossed with the
/// given selection sizes (an empty list means "no selection").
std::vector<PipelineConfig> default_grid(const PipelineConfig& base,
                                         std::span<const std::size_t> select_ks = {});

nlohmann::json to_json(const EvalMetrics& metrics);
nlohmann::json to_json(const CvReport& report);
nlohmann::json to_json(const GridResult& result);
CvReport cv_report_from_json(const nlohmann::json& j);

struct CurvePoint {
  std::int64_t key = 0;  // m (post-mortem comment count) or day since death
  double fraction = 0.0;
};

struct EarlyDetectionCurve {
  std::vector<CurvePoint> by_count;  // m = 1 .. max post comments
  std::vector<CurvePoint> by_time;   // day = 0 .. last detection-relevant day
  std::size_t test_profiles = 0;     // evaluated post-mortem test profiles
  std::size_t detected = 0;
  std::vector<std::string> excluded;  // death time but no post-mortem comments
  std::size_t flagged_before_death = 0;  // predicted post on pre-mortem text alone

  double fraction_at_count(std::int64_t m) const;
  double fraction_at_day(std::int64_t day) const;
};

/// Replays each post-mortem test profile: pre-mortem comments first, then
/// post-mortem comments appended one at a time. Detection is the first
/// append classified post and is never revoked.
EarlyDetectionCurve early_detection(const TrainedModel& model, std::span<const Profile> test_profiles);
EarlyDetectionCurve early_detection(std::span<const Profile> train_profiles,
                                    std::span<const Profile> test_profiles,
                                    const PipelineConfig& config,
                                    const CltExtractor& clt = CltExtractor::standard());

nlohmann::json to_json(const EarlyDetectionCurve& curve);
/// "m,fraction" section, blank line, "day,fraction" section.
void write_curve_csv(const EarlyDetectionCurve& curve, std::ostream& out);

/// Fraction of documents predicted post. Input must be non-empty and
/// contain no document labeled pre.
double recall_only_eval(const TrainedModel& model, std::span<const Document> positives);

/// Writes false positives and negatives as JSONL rows
/// {source_id, true, predicted, score, text}, in input order. Returns the
/// number of rows.
std::size_t export_misclassified(const TrainedModel& model, std::span<const Document> documents,
                                 std::ostream& out);
std::size_t export_misclassified(const TrainedModel& model, std::span<const Document> documents,
                                 const std::filesystem::path& path);

}  // namespace mortem
