#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mortem/corpus.hpp"
#include "mortem/features.hpp"
#include "mortem/text.hpp"

namespace mortem {

enum class ModelKind { baseline, nb, lr, svm, gbt };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// score is P(post) for nb/lr/gbt, the margin for svm, and 0/1 for the
/// baseline. Ties go to post (score >= 0.5, or margin >= 0).
struct Prediction {
  Label label = Label::pre;
  double score = 0.0;
};

struct Hyperparameters {
  double nb_alpha = 1.0;
  double lr_lambda = 1e-3;
  double lr_tol = 1e-6;
  std::size_t lr_max_iter = 5000;
  double svm_c = 1.0;
  double svm_tol = 1e-8;
  std::size_t svm_max_sweeps = 20000;
  int gbt_depth = 3;
  int gbt_rounds = 100;
  double gbt_learning_rate = 0.3;
};

struct OptimizerTrace {
  bool converged = false;
  std::size_t iterations = 0;
  double final_criterion = 0.0;  // gradient max-norm (lr) or max dual violation (svm)
};

/// Multinomial naive Bayes. Row 0 is pre, row 1 is post.
struct NaiveBayesModel {
  Eigen::Vector2d log_prior = Eigen::Vector2d::Zero();
  Eigen::MatrixXd log_likelihood;  // 2 x D, each row sums (in exp space) to 1
  double alpha = 1.0;
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double margin(const FeatureVector& x) const;
};

struct LogisticFit {
  LinearModel model;
  OptimizerTrace trace;
};

struct SvmFit {
  LinearModel model;
  Eigen::VectorXd dual;  // one alpha per training point, 0 <= alpha <= C
  OptimizerTrace trace;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output (already scaled by the learning rate)
  double gain = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(const FeatureVector& x) const;
};

struct BoostedTrees {
  double base_score = 0.0;  // initial log-odds
  double learning_rate = 0.3;
  int depth = 3;
  std::vector<RegressionTree> trees;
  std::vector<double> training_loss;  // mean logistic loss after each round

  double raw_score(const FeatureVector& x) const;
};

/// Mean logistic loss plus (lambda/2)|w|^2 over parameters [w; b], with
/// y = +1 for post and -1 for pre. The bias is not regularized.
class LogisticObjective {
 public:
  LogisticObjective(const SparseRowMatrix& x, std::span<const Label> labels, double lambda);

  std::size_t parameter_count() const { return static_cast<std::size_t>(x_.cols()) + 1; }
  double value(const Eigen::VectorXd& params) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
  double value_and_gradient(const Eigen::VectorXd& params, Eigen::VectorXd& gradient) const;

 private:
  const SparseRowMatrix& x_;
  Eigen::VectorXd y_;
  double lambda_;
};

Prediction baseline_predict(std::string_view text);

NaiveBayesModel train_nb(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                         double alpha);
LogisticFit train_lr(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                     double lambda, double tol = 1e-6, std::size_t max_iter = 5000);
SvmFit train_svm(std::span<const FeatureVector> vectors, std::span<const Label> labels, double c,
                 double tol = 1e-8, std::size_t max_sweeps = 20000);
BoostedTrees train_gbt(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                       int depth, int rounds, double learning_rate);

/// SVM objectives over the bias-augmented inputs [x; 1].
double svm_primal_objective(const SparseRowMatrix& x, std::span<const Label> labels,
                            const LinearModel& model, double c);
double svm_dual_objective(const SparseRowMatrix& x, std::span<const Label> labels,
                          const Eigen::VectorXd& dual);

Prediction predict(const NaiveBayesModel& model, const FeatureVector& x);
Prediction predict_logistic(const LinearModel& model, const FeatureVector& x);
Prediction predict_margin(const LinearModel& model, const FeatureVector& x);
Prediction predict(const BoostedTrees& model, const FeatureVector& x);

using ModelParameters = std::variant<std::monostate, NaiveBayesModel, LinearModel, BoostedTrees>;

struct TrainedModel {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  ModelKind kind = ModelKind::baseline;
  UnitKind unit = UnitKind::profile;
  FeatureSpace space;
  Hyperparameters hyperparameters;
  ModelParameters parameters;
  OptimizerTrace trace;
};

/// Trains the parameters for one model kind; baseline yields monostate.
ModelParameters train_parameters(ModelKind kind, const Hyperparameters& hyper,
                                 std::span<const FeatureVector> vectors,
                                 std::span<const Label> labels, OptimizerTrace* trace = nullptr);

/// Vector input; the baseline has no vector form and throws.
Prediction predict(const TrainedModel& model, const FeatureVector& x);

/// Composes the text through the model's feature space (or applies the
/// baseline rule) and predicts.
Prediction predict_text(const TrainedModel& model, std::string_view text);

using RankedFeature = std::pair<std::string, double>;

struct InformativeFeatures {
  std::vector<RankedFeature> post;
  std::vector<RankedFeature> pre;
  std::vector<RankedFeature> unsigned_ranking;  // gbt: total split gain
};

/// lr/svm: most positive weights (post) and most negative (pre). nb: log
/// theta_post / theta_pre in both directions. gbt: total split gain only.
InformativeFeatures informative_features(const TrainedModel& model, std::size_t k);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);

}  // namespace mortem
