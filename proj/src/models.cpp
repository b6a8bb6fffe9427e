#include "mortem/models.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "mortem/error.hpp"
#include "mortem/random.hpp"

namespace mortem {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::baseline: return "baseline";
    case ModelKind::nb: return "nb";
    case ModelKind::lr: return "lr";
    case ModelKind::svm: return "svm";
    case ModelKind::gbt: return "gbt";
  }
  return "baseline";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "baseline") return ModelKind::baseline;
  if (text == "nb") return ModelKind::nb;
  if (text == "lr") return ModelKind::lr;
  if (text == "svm") return ModelKind::svm;
  if (text == "gbt") return ModelKind::gbt;
  throw Error("unknown model kind '" + std::string(text) + "' (expected baseline|nb|lr|svm|gbt)");
}

namespace {

constexpr int kPre = static_cast<int>(Label::pre);
constexpr int kPost = static_cast<int>(Label::post);
constexpr std::uint64_t kSvmSweepSeed = 0x5eed5eedULL;

double sign_of(Label label) { return label == Label::post ? 1.0 : -1.0; }

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_training_input(std::span<const FeatureVector> vectors, std::span<const Label> labels) {
  if (vectors.size() != labels.size()) throw Error("training: vectors and labels differ in length");
  bool seen[2] = {false, false};
  for (const auto l : labels) seen[static_cast<int>(l)] = true;
  if (!seen[0] || !seen[1]) throw Error("training: both classes must be present (single-class input)");
}

Label label_for_probability(double p) { return p >= 0.5 ? Label::post : Label::pre; }

}  // namespace

double LinearModel::margin(const FeatureVector& x) const {
  if (x.dimension != static_cast<std::size_t>(weights.size())) {
    throw Error("dimension mismatch: model expects " + std::to_string(weights.size()) +
                ", vector has " + std::to_string(x.dimension));
  }
  double m = bias;
  for (const auto& e : x.entries) m += weights[static_cast<Eigen::Index>(e.index)] * e.value;
  return m;
}

Prediction baseline_predict(std::string_view text) {
  const auto tokens = tokenize(text).tokens;
  const bool hit = std::find(tokens.begin(), tokens.end(), "rip") != tokens.end();
  return {hit ? Label::post : Label::pre, hit ? 1.0 : 0.0};
}

// --- naive Bayes -----------------------------------------------------------

NaiveBayesModel train_nb(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                         double alpha) {
  check_training_input(vectors, labels);
  if (!(alpha > 0.0)) throw Error("train_nb: alpha must be positive");
  const auto x = to_row_matrix(vectors);
  const Eigen::Index dim = x.cols();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(2, dim);
  Eigen::Vector2d class_docs = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = static_cast<int>(labels[static_cast<std::size_t>(i)]);
    class_docs[c] += 1.0;
    for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) {
      if (it.value() < 0.0) throw Error("train_nb: negative feature value");
      counts(c, it.col()) += it.value();
    }
  }
  NaiveBayesModel model;
  model.alpha = alpha;
  model.log_prior = (class_docs / class_docs.sum()).array().log();
  model.log_likelihood.resize(2, dim);
  for (int c = 0; c < 2; ++c) {
    const double denom = counts.row(c).sum() + alpha * static_cast<double>(dim);
    model.log_likelihood.row(c) = ((counts.row(c).array() + alpha) / denom).log();
  }
  return model;
}

Prediction predict(const NaiveBayesModel& model, const FeatureVector& x) {
  if (x.dimension != static_cast<std::size_t>(model.log_likelihood.cols())) {
    throw Error("dimension mismatch: model expects " + std::to_string(model.log_likelihood.cols()) +
                ", vector has " + std::to_string(x.dimension));
  }
  double joint[2] = {model.log_prior[kPre], model.log_prior[kPost]};
  for (const auto& e : x.entries) {
    for (int c = 0; c < 2; ++c) {
      joint[c] += e.value * model.log_likelihood(c, static_cast<Eigen::Index>(e.index));
    }
  }
  const double p_post = sigmoid(joint[kPost] - joint[kPre]);
  return {label_for_probability(p_post), p_post};
}

// --- logistic regression -----------------------------------------------------

LogisticObjective::LogisticObjective(const SparseRowMatrix& x, std::span<const Label> labels,
                                     double lambda)
    : x_(x), y_(static_cast<Eigen::Index>(labels.size())), lambda_(lambda) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error("LogisticObjective: rows and labels differ in length");
  }
  if (x.rows() == 0) throw Error("LogisticObjective: no data");
  for (std::size_t i = 0; i < labels.size(); ++i) y_[static_cast<Eigen::Index>(i)] = sign_of(labels[i]);
}

double LogisticObjective::value_and_gradient(const Eigen::VectorXd& params,
                                             Eigen::VectorXd& gradient) const {
  const Eigen::Index dim = x_.cols();
  const auto w = params.head(dim);
  const double b = params[dim];
  const Eigen::VectorXd margins = (x_ * w).array() + b;
  const double n = static_cast<double>(x_.rows());
  double loss = 0.0;
  Eigen::VectorXd coef(x_.rows());
  for (Eigen::Index i = 0; i < x_.rows(); ++i) {
    const double z = y_[i] * margins[i];
    loss += softplus(-z);
    coef[i] = -y_[i] * sigmoid(-z) / n;
  }
  gradient.resize(dim + 1);
  gradient.head(dim) = x_.transpose() * coef + lambda_ * w;
  gradient[dim] = coef.sum();
  return loss / n + 0.5 * lambda_ * w.squaredNorm();
}

double LogisticObjective::value(const Eigen::VectorXd& params) const {
  Eigen::VectorXd unused;
  return value_and_gradient(params, unused);
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& params) const {
  Eigen::VectorXd g;
  value_and_gradient(params, g);
  return g;
}

LogisticFit train_lr(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                     double lambda, double tol, std::size_t max_iter) {
  check_training_input(vectors, labels);
  if (!(lambda >= 0.0)) throw Error("train_lr: lambda must be nonnegative");
  const auto x = to_row_matrix(vectors);
  const LogisticObjective objective(x, labels, lambda);

  // Limited-memory BFGS with Armijo backtracking.
  constexpr std::size_t kMemory = 10;
  const Eigen::Index n_params = x.cols() + 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd grad;
  double f = objective.value_and_gradient(theta, grad);
  if (!std::isfinite(f)) throw Error("train_lr: non-finite loss");
  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;

  LogisticFit fit;
  std::size_t iter = 0;
  double grad_max = grad.lpNorm<Eigen::Infinity>();
  while (grad_max > tol && iter < max_iter) {
    // Two-loop recursion for the search direction.
    Eigen::VectorXd q = grad;
    std::vector<double> alphas(s_hist.size());
    for (std::size_t j = s_hist.size(); j-- > 0;) {
      alphas[j] = rho_hist[j] * s_hist[j].dot(q);
      q -= alphas[j] * y_hist[j];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      gamma = 1.0 / std::max(1.0, grad.norm());
    }
    Eigen::VectorXd direction = gamma * q;
    for (std::size_t j = 0; j < s_hist.size(); ++j) {
      const double beta = rho_hist[j] * y_hist[j].dot(direction);
      direction += s_hist[j] * (alphas[j] - beta);
    }
    direction = -direction;
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      direction = -grad;
      slope = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    Eigen::VectorXd next_theta;
    Eigen::VectorXd next_grad;
    double next_f = f;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      next_theta = theta + step * direction;
      next_f = objective.value_and_gradient(next_theta, next_grad);
      if (std::isfinite(next_f) && next_f <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iter;
    if (!accepted) break;  // no further decrease representable

    Eigen::VectorXd s = next_theta - theta;
    Eigen::VectorXd y = next_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (s_hist.size() == kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    theta = std::move(next_theta);
    grad = std::move(next_grad);
    f = next_f;
    grad_max = grad.lpNorm<Eigen::Infinity>();
  }
  if (!std::isfinite(f)) throw Error("train_lr: non-finite loss");

  fit.model.weights = theta.head(x.cols());
  fit.model.bias = theta[x.cols()];
  fit.trace.converged = grad_max <= tol;
  fit.trace.iterations = iter;
  fit.trace.final_criterion = grad_max;
  return fit;
}

Prediction predict_logistic(const LinearModel& model, const FeatureVector& x) {
  const double p = sigmoid(model.margin(x));
  return {label_for_probability(p), p};
}

Prediction predict_margin(const LinearModel& model, const FeatureVector& x) {
  const double m = model.margin(x);
  return {m >= 0.0 ? Label::post : Label::pre, m};
}

// --- linear SVM ----------------------------------------------------------------

SvmFit train_svm(std::span<const FeatureVector> vectors, std::span<const Label> labels, double c,
                 double tol, std::size_t max_sweeps) {
  check_training_input(vectors, labels);
  if (!(c > 0.0)) throw Error("train_svm: C must be positive");
  const auto x = to_row_matrix(vectors);
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();

  // Dual coordinate descent for the hinge loss on inputs augmented with a
  // constant 1 (the last weight is the bias). Each sweep visits the active
  // points in a fresh permutation drawn from a fixed-seed generator, so runs
  // are reproducible; index order converges far too slowly on data grouped
  // by class.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim + 1);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q_diag(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q_diag[i] = x.row(i).squaredNorm() + 1.0;
    y[i] = sign_of(labels[static_cast<std::size_t>(i)]);
  }

  // Shrinking: a point at a bound whose gradient pushes further past the
  // previous sweep's extreme projected gradient leaves the active set. Each
  // time the active set meets the current stage tolerance (divided by ten per
  // stage, down to tol) every point is restored; convergence needs a full
  // sweep within tol.
  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Eigen::Index{0});
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double pg_max_old = kInf;
  double pg_min_old = -kInf;
  double stage_tol = std::max(tol, 0.1);
  Rng order_rng(kSvmSweepSeed);

  SvmFit fit;
  double violation = kInf;
  std::size_t sweep = 0;
  while (sweep < max_sweeps) {
    ++sweep;
    double pg_max = -kInf;
    double pg_min = kInf;
    std::size_t kept = 0;
    order_rng.shuffle(std::span<Eigen::Index>(active));
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Eigen::Index i = active[k];
      double wx = w[dim];
      for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) wx += w[it.col()] * it.value();
      const double g = y[i] * wx - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        if (g > pg_max_old) continue;
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= c) {
        if (g < pg_min_old) continue;
        pg = std::max(g, 0.0);
      }
      active[kept++] = i;
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / q_diag[i], 0.0, c);
      const double delta = (alpha[i] - old) * y[i];
      if (delta == 0.0) continue;
      for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) w[it.col()] += delta * it.value();
      w[dim] += delta;
    }
    const bool full = active.size() == static_cast<std::size_t>(n) && kept == active.size();
    active.resize(kept);
    violation = kept == 0 ? 0.0 : std::max(pg_max, -pg_min);
    if (violation <= stage_tol) {
      if (full && violation <= tol) break;
      stage_tol = std::max(tol, stage_tol * 0.1);
      active.resize(static_cast<std::size_t>(n));
      std::iota(active.begin(), active.end(), Eigen::Index{0});
      pg_max_old = kInf;
      pg_min_old = -kInf;
      violation = kInf;
      continue;
    }
    pg_max_old = pg_max > 0.0 ? pg_max : kInf;
    pg_min_old = pg_min < 0.0 ? pg_min : -kInf;
  }
  const bool converged = violation <= tol;
  if (!converged) {
    // Report the violation over all points, shrunk ones included.
    violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double wx = w[dim];
      for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) wx += w[it.col()] * it.value();
      const double g = y[i] * wx - 1.0;
      const double pg = alpha[i] <= 0.0 ? std::min(g, 0.0) : alpha[i] >= c ? std::max(g, 0.0) : g;
      violation = std::max(violation, std::abs(pg));
    }
  }
  fit.model.weights = w.head(dim);
  fit.model.bias = w[dim];
  fit.dual = std::move(alpha);
  fit.trace.converged = converged;
  fit.trace.iterations = sweep;
  fit.trace.final_criterion = violation;
  return fit;
}

double svm_primal_objective(const SparseRowMatrix& x, std::span<const Label> labels,
                            const LinearModel& model, double c) {
  const Eigen::VectorXd margins = (x * model.weights).array() + model.bias;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - sign_of(labels[static_cast<std::size_t>(i)]) * margins[i]);
  }
  return 0.5 * (model.weights.squaredNorm() + model.bias * model.bias) + c * hinge;
}

double svm_dual_objective(const SparseRowMatrix& x, std::span<const Label> labels,
                          const Eigen::VectorXd& dual) {
  Eigen::VectorXd ya(dual.size());
  for (Eigen::Index i = 0; i < dual.size(); ++i) ya[i] = dual[i] * sign_of(labels[static_cast<std::size_t>(i)]);
  const Eigen::VectorXd w = x.transpose() * ya;
  const double b = ya.sum();
  return dual.sum() - 0.5 * (w.squaredNorm() + b * b);
}

// --- dispatch ----------------------------------------------------------------------

ModelParameters train_parameters(ModelKind kind, const Hyperparameters& hyper,
                                 std::span<const FeatureVector> vectors,
                                 std::span<const Label> labels, OptimizerTrace* trace) {
  OptimizerTrace local;
  ModelParameters params;
  switch (kind) {
    case ModelKind::baseline:
      local.converged = true;
      break;
    case ModelKind::nb:
      params = train_nb(vectors, labels, hyper.nb_alpha);
      local.converged = true;
      break;
    case ModelKind::lr: {
      auto fit = train_lr(vectors, labels, hyper.lr_lambda, hyper.lr_tol, hyper.lr_max_iter);
      local = fit.trace;
      params = std::move(fit.model);
      break;
    }
    case ModelKind::svm: {
      auto fit = train_svm(vectors, labels, hyper.svm_c, hyper.svm_tol, hyper.svm_max_sweeps);
      local = fit.trace;
      params = std::move(fit.model);
      break;
    }
    case ModelKind::gbt: {
      auto trees = train_gbt(vectors, labels, hyper.gbt_depth, hyper.gbt_rounds, hyper.gbt_learning_rate);
      local.converged = true;
      local.iterations = trees.trees.size();
      local.final_criterion = trees.training_loss.empty() ? 0.0 : trees.training_loss.back();
      params = std::move(trees);
      break;
    }
  }
  if (trace) *trace = local;
  return params;
}

Prediction predict(const TrainedModel& model, const FeatureVector& x) {
  if (x.dimension != model.space.dimension() && model.kind != ModelKind::baseline) {
    throw Error("dimension mismatch: model expects " + std::to_string(model.space.dimension()) +
                ", vector has " + std::to_string(x.dimension));
  }
  switch (model.kind) {
    case ModelKind::baseline:
      throw Error("the baseline classifies text, not feature vectors");
    case ModelKind::nb:
      return predict(std::get<NaiveBayesModel>(model.parameters), x);
    case ModelKind::lr:
      return predict_logistic(std::get<LinearModel>(model.parameters), x);
    case ModelKind::svm:
      return predict_margin(std::get<LinearModel>(model.parameters), x);
    case ModelKind::gbt:
      return predict(std::get<BoostedTrees>(model.parameters), x);
  }
  throw Error("unknown model kind");
}

Prediction predict_text(const TrainedModel& model, std::string_view text) {
  if (model.kind == ModelKind::baseline) return baseline_predict(text);
  return predict(model, compose(text, model.space));
}

// --- informative features -------------------------------------------------------

namespace {

std::vector<RankedFeature> top_by(const FeatureSpace& space, const std::vector<double>& values,
                                  std::size_t k, bool descending_positive) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (descending_positive ? values[i] > 0.0 : values[i] < 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending_positive ? values[a] > values[b] : values[a] < values[b];
  });
  if (order.size() > k) order.resize(k);
  std::vector<RankedFeature> out;
  for (const auto i : order) out.emplace_back(space.feature_name(i), values[i]);
  return out;
}

}  // namespace

InformativeFeatures informative_features(const TrainedModel& model, std::size_t k) {
  InformativeFeatures out;
  std::vector<double> signed_scores;
  switch (model.kind) {
    case ModelKind::baseline:
      throw Error("informative_features: the baseline has no learned features");
    case ModelKind::lr:
    case ModelKind::svm: {
      const auto& w = std::get<LinearModel>(model.parameters).weights;
      signed_scores.assign(w.data(), w.data() + w.size());
      break;
    }
    case ModelKind::nb: {
      const auto& ll = std::get<NaiveBayesModel>(model.parameters).log_likelihood;
      for (Eigen::Index d = 0; d < ll.cols(); ++d) signed_scores.push_back(ll(kPost, d) - ll(kPre, d));
      break;
    }
    case ModelKind::gbt: {
      const auto& trees = std::get<BoostedTrees>(model.parameters);
      std::vector<double> gain(model.space.dimension(), 0.0);
      for (const auto& tree : trees.trees) {
        for (const auto& node : tree.nodes) {
          if (node.feature >= 0) gain.at(static_cast<std::size_t>(node.feature)) += node.gain;
        }
      }
      out.unsigned_ranking = top_by(model.space, gain, k, true);
      return out;
    }
  }
  out.post = top_by(model.space, signed_scores, k, true);
  out.pre = top_by(model.space, signed_scores, k, false);
  return out;
}

}  // namespace mortem
