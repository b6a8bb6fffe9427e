#include <doctest.h>

#include <cmath>

#include "mortem/error.hpp"
#include "mortem/models.hpp"
#include "support.hpp"

using namespace mortem;

namespace {

struct Toy {
  std::vector<FeatureVector> vectors;
  std::vector<Label> labels;
};

// vocab {rip, lol}; post docs [rip], [rip, lol]; pre docs [lol], [lol]
Toy nb_toy() {
  return {{testing::dense({1, 0}), testing::dense({1, 1}), testing::dense({0, 1}), testing::dense({0, 1})},
          {Label::post, Label::post, Label::pre, Label::pre}};
}

// 3 docs with only dim0 = 1 labeled post, 3 with only dim1 = 1 labeled pre
Toy separable_toy() {
  Toy t;
  for (int i = 0; i < 3; ++i) {
    t.vectors.push_back(testing::dense({1, 0}));
    t.labels.push_back(Label::post);
  }
  for (int i = 0; i < 3; ++i) {
    t.vectors.push_back(testing::dense({0, 1}));
    t.labels.push_back(Label::pre);
  }
  return t;
}

TrainedModel wrap(ModelKind kind, ModelParameters params, std::vector<std::string> terms) {
  TrainedModel m;
  m.kind = kind;
  m.space.kind = FeatureKind::ngram;
  const std::size_t n = terms.size();
  m.space.vocabulary = Vocabulary(std::move(terms), std::vector<double>(n, 1.0), std::vector<std::size_t>(n, 1),
                                  TextConfig{}, 4);
  m.parameters = std::move(params);
  return m;
}

}  // namespace

TEST_CASE("baseline rule") {
  CHECK(baseline_predict("rip bro, miss you").label == Label::post);
  CHECK(baseline_predict("gripping story!").label == Label::pre);
  CHECK(baseline_predict("R.I.P. angel").label == Label::post);
  CHECK(baseline_predict("Rip").score == 1.0);
  CHECK(baseline_predict("ripped").score == 0.0);
}

TEST_CASE("naive Bayes toy posterior") {
  const auto t = nb_toy();
  const auto nb = train_nb(t.vectors, t.labels, 1.0);
  CHECK(std::exp(nb.log_likelihood(1, 0)) == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
  CHECK(std::exp(nb.log_likelihood(0, 1)) == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
  const auto p = predict(nb, testing::dense({1, 0}));
  CHECK(p.label == Label::post);
  CHECK(p.score == doctest::Approx(0.70588).epsilon(1e-5));
  CHECK(p.score == doctest::Approx(0.6 / 0.85).epsilon(1e-12));
  for (int c = 0; c < 2; ++c) CHECK(nb.log_likelihood.row(c).array().exp().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("naive Bayes prior-only cases") {
  Toy t = nb_toy();
  t.vectors.push_back(testing::dense({1, 0}));
  t.labels.push_back(Label::post);  // priors 3/5 post
  const auto nb = train_nb(t.vectors, t.labels, 1.0);
  const auto zero = predict(nb, testing::dense({0, 0}));
  CHECK(zero.score == doctest::Approx(0.6).epsilon(1e-12));
  const auto smooth = train_nb(t.vectors, t.labels, 1e12);
  CHECK(predict(smooth, testing::dense({0, 3})).score == doctest::Approx(0.6).epsilon(1e-6));
  CHECK_THROWS_AS(train_nb(t.vectors, std::vector<Label>(t.labels.size(), Label::pre), 1.0), Error);
  CHECK_THROWS_AS(train_nb(t.vectors, t.labels, 0.0), Error);
}

TEST_CASE("naive Bayes matches brute-force Bayes on random small instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.index(5);
    const std::size_t n = 2 + rng.index(9);
    std::vector<std::vector<double>> docs(n, std::vector<double>(dim));
    std::vector<int> is_post(n);
    std::vector<FeatureVector> vectors;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
      is_post[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.index(2));
      for (auto& x : docs[i]) x = static_cast<double>(rng.index(4));
      vectors.push_back(testing::dense(docs[i]));
      labels.push_back(is_post[i] ? Label::post : Label::pre);
    }
    const double alpha = 0.1 + rng.uniform();
    const auto nb = train_nb(vectors, labels, alpha);
    std::vector<double> query(dim);
    for (auto& x : query) x = static_cast<double>(rng.index(4));
    CHECK(predict(nb, testing::dense(query)).score ==
          doctest::Approx(testing::nb_posterior_oracle(docs, is_post, alpha, query)).epsilon(1e-9));
  }
}

TEST_CASE("logistic regression toy and limits") {
  const auto t = separable_toy();
  const auto fit = train_lr(t.vectors, t.labels, 0.1, 1e-6, 5000);
  CHECK(fit.trace.converged);
  CHECK(fit.trace.final_criterion <= 1e-6);
  CHECK(fit.model.weights[0] > 0.0);
  CHECK(fit.model.weights[1] < 0.0);

  Toy skewed = t;
  skewed.vectors.push_back(testing::dense({1, 0}));
  skewed.labels.push_back(Label::post);
  const auto flat = train_lr(skewed.vectors, skewed.labels, 1e6, 1e-10, 5000);
  CHECK(flat.model.weights.norm() < 1e-3);
  for (const auto& v : skewed.vectors) CHECK(predict_logistic(flat.model, v).label == Label::post);

  LinearModel zero;
  zero.weights = Eigen::VectorXd::Zero(2);
  const auto p = predict_logistic(zero, testing::dense({1, 1}));
  CHECK(p.score == 0.5);
  CHECK(p.label == Label::post);
  CHECK_THROWS_AS(predict_logistic(zero, testing::dense({1, 1, 1})), Error);
}

TEST_CASE("logistic objective gradient agrees with central differences") {
  Rng rng(99);
  std::vector<FeatureVector> vectors;
  std::vector<Label> labels;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = rng.uniform() * 2.0;
    vectors.push_back(testing::dense(x));
    labels.push_back(i % 2 ? Label::post : Label::pre);
  }
  const auto x = to_row_matrix(vectors);
  const LogisticObjective objective(x, labels, 0.05);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd theta(6);
    for (Eigen::Index i = 0; i < 6; ++i) theta[i] = rng.uniform() * 2.0 - 1.0;
    const Eigen::VectorXd analytic = objective.gradient(theta);
    const Eigen::VectorXd numeric =
        testing::numeric_gradient([&](const Eigen::VectorXd& p) { return objective.value(p); }, theta);
    CHECK((analytic - numeric).norm() / std::max(1e-12, numeric.norm()) < 1e-4);
  }
}

TEST_CASE("linear SVM toy, limits and KKT") {
  const auto t = separable_toy();
  const auto fit = train_svm(t.vectors, t.labels, 1.0, 1e-8, 20000);
  CHECK(fit.trace.converged);
  CHECK(fit.model.weights[0] > 0.0);
  CHECK(fit.model.weights[1] < 0.0);
  for (std::size_t i = 0; i < t.vectors.size(); ++i) CHECK(predict_margin(fit.model, t.vectors[i]).label == t.labels[i]);
  for (Eigen::Index i = 0; i < fit.dual.size(); ++i) {
    CHECK(fit.dual[i] >= -1e-9);
    CHECK(fit.dual[i] <= 1.0 + 1e-9);
  }
  const auto tiny = train_svm(t.vectors, t.labels, 1e-6, 1e-12, 20000);
  CHECK(tiny.model.weights.norm() < 1e-5);
  CHECK_THROWS_AS(train_svm(t.vectors, t.labels, 0.0, 1e-8, 10), Error);
}

TEST_CASE("linear SVM agrees with a projected-gradient dual oracle on a 6-point instance") {
  // overlapping classes so some duals sit at the bound C
  const std::vector<std::vector<double>> rows = {{2.0, 0.5}, {1.5, 1.0}, {0.4, 1.2},
                                                 {0.5, 2.0}, {1.0, 1.4}, {1.8, 0.2}};
  const std::vector<Label> labels = {Label::post, Label::post, Label::post, Label::pre, Label::pre, Label::pre};
  std::vector<FeatureVector> vectors;
  Eigen::MatrixXd x(6, 2);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    vectors.push_back(testing::dense(rows[static_cast<std::size_t>(i)]));
    x.row(i) << rows[static_cast<std::size_t>(i)][0], rows[static_cast<std::size_t>(i)][1];
    y[i] = labels[static_cast<std::size_t>(i)] == Label::post ? 1.0 : -1.0;
  }
  for (const double c : {0.5, 2.0}) {
    const auto fit = train_svm(vectors, labels, c, 1e-10, 200000);
    REQUIRE(fit.trace.converged);
    const auto oracle = testing::svm_projected_gradient_oracle(x, y, c);
    CHECK(fit.model.weights[0] == doctest::Approx(oracle[0]).epsilon(1e-6));
    CHECK(fit.model.weights[1] == doctest::Approx(oracle[1]).epsilon(1e-6));
    CHECK(fit.model.bias == doctest::Approx(oracle[2]).epsilon(1e-6));
    const auto sx = to_row_matrix(vectors);
    const double gap = svm_primal_objective(sx, labels, fit.model, c) - svm_dual_objective(sx, labels, fit.dual);
    CHECK(gap >= -1e-9);
    CHECK(gap < 1e-6);
  }
}

TEST_CASE("boosted trees") {
  std::vector<FeatureVector> vectors;
  std::vector<Label> labels;
  for (int i = 1; i <= 8; ++i) {
    vectors.push_back(testing::dense({static_cast<double>(i)}));
    labels.push_back(i > 4 ? Label::post : Label::pre);
  }
  const auto model = train_gbt(vectors, labels, 1, 50, 0.3);
  for (std::size_t i = 0; i < vectors.size(); ++i) CHECK(predict(model, vectors[i]).label == labels[i]);
  CHECK(model.trees.front().nodes.front().threshold == doctest::Approx(4.5));
  for (std::size_t r = 1; r < model.training_loss.size(); ++r) {
    CHECK(model.training_loss[r] <= model.training_loss[r - 1] + 1e-15);
  }
  CHECK_THROWS_AS(train_gbt(vectors, labels, 1, 0, 0.3), Error);
  CHECK_THROWS_AS(train_gbt(vectors, labels, 0, 10, 0.3), Error);
  CHECK_THROWS_AS(train_gbt(vectors, std::vector<Label>(8, Label::post), 1, 10, 0.3), Error);
}

TEST_CASE("property: boosting training loss never increases") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FeatureVector> vectors;
    std::vector<Label> labels;
    for (int i = 0; i < 40; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = rng.uniform() < 0.4 ? 0.0 : rng.uniform();
      vectors.push_back(testing::dense(x));
      labels.push_back(i < 2 ? (i ? Label::post : Label::pre) : (rng.uniform() < 0.5 ? Label::post : Label::pre));
    }
    const auto model = train_gbt(vectors, labels, 1 + static_cast<int>(rng.index(3)), 30, 0.5);
    for (std::size_t r = 1; r < model.training_loss.size(); ++r) {
      CHECK(model.training_loss[r] <= model.training_loss[r - 1] + 1e-12);
    }
  }
}

TEST_CASE("informative features") {
  LinearModel lr;
  lr.weights = Eigen::Vector3d(2.1, 0.9, -1.8);
  const auto model = wrap(ModelKind::lr, lr, {"rip", "miss", "lol"});
  const auto info = informative_features(model, 2);
  REQUIRE(info.post.size() == 2);
  CHECK(info.post[0].first == "rip");
  CHECK(info.post[1].first == "miss");
  REQUIRE(info.pre.size() == 1);
  CHECK(info.pre[0].first == "lol");

  const auto t = nb_toy();
  const auto nb = wrap(ModelKind::nb, train_nb(t.vectors, t.labels, 1.0), {"rip", "lol"});
  CHECK(informative_features(nb, 1).post[0].first == "rip");
}

TEST_CASE("TrainedModel prediction checks dimensions") {
  const auto t = nb_toy();
  const auto model = wrap(ModelKind::nb, train_nb(t.vectors, t.labels, 1.0), {"rip", "lol"});
  CHECK(predict(model, testing::dense({1, 0})).score == doctest::Approx(0.70588).epsilon(1e-5));
  CHECK_THROWS_AS(predict(model, testing::dense({1, 0, 0})), Error);
}
