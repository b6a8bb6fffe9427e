#include <doctest.h>

#include <cmath>

#include "mortem/error.hpp"
#include "mortem/statistics.hpp"
#include "support.hpp"

using namespace mortem;

TEST_CASE("paired t-test against the df=2 closed form") {
  const std::vector<double> a = {0.90, 0.85, 0.88};
  const std::vector<double> b = {0.80, 0.80, 0.81};
  const auto r = paired_ttest(a, b);
  // d = {0.10, 0.05, 0.07}: mean 0.07333, sd 0.025166
  const double t = (0.22 / 3.0) / (std::sqrt(((0.10 - 0.22 / 3) * (0.10 - 0.22 / 3) +
                                              (0.05 - 0.22 / 3) * (0.05 - 0.22 / 3) +
                                              (0.07 - 0.22 / 3) * (0.07 - 0.22 / 3)) /
                                             2.0) /
                                   std::sqrt(3.0));
  CHECK(r.statistic == doctest::Approx(t).epsilon(1e-10));
  CHECK(r.statistic == doctest::Approx(5.0471).epsilon(1e-4));
  REQUIRE(r.degrees_of_freedom);
  CHECK(*r.degrees_of_freedom == 2.0);
  CHECK(r.p_value == doctest::Approx(1.0 - std::abs(t) / std::sqrt(2.0 + t * t)).epsilon(1e-10));
}

TEST_CASE("paired t-test closed form on a wider spread") {
  // d = {1, 2, 3}: t = 2 / (1 / sqrt 3) = 3.4641
  const std::vector<double> a = {2, 4, 6};
  const std::vector<double> b = {1, 2, 3};
  const auto r = paired_ttest(a, b);
  CHECK(r.statistic == doctest::Approx(3.4641).epsilon(1e-4));
  CHECK(r.p_value == doctest::Approx(1.0 - 3.4641016 / std::sqrt(2.0 + 12.0)).epsilon(1e-6));
  CHECK(r.p_value == doctest::Approx(0.0742).epsilon(1e-3));
}

TEST_CASE("paired t-test symmetric differences and degeneracy") {
  const std::vector<double> a = {1, 0};
  const std::vector<double> b = {0, 1};
  const auto r = paired_ttest(a, b);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(1.0));
  CHECK_THROWS_AS(paired_ttest(a, a), Error);
  const std::vector<double> one = {1};
  CHECK_THROWS_AS(paired_ttest(one, one), Error);
  const std::vector<double> three = {1, 2, 3};
  CHECK_THROWS_AS(paired_ttest(a, three), Error);
}

TEST_CASE("property: t statistic flips sign when arguments swap") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(10);
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    const auto ab = paired_ttest(a, b);
    const auto ba = paired_ttest(b, a);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-12));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    CHECK(ab.p_value >= 0.0);
    CHECK(ab.p_value <= 1.0);
  }
}

TEST_CASE("Mann-Whitney exact small cases") {
  const std::vector<double> a = {1, 2};
  const std::vector<double> b = {3, 4};
  const auto r = mann_whitney_u(a, b);
  CHECK(r.exact);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const std::vector<double> c = {1, 3};
  const std::vector<double> d = {2, 4};
  const auto s = mann_whitney_u(c, d);
  CHECK(s.statistic == 1.0);
  CHECK(s.p_value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const std::vector<double> same = {5, 5, 5};
  CHECK(mann_whitney_u(same, same).p_value == doctest::Approx(1.0));
  CHECK(mann_whitney_u(same, same, MannWhitneyMethod::normal).p_value == doctest::Approx(1.0));

  const std::vector<double> empty;
  CHECK_THROWS_AS(mann_whitney_u(empty, a), Error);
}

TEST_CASE("Mann-Whitney exhaustive agreement with the relabeling oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t na = 1 + rng.index(4);
    const std::size_t nb = 1 + rng.index(4);
    std::vector<double> a(na);
    std::vector<double> b(nb);
    // small integer support forces ties
    for (auto& x : a) x = static_cast<double>(rng.index(5));
    for (auto& x : b) x = static_cast<double>(rng.index(5));
    CAPTURE(trial);
    CHECK(mann_whitney_statistic(a, b) == doctest::Approx(testing::mw_pairwise_u(a, b)).epsilon(1e-12));
    const auto r = mann_whitney_u(a, b, MannWhitneyMethod::exact);
    CHECK(r.p_value == doctest::Approx(testing::mw_exact_oracle(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("Mann-Whitney normal path approaches the exact one on larger samples") {
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < 6; ++i) {
    a.push_back(i * 1.3);
    b.push_back(i * 1.1 + 2.05);
  }
  const auto exact = mann_whitney_u(a, b, MannWhitneyMethod::exact);
  const auto normal = mann_whitney_u(a, b, MannWhitneyMethod::normal);
  CHECK(exact.exact);
  CHECK_FALSE(normal.exact);
  CHECK(std::abs(exact.p_value - normal.p_value) < 0.03);
  CHECK(mann_whitney_u(a, b).exact);
  a.push_back(9.0);
  CHECK_FALSE(mann_whitney_u(a, b).exact);
}

TEST_CASE("property: Mann-Whitney U(a,b) + U(b,a) = n_a n_b with equal p-values") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(1 + rng.index(8));
    std::vector<double> b(1 + rng.index(8));
    for (auto& x : a) x = static_cast<double>(rng.index(6));
    for (auto& x : b) x = static_cast<double>(rng.index(6));
    CHECK(mann_whitney_statistic(a, b) + mann_whitney_statistic(b, a) ==
          doctest::Approx(static_cast<double>(a.size() * b.size())));
    CHECK(mann_whitney_u(a, b).p_value == doctest::Approx(mann_whitney_u(b, a).p_value).epsilon(1e-12));
  }
}

TEST_CASE("Cohen's d") {
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> b = {0.5, 1.5, 2.5};
  // pooled sd 1, difference 0.5
  CHECK(cohens_d(a, b) == doctest::Approx(0.5));
  const std::vector<double> c = {2, 4};
  const std::vector<double> d = {1, 3};
  CHECK(cohens_d(c, d) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(cohens_d(a, a) == 0.0);
  const std::vector<double> flat = {1, 1};
  CHECK_THROWS_AS(cohens_d(flat, flat), Error);
  CHECK(cohens_d(b, a) == doctest::Approx(-cohens_d(a, b)));
}

TEST_CASE("Holm-Bonferroni") {
  const std::vector<double> p = {0.01, 0.04, 0.03};
  const auto h = holm_bonferroni(p);
  CHECK(h.adjusted[0] == doctest::Approx(0.03));
  CHECK(h.adjusted[1] == doctest::Approx(0.06));
  CHECK(h.adjusted[2] == doctest::Approx(0.06));
  CHECK(h.reject == std::vector<bool>{true, false, false});

  const std::vector<double> big = {0.9, 0.8};
  CHECK(holm_bonferroni(big).adjusted == std::vector<double>{1.0, 1.0});
  CHECK(holm_bonferroni(std::vector<double>{}).adjusted.empty());
}

TEST_CASE("property: Holm adjustment is monotone in the sorted order and never below the raw p") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(1 + rng.index(10));
    for (auto& x : p) x = rng.uniform() * 0.2;
    const auto h = holm_bonferroni(p);
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return p[x] < p[y]; });
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(h.adjusted[i] >= p[i]);
      CHECK(h.adjusted[i] <= 1.0);
      CHECK(h.reject[i] == (h.adjusted[i] <= 0.05));
    }
    for (std::size_t i = 1; i < order.size(); ++i) CHECK(h.adjusted[order[i]] >= h.adjusted[order[i - 1]]);
  }
}
