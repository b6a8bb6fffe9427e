#pragma once

// Shared helpers and independent reference implementations for the tests.
// The oracles deliberately avoid the library's own code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mortem/corpus.hpp"
#include "mortem/features.hpp"
#include "mortem/random.hpp"
#include "mortem/text.hpp"

namespace testing {

inline mortem::FeatureVector dense(const std::vector<double>& values) {
  mortem::FeatureVector v;
  v.dimension = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) v.entries.push_back({i, values[i]});
  }
  return v;
}

inline std::vector<double> to_dense(const mortem::FeatureVector& v) {
  std::vector<double> out(v.dimension, 0.0);
  for (const auto& e : v.entries) out[e.index] = e.value;
  return out;
}

/// A fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mortem_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline mortem::Comment comment(const std::string& profile, const std::string& id, std::int64_t t,
                               const std::string& text) {
  mortem::Comment c;
  c.profile_id = profile;
  c.comment_id = id;
  c.timestamp = t;
  c.text = text;
  return c;
}

// --- oracles ------------------------------------------------------------------

/// Posterior P(post | x) for multinomial NB by direct products over the
/// smoothed likelihood table. Counts and queries are small integers.
inline double nb_posterior_oracle(const std::vector<std::vector<double>>& docs, const std::vector<int>& is_post,
                                  double alpha, const std::vector<double>& query) {
  const std::size_t dim = query.size();
  long double joint[2];
  for (int c = 0; c < 2; ++c) {
    long double n_c = 0.0L;
    std::vector<long double> totals(dim, 0.0L);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (is_post[i] != c) continue;
      n_c += 1.0L;
      for (std::size_t d = 0; d < dim; ++d) totals[d] += docs[i][d];
    }
    long double mass = 0.0L;
    for (const auto t : totals) mass += t;
    long double p = n_c / static_cast<long double>(docs.size());
    for (std::size_t d = 0; d < dim; ++d) {
      const long double theta = (totals[d] + alpha) / (mass + alpha * static_cast<long double>(dim));
      for (int k = 0; k < static_cast<int>(query[d]); ++k) p *= theta;
    }
    joint[c] = p;
  }
  return static_cast<double>(joint[1] / (joint[0] + joint[1]));
}

/// Mann-Whitney U of `a` by counting pairs (ties count one half).
inline double mw_pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (const double x : a) {
    for (const double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return u;
}

/// Exact two-sided p-value by relabeling every way of choosing |a| of the
/// pooled observations, using the pairwise-count statistic.
inline double mw_exact_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const double center = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::abs(mw_pairwise_u(a, b) - center);
  std::size_t total = 0;
  std::size_t extreme = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::vector<double> ga;
    std::vector<double> gb;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? ga : gb).push_back(pooled[i]);
    ++total;
    if (std::abs(mw_pairwise_u(ga, gb) - center) >= observed - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Chi-squared per dimension straight from the definition on dense rows.
inline std::vector<double> chi2_oracle(const std::vector<std::vector<double>>& rows, const std::vector<int>& is_post) {
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  double n_post = 0.0;
  for (const int p : is_post) n_post += p;
  const double n = static_cast<double>(rows.size());
  std::vector<double> out(dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double o_post = 0.0;
    double o_pre = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) (is_post[i] ? o_post : o_pre) += rows[i][d];
    const double total = o_post + o_pre;
    if (total == 0.0) continue;
    const double e_post = total * n_post / n;
    const double e_pre = total * (n - n_post) / n;
    out[d] = (o_post - e_post) * (o_post - e_post) / e_post + (o_pre - e_pre) * (o_pre - e_pre) / e_pre;
  }
  return out;
}

/// Central finite-difference gradient.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

/// Primal solution of the bias-augmented hinge SVM from projected gradient
/// ascent on the dense dual. Returns [w; b].
inline Eigen::VectorXd svm_projected_gradient_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double c,
                                                     int iterations = 200000) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd xa(n, x.cols() + 1);
  xa << x, Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd z = y.asDiagonal() * xa;
  const Eigen::MatrixXd q = z * z.transpose();
  const double step = 1.0 / q.eigenvalues().real().maxCoeff();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - q * alpha;
    alpha = (alpha + step * grad).cwiseMax(0.0).cwiseMin(c);
  }
  return z.transpose() * alpha;
}

}  // namespace testing
