#include "mortem/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "mortem/error.hpp"

namespace mortem {

std::string_view to_string(TestKind kind) {
  return kind == TestKind::paired_t ? "paired_t" : "mann_whitney";
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw Error("sample variance needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (const double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

StatTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("paired t-test: samples differ in length");
  if (a.size() < 2) throw Error("paired t-test: need at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double sd = std::sqrt(sample_variance(diff));
  if (!(sd > 0.0)) throw Error("paired t-test: degenerate (zero variance of differences)");
  const double n = static_cast<double>(diff.size());
  const double t = mean(diff) / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  StatTestResult r;
  r.kind = TestKind::paired_t;
  r.statistic = t;
  r.degrees_of_freedom = n - 1.0;
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  r.exact = true;
  return r;
}

namespace {

// Midranks (1-based) of the pooled sample a ++ b, plus the tie term
// sum(t^3 - t) over tie groups.
std::vector<double> pooled_midranks(std::span<const double> a, std::span<const double> b, double& tie_term) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<double> ranks(n);
  tie_term = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && pooled[order[end]] == pooled[order[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = midrank;
    const double t = static_cast<double>(end - start);
    tie_term += t * t * t - t;
    start = end;
  }
  return ranks;
}

double exact_two_sided(const std::vector<double>& ranks, std::size_t n_a, double u_observed) {
  const std::size_t n = ranks.size();
  const double n_a_d = static_cast<double>(n_a);
  const double center = n_a_d * static_cast<double>(n - n_a) / 2.0;
  const double observed = std::abs(u_observed - center);
  // Lexicographic enumeration of n_a-subsets of the pooled positions.
  std::vector<std::size_t> pick(n_a);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  std::size_t total = 0;
  std::size_t extreme = 0;
  while (true) {
    double rank_sum = 0.0;
    for (const auto i : pick) rank_sum += ranks[i];
    const double u = rank_sum - n_a_d * (n_a_d + 1.0) / 2.0;
    ++total;
    if (std::abs(u - center) >= observed - 1e-9) ++extreme;
    std::size_t k = n_a;
    while (k > 0 && pick[k - 1] == n - n_a + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t j = k; j < n_a; ++j) pick[j] = pick[j - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

double mann_whitney_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("Mann-Whitney: both samples must be non-empty");
  double tie_term = 0.0;
  const auto ranks = pooled_midranks(a, b, tie_term);
  const double n_a = static_cast<double>(a.size());
  const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  return rank_sum - n_a * (n_a + 1.0) / 2.0;
}

StatTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MannWhitneyMethod method) {
  if (a.empty() || b.empty()) throw Error("Mann-Whitney: both samples must be non-empty");
  double tie_term = 0.0;
  const auto ranks = pooled_midranks(a, b, tie_term);
  const double n_a = static_cast<double>(a.size());
  const double n_b = static_cast<double>(b.size());
  const double n = n_a + n_b;
  const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u = rank_sum - n_a * (n_a + 1.0) / 2.0;

  StatTestResult r;
  r.kind = TestKind::mann_whitney;
  r.statistic = u;
  const std::size_t pooled = a.size() + b.size();
  const bool use_exact = method == MannWhitneyMethod::exact ||
                         (method == MannWhitneyMethod::automatic && pooled <= kMannWhitneyExactLimit);
  if (use_exact) {
    if (pooled > 24) throw Error("Mann-Whitney: exact enumeration limited to 24 pooled values");
    r.p_value = exact_two_sided(ranks, a.size(), u);
    r.exact = true;
    return r;
  }
  const double variance = n_a * n_b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(variance > 0.0)) {
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(u - n_a * n_b / 2.0) - 0.5) / std::sqrt(variance);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("Cohen's d: each sample needs at least two values");
  const double n_a = static_cast<double>(a.size());
  const double n_b = static_cast<double>(b.size());
  const double pooled = std::sqrt(((n_a - 1.0) * sample_variance(a) + (n_b - 1.0) * sample_variance(b)) /
                                  (n_a + n_b - 2.0));
  if (!(pooled > 0.0)) throw Error("Cohen's d: pooled standard deviation is zero");
  return (mean(a) - mean(b)) / pooled;
}

HolmResult holm_bonferroni(std::span<const double> p_values, double alpha) {
  const std::size_t m = p_values.size();
  for (const double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("Holm-Bonferroni: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  HolmResult out;
  out.adjusted.assign(m, 1.0);
  out.reject.assign(m, false);
  double running = 0.0;
  bool still_rejecting = true;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const std::size_t i = order[rank];
    running = std::max(running, std::min(1.0, static_cast<double>(m - rank) * p_values[i]));
    out.adjusted[i] = running;
    still_rejecting = still_rejecting && running <= alpha;
    out.reject[i] = still_rejecting;
  }
  return out;
}

}  // namespace mortem
