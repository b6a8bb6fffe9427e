#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mortem {

enum class TestKind { paired_t, mann_whitney };

std::string_view to_string(TestKind kind);

struct StatTestResult {
  TestKind kind = TestKind::paired_t;
  double statistic = 0.0;
  double p_value = 1.0;  // two-sided
  std::optional<double> degrees_of_freedom;
  std::optional<double> effect_size_d;
  std::optional<double> corrected_p;
  bool exact = false;
};

/// t = mean(d) / (sd(d) / sqrt(n)) on d = a - b, df = n - 1. Throws on
/// unequal lengths, n < 2, or zero-variance differences ("degenerate").
StatTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

enum class MannWhitneyMethod { automatic, exact, normal };

/// Pooled sample sizes up to this use the exact permutation distribution
/// under the automatic method.
inline constexpr std::size_t kMannWhitneyExactLimit = 12;

/// U of sample a from midrank sums: U = R_a - n_a (n_a + 1) / 2.
double mann_whitney_statistic(std::span<const double> a, std::span<const double> b);

/// Two-sided test. The exact path enumerates every assignment of the pooled
/// midranks to sample a; the normal path uses the tie-corrected variance and
/// a 0.5 continuity correction.
StatTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                              MannWhitneyMethod method = MannWhitneyMethod::automatic);

/// (mean_a - mean_b) / pooled sample standard deviation.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct HolmResult {
  std::vector<double> adjusted;  // same order as the input
  std::vector<bool> reject;
};

HolmResult holm_bonferroni(std::span<const double> p_values, double alpha = 0.05);

double mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

}  // namespace mortem
