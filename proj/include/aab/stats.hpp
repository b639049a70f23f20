#pragma once

#include <array>
#include <span>

namespace aab {

// alpha / n_tests. alpha must lie in (0, 0.5), n_tests >= 1.
double bonferroni_alpha(double alpha, int n_tests);

// Two-sided Mann-Whitney U p-value. Exact (full enumeration of rank
// assignments) when |x|+|y| <= 20, otherwise normal approximation with tie
// correction and continuity correction. Requires |x|, |y| >= 5; throws
// DegenerateInputError when every value across both samples is tied.
double rank_sum_test(std::span<const double> x, std::span<const double> y);

// Pearson chi-square on a 2x2 contingency table, 1 degree of freedom,
// two-sided p. Throws on a zero marginal; requires expected counts >= 1.
double chi_square_test(const std::array<std::array<double, 2>, 2>& counts);

// Upper tail of the standard normal, 1 - Phi(z).
double normal_sf(double z);

}  // namespace aab
