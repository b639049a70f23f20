#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "aab/error.hpp"
#include "aab/rng.hpp"
#include "aab/stats.hpp"

using namespace aab;

TEST_CASE("bonferroni correction") {
    CHECK(bonferroni_alpha(0.05, 15) == doctest::Approx(0.05 / 15).epsilon(1e-15));
    CHECK(bonferroni_alpha(0.05, 15) < 0.0034);  // the p < 0.0033... threshold
    CHECK(bonferroni_alpha(0.05, 1) == 0.05);
    CHECK(bonferroni_alpha(0.01, 4) == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK_THROWS_AS((void)bonferroni_alpha(0.6, 3), ValidationError);
    CHECK_THROWS_AS((void)bonferroni_alpha(0.05, 0), ValidationError);
}

TEST_CASE("rank sum: identical multisets give p near 1") {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(rank_sum_test(x, x) >= 0.9);
}

TEST_CASE("rank sum: total separation is overwhelmingly significant") {
    std::vector<double> x(20), y(20);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 101.0);
    CHECK(rank_sum_test(x, y) < 1e-6);
}

TEST_CASE("rank sum guards") {
    std::vector<double> tied{3, 3, 3, 3, 3};
    CHECK_THROWS_AS((void)rank_sum_test(tied, tied), DegenerateInputError);
    std::vector<double> small{1, 2, 3};
    std::vector<double> ok{1, 2, 3, 4, 5};
    CHECK_THROWS_AS((void)rank_sum_test(small, ok), InsufficientDataError);
}

namespace {

// Independent enumeration oracle: walks every k-subset of the combined
// sample, recomputing the rank sum from scratch each time.
double exact_p_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> all(x);
    all.insert(all.end(), y.begin(), y.end());
    const std::size_t n = all.size(), k = x.size();
    std::vector<double> sorted(all);
    std::sort(sorted.begin(), sorted.end());
    auto rank_of = [&](double v) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        return 0.5 * static_cast<double>(lo + 1 + hi);  // midrank
    };
    double obs = 0.0;
    for (double v : x) obs += rank_of(v);
    const double mu = static_cast<double>(k) * static_cast<double>(n + 1) / 2.0;

    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
    std::sort(pick.begin(), pick.end());  // lexicographically smallest mask
    std::uint64_t total = 0, extreme = 0;
    do {
        double rs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pick[i]) rs += rank_of(all[i]);
        }
        ++total;
        if (std::abs(rs - mu) >= std::abs(obs - mu) - 1e-9) ++extreme;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("rank sum exact mode matches full enumeration, ties included") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(6), y(7);
        for (auto& v : x) v = std::floor(rng.uniform01() * 6.0);  // coarse grid forces ties
        for (auto& v : y) v = std::floor(rng.uniform01() * 6.0) + (trial % 3);
        const bool all_tied = [&] {
            for (double v : x) {
                if (v != x[0]) return false;
            }
            for (double v : y) {
                if (v != x[0]) return false;
            }
            return true;
        }();
        if (all_tied) continue;
        CHECK(rank_sum_test(x, y) == doctest::Approx(exact_p_oracle(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("rank sum p-values stay in [0, 1] and detect location shifts") {
    Rng rng(23);
    std::vector<double> x(40), y(40);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal() + 2.0;
    const double p = rank_sum_test(x, y);
    CHECK(p > 0.0);
    CHECK(p < 1e-6);
}

TEST_CASE("chi square on hand-computed tables") {
    CHECK(chi_square_test({{{50, 50}, {50, 50}}}) == doctest::Approx(1.0).epsilon(1e-12));
    // chi^2 = 4 * (40^2 / 50) = 128 for this table
    CHECK(chi_square_test({{{90, 10}, {10, 90}}}) < 1e-6);
    CHECK_THROWS_AS((void)chi_square_test({{{0, 0}, {5, 5}}}), DegenerateInputError);
    CHECK_THROWS_AS((void)chi_square_test({{{1, 0}, {0, 1}}}), InsufficientDataError);
}

TEST_CASE("normal survival function sanity") {
    CHECK(normal_sf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-6));
}
