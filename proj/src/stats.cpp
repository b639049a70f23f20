#include "aab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aab/error.hpp"

namespace aab {

double normal_sf(double z) {
    return 0.5 * std::erfc(z / 1.4142135623730950488);
}

double bonferroni_alpha(double alpha, int n_tests) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw ValidationError("bonferroni_alpha: alpha must lie in (0, 0.5)");
    }
    if (n_tests < 1) {
        throw ValidationError("bonferroni_alpha: n_tests must be >= 1");
    }
    return alpha / static_cast<double>(n_tests);
}

namespace {

// Counts the rank assignments whose U deviates from the null mean at least
// as much as the observed U. `ranks` holds the midranks of the combined
// sorted sample; we choose n1 of them for the x-group.
void count_extreme(const std::vector<double>& ranks, std::size_t idx, std::size_t left,
                   double ranksum, double mu_r1, double dev_obs, std::uint64_t& total,
                   std::uint64_t& extreme) {
    if (left == 0) {
        ++total;
        if (std::abs(ranksum - mu_r1) >= dev_obs - 1e-9) ++extreme;
        return;
    }
    if (ranks.size() - idx < left) return;
    count_extreme(ranks, idx + 1, left - 1, ranksum + ranks[idx], mu_r1, dev_obs, total, extreme);
    count_extreme(ranks, idx + 1, left, ranksum, mu_r1, dev_obs, total, extreme);
}

}  // namespace

double rank_sum_test(std::span<const double> x, std::span<const double> y) {
    const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
    if (n1 < 5 || n2 < 5) {
        throw InsufficientDataError("rank_sum_test requires at least 5 values per sample");
    }
    struct Tagged {
        double v;
        bool is_x;
    };
    std::vector<Tagged> all;
    all.reserve(n);
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Tagged& l, const Tagged& r) { return l.v < r.v; });
    if (all.front().v == all.back().v) {
        throw DegenerateInputError("rank_sum_test: all values tied across both samples");
    }

    // midranks + tie statistics
    std::vector<double> ranks(n);
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && all[j].v == all[i].v) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) ranks[k] = mid;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    double r1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (all[k].is_x) r1 += ranks[k];
    }
    const double mu_r1 = static_cast<double>(n1) * static_cast<double>(n + 1) / 2.0;
    const double dev = std::abs(r1 - mu_r1);

    if (n <= 20) {
        // Exact permutation distribution of the rank sum given the observed
        // (possibly tied) values.
        std::uint64_t total = 0, extreme = 0;
        count_extreme(ranks, 0, n1, 0.0, mu_r1, dev, total, extreme);
        return static_cast<double>(extreme) / static_cast<double>(total);
    }

    const double n1d = static_cast<double>(n1), n2d = static_cast<double>(n2),
                 nd = static_cast<double>(n);
    double var = n1d * n2d / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (var <= 0.0) {
        throw DegenerateInputError("rank_sum_test: zero variance rank distribution");
    }
    const double z = std::max(0.0, dev - 0.5) / std::sqrt(var);
    return std::min(1.0, 2.0 * normal_sf(z));
}

double chi_square_test(const std::array<std::array<double, 2>, 2>& counts) {
    const double r0 = counts[0][0] + counts[0][1];
    const double r1 = counts[1][0] + counts[1][1];
    const double c0 = counts[0][0] + counts[1][0];
    const double c1 = counts[0][1] + counts[1][1];
    const double total = r0 + r1;
    if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) {
        throw DegenerateInputError("chi_square_test: zero marginal");
    }
    double stat = 0.0;
    const double rows[2] = {r0, r1};
    const double cols[2] = {c0, c1};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double expected = rows[a] * cols[b] / total;
            if (expected < 1.0) {
                throw InsufficientDataError("chi_square_test: expected count below 1");
            }
            const double d = counts[a][b] - expected;
            stat += d * d / expected;
        }
    }
    // survival of chi-square with 1 df
    return std::erfc(std::sqrt(stat / 2.0));
}

}  // namespace aab
