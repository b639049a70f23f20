#include "aab/significance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>

#include "aab/kernels.hpp"
#include "aab/metrics.hpp"
#include "aab/rng.hpp"
#include "aab/stats.hpp"

namespace aab {

namespace {

double binomial_or_inf(std::size_t n, std::size_t k) {
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (c > 1e12) return c;
    }
    return c;
}

NullSummary summarize(std::vector<double> stats) {
    NullSummary s;
    const std::size_t m = stats.size();
    double mean = 0.0;
    for (double v : stats) mean += v;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : stats) ss += (v - mean) * (v - mean);
    s.mean = mean;
    s.stddev = std::sqrt(ss / static_cast<double>(m));
    std::sort(stats.begin(), stats.end());
    auto q = [&](double f) {
        return stats[static_cast<std::size_t>(f * static_cast<double>(m - 1))];
    };
    s.q025 = q(0.025);
    s.q25 = q(0.25);
    s.q50 = q(0.50);
    s.q75 = q(0.75);
    s.q975 = q(0.975);
    return s;
}

// Enumerates every k-subset of `values`; reports each subset sum in
// lexicographic index order (the first subset is {0..k-1}, i.e. the observed
// grouping, summed in input order).
void enumerate_subset_sums(const std::vector<double>& values, std::size_t idx, std::size_t left,
                           double sum, const std::function<void(double)>& emit) {
    if (left == 0) {
        emit(sum);
        return;
    }
    if (values.size() - idx < left) return;
    enumerate_subset_sums(values, idx + 1, left - 1, sum + values[idx], emit);
    enumerate_subset_sums(values, idx + 1, left, sum, emit);
}

// Shared engine: statistic is a function of (sum over pseudo-group-1) given
// fixed totals. Covers both the score re-partition tests and the label
// shuffle, which all reduce to selecting k of n precomputed values.
PermutationResult partition_permutation_test(const std::vector<double>& values, std::size_t k,
                                             const std::function<double(double)>& stat_of_sum,
                                             std::uint64_t n_perm, std::uint64_t seed,
                                             bool keep_null) {
    if (n_perm < 100) {
        throw ValidationError("permutation count must be >= 100, got " + std::to_string(n_perm));
    }
    const std::size_t n = values.size();
    double obs_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) obs_sum += values[i];

    PermutationResult res;
    res.seed = seed;
    res.observed_stat = stat_of_sum(obs_sum);
    const double obs_abs = std::abs(res.observed_stat);

    const double n_partitions = binomial_or_inf(n, k);
    if (n_partitions <= kExactEnumerationLimit) {
        res.exact = true;
        std::vector<double> stats;
        stats.reserve(static_cast<std::size_t>(n_partitions));
        enumerate_subset_sums(values, 0, k, 0.0,
                              [&](double s) { stats.push_back(stat_of_sum(s)); });
        std::uint64_t extreme = 0;
        for (double v : stats) {
            if (std::abs(v) >= obs_abs) ++extreme;
        }
        res.permutations = stats.size();
        res.p_value = static_cast<double>(extreme) / static_cast<double>(stats.size());
        res.null_summary = summarize(stats);
        if (keep_null) res.null_samples = std::move(stats);
        return res;
    }

    std::vector<double> stats(n_perm);
#pragma omp parallel
    {
        std::vector<std::uint32_t> idx(n);
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(n_perm); ++r) {
            std::iota(idx.begin(), idx.end(), 0u);
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(r));
            rng.partial_shuffle(idx, k);
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += values[idx[i]];
            stats[r] = stat_of_sum(s);
        }
    }
    std::uint64_t extreme = 0;
    for (double v : stats) {
        if (std::abs(v) >= obs_abs) ++extreme;
    }
    res.permutations = n_perm;
    res.p_value = static_cast<double>(extreme + 1) / static_cast<double>(n_perm + 1);
    res.null_summary = summarize(stats);
    if (keep_null) res.null_samples = std::move(stats);
    return res;
}

}  // namespace

PermutationResult permutation_test_deaa(const EntityGroup& e, const EntityGroup& p,
                                        const EntityGroup& a, const EntityGroup& b,
                                        const EmbeddingSpace& space, std::uint64_t n_perm,
                                        std::uint64_t seed, bool keep_null) {
    require_disjoint(e, p);
    require_uncontaminated(e, a, b);
    require_uncontaminated(p, a, b);
    const auto a_rows = resolve(a, space);
    const auto b_rows = resolve(b, space);
    std::vector<std::size_t> combined = resolve(e, space);
    {
        const auto p_rows = resolve(p, space);
        combined.insert(combined.end(), p_rows.begin(), p_rows.end());
    }
    const auto scores = kernels::eaa_batch(space, combined, a_rows, b_rows);
    double total = 0.0;
    for (double v : scores) total += v;
    // DEAA(selection) = sum(sel) - sum(rest) = 2 sum(sel) - total
    return partition_permutation_test(
        scores, e.members.size(), [total](double s) { return 2.0 * s - total; }, n_perm, seed,
        keep_null);
}

PermutationResult permutation_test_geaa(const EntityGroup& e, const EntityGroup& a,
                                        const EntityGroup& b, const EmbeddingSpace& space,
                                        std::uint64_t n_perm, std::uint64_t seed,
                                        bool keep_null) {
    require_uncontaminated(e, a, b);
    require_disjoint(a, b);
    const auto e_rows = resolve(e, space);
    std::vector<std::size_t> members = resolve(a, space);
    {
        const auto b_rows = resolve(b, space);
        members.insert(members.end(), b_rows.begin(), b_rows.end());
    }
    // colsums[m] = sum over E of cos(e, m); GEAA under any labeling is then
    // mean(colsums over pseudo-A) * ... a cheap linear functional.
    const auto colsums = kernels::cosine_colsums(space, e_rows, members);
    double total = 0.0;
    for (double v : colsums) total += v;
    const double na = static_cast<double>(a.members.size());
    const double nb = static_cast<double>(b.members.size());
    return partition_permutation_test(
        colsums, a.members.size(),
        [total, na, nb](double s) { return s / na - (total - s) / nb; }, n_perm, seed,
        keep_null);
}

PermutationResult permutation_test_rripa(const EntityGroup& e, const EntityGroup& p,
                                         const BiasDirection& psi, const EmbeddingSpace& space,
                                         std::uint64_t n_perm, std::uint64_t seed,
                                         bool keep_null) {
    require_disjoint(e, p);
    std::vector<std::size_t> combined = resolve(e, space);
    {
        const auto p_rows = resolve(p, space);
        combined.insert(combined.end(), p_rows.begin(), p_rows.end());
    }
    const auto cosines = kernels::cosines_with(space, combined, psi.vector);
    double total = 0.0;
    for (double v : cosines) total += v;
    const double ne = static_cast<double>(e.members.size());
    const double np = static_cast<double>(p.members.size());
    return partition_permutation_test(
        cosines, e.members.size(),
        [total, ne, np](double s) { return s / ne - (total - s) / np; }, n_perm, seed,
        keep_null);
}

double rripa_subsample_wilcoxon(const EntityGroup& e, const EntityGroup& p,
                                const BiasDirection& psi, const EmbeddingSpace& space,
                                std::size_t subsamples_per_side, std::uint64_t seed) {
    require_disjoint(e, p);
    if (subsamples_per_side < 5) {
        throw ValidationError("rripa_subsample_wilcoxon needs >= 5 subsamples per side");
    }
    if (e.members.size() < subsamples_per_side || p.members.size() < subsamples_per_side) {
        throw InsufficientDataError("test groups smaller than the requested subsample count");
    }
    auto side_means = [&](const EntityGroup& g, std::uint64_t stream) {
        auto rows = resolve(g, space);
        Rng::substream(seed, stream).shuffle(rows);
        const auto cs = kernels::cosines_with(space, rows, psi.vector);
        std::vector<double> means(subsamples_per_side, 0.0);
        std::vector<std::size_t> counts(subsamples_per_side, 0);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            means[i % subsamples_per_side] += cs[i];
            counts[i % subsamples_per_side] += 1;
        }
        for (std::size_t j = 0; j < subsamples_per_side; ++j) {
            means[j] /= static_cast<double>(counts[j]);
        }
        return means;
    };
    const auto me = side_means(e, 1);
    const auto mp = side_means(p, 2);
    return rank_sum_test(me, mp);
}

DirectionValidation validate_direction(const BiasDirection& direction, const EntityGroup& a,
                                       const EntityGroup& b, const EmbeddingSpace& space,
                                       int n_random, std::uint64_t seed, double alpha_corrected) {
    a.validate();
    b.validate();
    require_disjoint(a, b);
    if (a.members.size() < 5 || b.members.size() < 5) {
        throw InsufficientDataError("validate_direction needs at least 5 members per group");
    }
    if (n_random < 100) {
        throw ValidationError("validate_direction needs n_random >= 100");
    }
    const std::size_t dim = space.dim();
    const auto a_rows = resolve(a, space);
    const auto b_rows = resolve(b, space);

    const auto cos_a = kernels::cosines_with(space, a_rows, direction.vector);
    const auto cos_b = kernels::cosines_with(space, b_rows, direction.vector);

    DirectionValidation val;
    val.n_random = n_random;
    val.seed = seed;
    val.alpha_corrected = alpha_corrected;

    // test 1: do the two attribute groups relate differently to d?
    val.test1_p = rank_sum_test(cos_a, cos_b);

    // label-aligned cosines with d: +cos for A members, -cos for B members
    std::vector<double> aligned;
    aligned.reserve(cos_a.size() + cos_b.size());
    aligned.insert(aligned.end(), cos_a.begin(), cos_a.end());
    for (double c : cos_b) aligned.push_back(-c);

    // test 2: the same entities against sphere-uniform directions
    std::vector<std::vector<double>> random_dirs(static_cast<std::size_t>(n_random));
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n_random; ++j) {
        random_dirs[j] =
            Rng::substream(seed, 0x100000ULL + static_cast<std::uint64_t>(j)).unit_vector(dim);
    }
    std::vector<std::size_t> ab_rows = a_rows;
    ab_rows.insert(ab_rows.end(), b_rows.begin(), b_rows.end());
    std::vector<double> random_cos = kernels::cosine_cross(space, ab_rows, random_dirs);
    const std::size_t m = random_dirs.size();
    for (std::size_t i = a_rows.size(); i < ab_rows.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) random_cos[i * m + j] = -random_cos[i * m + j];
    }
    val.test2_p = rank_sum_test(aligned, random_cos);

    // test 3: synthetic entities scaled to the median entity norm
    std::vector<double> all_norms(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) all_norms[i] = space.norm(i);
    std::nth_element(all_norms.begin(), all_norms.begin() + all_norms.size() / 2,
                     all_norms.end());
    const double median_norm = all_norms[all_norms.size() / 2];
    std::vector<double> cos_random_entities(static_cast<std::size_t>(n_random));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n_random; ++i) {
        auto v = Rng::substream(seed, 0x200000ULL + static_cast<std::uint64_t>(i))
                     .unit_vector(dim);
        for (auto& x : v) x *= median_norm;
        cos_random_entities[i] = cosine(v, direction.vector);
    }
    const double p3_a = rank_sum_test(cos_a, cos_random_entities);
    const double p3_b = rank_sum_test(cos_b, cos_random_entities);
    val.test3_p = std::min(1.0, 2.0 * std::min(p3_a, p3_b));

    val.passed = val.test1_p < alpha_corrected && val.test2_p < alpha_corrected &&
                 val.test3_p < alpha_corrected;
    return val;
}

}  // namespace aab
