#pragma once

#include <cstdint>
#include <vector>

#include "aab/core.hpp"
#include "aab/directions.hpp"

namespace aab {

struct NullSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double q025 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q975 = 0.0;
};

// Outcome of one permutation test. In resampled mode the p-value carries +1
// smoothing: p = (#{|null| >= |observed|} + 1) / (n + 1), so p is never 0.
// In exact mode every partition is enumerated (the identity partition
// included), which gives the same guarantee.
struct PermutationResult {
    double observed_stat = 0.0;
    std::uint64_t permutations = 0;
    double p_value = 1.0;
    std::uint64_t seed = 0;
    bool exact = false;
    NullSummary null_summary;
    std::vector<double> null_samples;  // populated only when keep_null is set
};

// Exact enumeration kicks in when the number of re-partitions is at most
// this bound; above it the test resamples n_perm partitions.
inline constexpr double kExactEnumerationLimit = 50000.0;

// Null: re-partition E u P into pseudo-groups of the original sizes; the
// per-entity scores are computed once up front. Two-sided.
PermutationResult permutation_test_deaa(const EntityGroup& e, const EntityGroup& p,
                                        const EntityGroup& a, const EntityGroup& b,
                                        const EmbeddingSpace& space, std::uint64_t n_perm,
                                        std::uint64_t seed, bool keep_null = false);

// Null: shuffle the A/B attribute labels over A u B (sizes preserved) and
// recompute the group association of E. Two-sided.
PermutationResult permutation_test_geaa(const EntityGroup& e, const EntityGroup& a,
                                        const EntityGroup& b, const EmbeddingSpace& space,
                                        std::uint64_t n_perm, std::uint64_t seed,
                                        bool keep_null = false);

// Direction-parameterized test, route one: permute the cosine scores with
// psi between E and P; statistic is the difference of group means.
PermutationResult permutation_test_rripa(const EntityGroup& e, const EntityGroup& p,
                                         const BiasDirection& psi, const EmbeddingSpace& space,
                                         std::uint64_t n_perm, std::uint64_t seed,
                                         bool keep_null = false);

// Route two: compute the mean cosine per seeded subsample of E and of P and
// compare the two populations of subsample means with the rank-sum test.
double rripa_subsample_wilcoxon(const EntityGroup& e, const EntityGroup& p,
                                const BiasDirection& psi, const EmbeddingSpace& space,
                                std::size_t subsamples_per_side, std::uint64_t seed);

// The three-test validation protocol. All comparisons are two-sided
// Mann-Whitney rank tests:
//   test 1: {cos(a, d)} vs {cos(b, d)} between the attribute groups.
//   test 2: label-aligned cosines with d vs cosines with n_random sphere-
//           uniform directions, pooled over A u B. Sign-aligning by the
//           entity's attribute label keeps the two poles from canceling.
//   test 3: {cos(a, d)} vs cosines of n_random synthetic entities with d,
//           run per side and Bonferroni-combined: p = min(1, 2 min(pA, pB)).
//           Synthetic entities are sphere-uniform, scaled to the median
//           entity norm.
// passed requires all three p-values below alpha_corrected.
DirectionValidation validate_direction(const BiasDirection& direction, const EntityGroup& a,
                                       const EntityGroup& b, const EmbeddingSpace& space,
                                       int n_random, std::uint64_t seed, double alpha_corrected);

}  // namespace aab
