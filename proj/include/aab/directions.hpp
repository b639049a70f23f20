#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aab/core.hpp"

namespace aab {

enum class DirectionMethod { CentroidDifference, LinearProbe, PairedPca };

const char* direction_method_name(DirectionMethod m);
DirectionMethod direction_method_from_name(const std::string& s);

// Outcome of the three-test protocol that checks a direction captures
// attribute signal rather than a random latent relationship.
struct DirectionValidation {
    double test1_p = 1.0;  // group-A vs group-B cosine distributions
    double test2_p = 1.0;  // attribute-direction vs random-direction cosines
    double test3_p = 1.0;  // real-entity vs random-entity cosines with the direction
    double alpha_corrected = 0.05;
    int n_random = 0;
    std::uint64_t seed = 0;
    bool passed = false;  // all three p-values below alpha_corrected
};

// Unit vector separating the attribute groups. Orientation convention:
// non-negative cosine with centroid(A) - centroid(B), so signs are stable
// when comparing model variants.
struct BiasDirection {
    std::vector<double> vector;
    DirectionMethod method = DirectionMethod::CentroidDifference;
    std::string group_a;
    std::string group_b;
    std::uint64_t seed = 0;
    std::string label;  // preset name used in reports, e.g. "cd", "svc", "csvc-200"
    std::optional<DirectionValidation> validation;
};

struct ProbeHyperparameters {
    double regularization = 1e-3;
    int epochs = 500;
    double split_fraction = 0.8;  // share of each group used for training
};

// L2-regularized hinge-loss linear classifier, trained by deterministic
// full-batch subgradient descent. Labels: group A -> +1, group B -> -1.
struct LinearProbe {
    std::vector<double> weights;
    double intercept = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<EntityId> training_ids;
    ProbeHyperparameters hp;
    std::uint64_t seed = 0;
    bool converged = true;
    std::string warning;               // set on non-convergence, never an error
    std::vector<double> orient_hint;   // centroid(A) - centroid(B) captured at train time
    std::string group_a;
    std::string group_b;
};

// normalize(centroid(A) - centroid(B)); DegenerateInputError when the
// centroids coincide within 1e-12 (no attribute separation).
BiasDirection centroid_difference_direction(const EntityGroup& a, const EntityGroup& b,
                                            const EmbeddingSpace& space);

LinearProbe train_linear_probe(const EntityGroup& a, const EntityGroup& b,
                               const EmbeddingSpace& space, double split_fraction,
                               std::uint64_t seed, ProbeHyperparameters hp = {});

BiasDirection probe_direction(const LinearProbe& probe);

// The k members most aligned with the direction: largest cosine for a group
// in role A (or any non-B role), most negative for role B. Ties break toward
// the lexicographically smaller id.
EntityGroup most_biased_entities(const EntityGroup& group, const BiasDirection& direction,
                                 const EmbeddingSpace& space, std::size_t k);

// First principal component of the mean-centered pair differences a_i - b_i.
// A rank-deficient difference set (all differences parallel) is not an
// error: the shared direction is returned.
BiasDirection paired_pca_direction(const std::vector<std::pair<EntityId, EntityId>>& pairs,
                                   const EmbeddingSpace& space, std::uint64_t seed);

// Seeded random cross-attribute pairing (without replacement) used to feed
// paired_pca_direction when no natural pairing exists.
std::vector<std::pair<EntityId, EntityId>> random_cross_pairs(const EntityGroup& a,
                                                              const EntityGroup& b,
                                                              std::size_t n_pairs,
                                                              std::uint64_t seed);

}  // namespace aab
