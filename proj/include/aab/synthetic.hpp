#pragma once

#include <cstdint>
#include <vector>

#include "aab/core.hpp"

namespace aab {

// Planted-bias generator: group A is centered at +c*g, group B at -c*g, and
// the two test clusters sit at displacement c along directions whose cosine
// with g equals the alignment parameters. Everything is Gaussian with
// isotropic noise, so expected association scores are analytically
// controllable and the true direction g is returned as an oracle.
struct PlantedConfig {
    std::size_t dim = 16;
    std::size_t n_a = 50;
    std::size_t n_b = 50;
    std::size_t n_e = 50;
    std::size_t n_p = 50;
    double bias_strength = 1.0;  // displacement c along g; 0 plants no signal
    double noise_sigma = 0.3;
    double e_alignment = 0.8;   // mean cosine of E's cluster center with g
    double p_alignment = -0.8;  // mean cosine of P's cluster center with g
    std::uint64_t seed = 1;

    void validate() const;
};

struct PlantedSpace {
    EmbeddingSpace space;
    EntityGroup group_a;
    EntityGroup group_b;
    EntityGroup group_e;
    EntityGroup group_p;
    std::vector<double> true_direction;
};

PlantedSpace generate_planted_space(const PlantedConfig& config);

// Implicit-feedback interaction triples. Weights are positive; (user, item)
// pairs are unique.
struct Interaction {
    EntityId user;
    EntityId item;
    double weight = 1.0;
};

struct InteractionLog {
    std::vector<Interaction> triples;
};

// Gender-of-listener style skew: users carry attribute A or B, items carry
// genre E or P; A-users pick E-items `skew` times more often than P-items,
// and B-users the inverse.
struct SkewedLogConfig {
    std::size_t n_users_per_attribute = 150;
    std::size_t n_items_per_genre = 60;
    std::size_t items_per_user = 25;
    double skew = 4.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SkewedLog {
    InteractionLog log;
    EntityGroup users_a;
    EntityGroup users_b;
    EntityGroup items_e;
    EntityGroup items_p;
};

SkewedLog generate_skewed_log(const SkewedLogConfig& config);

struct ToyMfConfig {
    std::size_t dim = 8;
    int epochs = 8;
    double regularization = 0.05;
    double confidence = 20.0;         // implicit-feedback confidence weight
    double attribute_strength = 1.0;  // magnitude of the per-attribute offset
};

// Alternating-least-squares implicit matrix factorization over the log.
// When use_attribute is set, user vectors carry a fixed per-attribute offset
// (+s*d for users_a, -s*d for users_b, d a seeded unit direction) during
// training, and the offset stays in the exported user vectors; this is the
// stand-in for training a recommender with the sensitive attribute as a
// feature. Fully deterministic given the seed.
EmbeddingSpace train_toy_mf(const InteractionLog& log, const EntityGroup& users_a,
                            const EntityGroup& users_b, bool use_attribute,
                            const ToyMfConfig& config, std::uint64_t seed);

}  // namespace aab
