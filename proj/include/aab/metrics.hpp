#pragma once

#include <vector>

#include "aab/core.hpp"
#include "aab/directions.hpp"

namespace aab {

// Per-entity association score: difference of mean cosines against the two
// attribute-defining sets. Positive values mean closer association with A.
struct EaaScore {
    EntityId entity;
    double value = 0.0;  // always in [-2, 2]
};

// Every metric for one (direction, variant) audit cell. The identities
// deaa == geaa_e - geaa_p and rripa_differential == rripa_e - rripa_p hold
// exactly, by construction.
struct MetricBundle {
    double geaa_e = 0.0;
    double geaa_p = 0.0;
    double deaa = 0.0;
    double effect_size = 0.0;
    double rripa_e = 0.0;
    double rripa_p = 0.0;
    double rripa_differential = 0.0;
    double rripa_effect = 0.0;
    std::vector<EaaScore> eaa_e;
    std::vector<EaaScore> eaa_p;
    // means are a toolkit extra for cross-size comparability; the group
    // scores themselves are sums and scale with |E|, |P|.
    double mean_eaa_e = 0.0;
    double mean_eaa_p = 0.0;
};

EaaScore eaa(const EntityId& entity, const EntityGroup& a, const EntityGroup& b,
             const EmbeddingSpace& space);

// Sum (not mean) of per-entity scores over the test set.
double geaa(const EntityGroup& e, const EntityGroup& a, const EntityGroup& b,
            const EmbeddingSpace& space);

double deaa(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
            const EntityGroup& b, const EmbeddingSpace& space);

// (mean EAA over E - mean EAA over P) / population stddev of EAA over E u P.
double eaa_effect_size(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
                       const EntityGroup& b, const EmbeddingSpace& space);

// Mean cosine of the test set with a unit bias direction.
double rripa(const EntityGroup& e, const BiasDirection& psi, const EmbeddingSpace& space);

double rripa_effect_size(const EntityGroup& e, const EntityGroup& p, const BiasDirection& psi,
                         const EmbeddingSpace& space);

// All metrics in one pass; when `psi` is null the direction-parameterized
// entries are left at zero and marked absent by the caller.
MetricBundle compute_metric_bundle(const EntityGroup& e, const EntityGroup& p,
                                   const EntityGroup& a, const EntityGroup& b,
                                   const EmbeddingSpace& space,
                                   const BiasDirection* psi = nullptr);

// Throws ValidationError when `test_group` shares ids with an attribute
// group (the contrast is ill-posed under contamination).
void require_uncontaminated(const EntityGroup& test_group, const EntityGroup& a,
                            const EntityGroup& b);

}  // namespace aab
