#pragma once

#include "aab/core.hpp"
#include "aab/directions.hpp"

// Naive double-loop reference implementations of the association metrics.
// Deliberately independent of the kernel/metric code paths: everything here
// goes through its own local cosine and plain accumulation, so it can act as
// an oracle for the optimized implementations.
namespace aab::oracle {

double eaa(const EntityId& entity, const EntityGroup& a, const EntityGroup& b,
           const EmbeddingSpace& space);

double geaa(const EntityGroup& e, const EntityGroup& a, const EntityGroup& b,
            const EmbeddingSpace& space);

double deaa(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
            const EntityGroup& b, const EmbeddingSpace& space);

double eaa_effect_size(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
                       const EntityGroup& b, const EmbeddingSpace& space);

double rripa(const EntityGroup& e, const BiasDirection& psi, const EmbeddingSpace& space);

double rripa_effect_size(const EntityGroup& e, const EntityGroup& p, const BiasDirection& psi,
                         const EmbeddingSpace& space);

}  // namespace aab::oracle
