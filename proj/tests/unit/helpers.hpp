#pragma once

#include <string>
#include <vector>

#include "aab/core.hpp"
#include "aab/rng.hpp"

namespace aab::testing {

// Space built from explicit (id, vector) rows.
inline EmbeddingSpace make_space(std::size_t dim,
                                 const std::vector<std::pair<EntityId, std::vector<double>>>& rows,
                                 const std::string& name = "test") {
    EmbeddingSpace space(name, dim);
    for (const auto& [id, vec] : rows) space.add_row(id, vec);
    return space;
}

inline EntityGroup make_group(const std::string& name, std::vector<EntityId> members,
                              Role role = Role::Unassigned) {
    return EntityGroup{name, role, std::move(members)};
}

struct RandomInstance {
    EmbeddingSpace space{"random", 4};
    EntityGroup a, b, e, p;
};

// Disjoint random groups of Gaussian vectors, for property tests.
inline RandomInstance random_instance(std::uint64_t seed, std::size_t dim, std::size_t n_a,
                                      std::size_t n_b, std::size_t n_e, std::size_t n_p) {
    RandomInstance inst;
    inst.space = EmbeddingSpace("random", dim);
    Rng rng(seed);
    auto fill = [&](EntityGroup& g, const std::string& prefix, Role role, std::size_t n) {
        g.name = prefix;
        g.role = role;
        std::vector<double> v(dim);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& x : v) x = rng.normal();
            const EntityId id = prefix + std::to_string(i);
            inst.space.add_row(id, v);
            g.members.push_back(id);
        }
    };
    fill(inst.a, "a", Role::A, n_a);
    fill(inst.b, "b", Role::B, n_b);
    fill(inst.e, "e", Role::E, n_e);
    fill(inst.p, "p", Role::P, n_p);
    return inst;
}

}  // namespace aab::testing
