#include "aab/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "aab/linalg.hpp"
#include "aab/rng.hpp"

namespace aab {

namespace {

EntityId padded_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, i);
    return buf;
}

// Random unit vector orthogonal to g.
std::vector<double> orthogonal_unit(std::span<const double> g, Rng& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        auto u = rng.unit_vector(g.size());
        double proj = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) proj += u[i] * g[i];
        double n2 = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] -= proj * g[i];
            n2 += u[i] * u[i];
        }
        if (n2 > 1e-12) {
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& x : u) x *= inv;
            return u;
        }
    }
    throw DegenerateInputError("could not draw a vector orthogonal to g");
}

}  // namespace

void PlantedConfig::validate() const {
    if (dim < 4) throw ValidationError("planted config: dim must be >= 4");
    if (n_a < 5 || n_b < 5 || n_e < 5 || n_p < 5) {
        throw ValidationError("planted config: all group counts must be >= 5");
    }
    if (bias_strength < 0.0) throw ValidationError("planted config: bias_strength must be >= 0");
    if (noise_sigma < 0.0) throw ValidationError("planted config: noise_sigma must be >= 0");
    if (std::abs(e_alignment) > 1.0 || std::abs(p_alignment) > 1.0) {
        throw ValidationError("planted config: alignments must lie in [-1, 1]");
    }
    if (bias_strength == 0.0 && noise_sigma == 0.0) {
        throw ValidationError("planted config: c = 0 with sigma = 0 would plant zero vectors");
    }
}

PlantedSpace generate_planted_space(const PlantedConfig& config) {
    config.validate();
    const std::size_t d = config.dim;
    Rng dir_rng = Rng::substream(config.seed, 0);
    const auto g = dir_rng.unit_vector(d);
    Rng he_rng = Rng::substream(config.seed, 1);
    Rng hp_rng = Rng::substream(config.seed, 2);
    const auto h_e = orthogonal_unit(g, he_rng);
    const auto h_p = orthogonal_unit(g, hp_rng);

    const double c = config.bias_strength;
    auto cluster_center = [&](double align, const std::vector<double>& h) {
        const double ortho = std::sqrt(std::max(0.0, 1.0 - align * align));
        std::vector<double> center(d);
        for (std::size_t i = 0; i < d; ++i) center[i] = c * (align * g[i] + ortho * h[i]);
        return center;
    };
    std::vector<double> center_a(d), center_b(d);
    for (std::size_t i = 0; i < d; ++i) {
        center_a[i] = c * g[i];
        center_b[i] = -c * g[i];
    }
    const auto center_e = cluster_center(config.e_alignment, h_e);
    const auto center_p = cluster_center(config.p_alignment, h_p);

    PlantedSpace out{EmbeddingSpace("planted", d, "planted"), {}, {}, {}, {}, g};
    struct Block {
        const char* prefix;
        const std::vector<double>* center;
        std::size_t count;
        std::uint64_t stream_base;
        EntityGroup* group;
        Role role;
    };
    Block blocks[] = {
        {"a", &center_a, config.n_a, 1ULL << 20, &out.group_a, Role::A},
        {"b", &center_b, config.n_b, 2ULL << 20, &out.group_b, Role::B},
        {"e", &center_e, config.n_e, 3ULL << 20, &out.group_e, Role::E},
        {"p", &center_p, config.n_p, 4ULL << 20, &out.group_p, Role::P},
    };
    std::vector<double> vec(d);
    for (auto& blk : blocks) {
        blk.group->name = std::string(1, static_cast<char>(std::toupper(blk.prefix[0])));
        blk.group->role = blk.role;
        for (std::size_t i = 0; i < blk.count; ++i) {
            Rng rng = Rng::substream(config.seed, blk.stream_base + i);
            for (std::size_t j = 0; j < d; ++j) {
                vec[j] = (*blk.center)[j] + config.noise_sigma * rng.normal();
            }
            const EntityId id = padded_id(blk.prefix, i);
            out.space.add_row(id, vec);
            blk.group->members.push_back(id);
        }
    }
    return out;
}

void SkewedLogConfig::validate() const {
    if (n_users_per_attribute < 5) {
        throw ValidationError("skewed log: need >= 5 users per attribute");
    }
    if (n_items_per_genre < 5) throw ValidationError("skewed log: need >= 5 items per genre");
    if (items_per_user == 0 || items_per_user > 2 * n_items_per_genre) {
        throw ValidationError("skewed log: items_per_user outside [1, total items]");
    }
    if (skew <= 0.0) throw ValidationError("skewed log: skew must be positive");
}

SkewedLog generate_skewed_log(const SkewedLogConfig& config) {
    config.validate();
    SkewedLog out;
    out.users_a = {"A", Role::A, {}};
    out.users_b = {"B", Role::B, {}};
    out.items_e = {"E", Role::E, {}};
    out.items_p = {"P", Role::P, {}};
    for (std::size_t i = 0; i < config.n_items_per_genre; ++i) {
        out.items_e.members.push_back(padded_id("ie", i));
        out.items_p.members.push_back(padded_id("ip", i));
    }
    const double p_preferred = config.skew / (config.skew + 1.0);
    auto emit_user = [&](const EntityId& user, const std::vector<EntityId>& preferred,
                         const std::vector<EntityId>& other, Rng& rng) {
        std::vector<std::size_t> avail_pref(preferred.size()), avail_other(other.size());
        for (std::size_t i = 0; i < avail_pref.size(); ++i) avail_pref[i] = i;
        for (std::size_t i = 0; i < avail_other.size(); ++i) avail_other[i] = i;
        auto pop_uniform = [&](std::vector<std::size_t>& avail) {
            const std::size_t k = rng.below(avail.size());
            const std::size_t idx = avail[k];
            avail[k] = avail.back();
            avail.pop_back();
            return idx;
        };
        for (std::size_t n = 0; n < config.items_per_user; ++n) {
            const bool take_pref = rng.uniform01() < p_preferred;
            if ((take_pref && !avail_pref.empty()) || avail_other.empty()) {
                out.log.triples.push_back({user, preferred[pop_uniform(avail_pref)], 1.0});
            } else {
                out.log.triples.push_back({user, other[pop_uniform(avail_other)], 1.0});
            }
        }
    };
    for (std::size_t u = 0; u < config.n_users_per_attribute; ++u) {
        const EntityId id = padded_id("ua", u);
        out.users_a.members.push_back(id);
        Rng rng = Rng::substream(config.seed, (1ULL << 24) + u);
        emit_user(id, out.items_e.members, out.items_p.members, rng);
    }
    for (std::size_t u = 0; u < config.n_users_per_attribute; ++u) {
        const EntityId id = padded_id("ub", u);
        out.users_b.members.push_back(id);
        Rng rng = Rng::substream(config.seed, (2ULL << 24) + u);
        emit_user(id, out.items_p.members, out.items_e.members, rng);
    }
    return out;
}

EmbeddingSpace train_toy_mf(const InteractionLog& log, const EntityGroup& users_a,
                            const EntityGroup& users_b, bool use_attribute,
                            const ToyMfConfig& config, std::uint64_t seed) {
    if (log.triples.empty()) throw ValidationError("train_toy_mf: empty interaction log");
    const std::size_t k = config.dim;

    // stable first-appearance indexing of users and items
    std::vector<EntityId> users, items;
    std::unordered_map<EntityId, std::size_t> user_idx, item_idx;
    for (const auto& t : log.triples) {
        if (t.weight <= 0.0) throw ValidationError("train_toy_mf: non-positive weight");
        if (user_idx.emplace(t.user, users.size()).second) users.push_back(t.user);
        if (item_idx.emplace(t.item, items.size()).second) items.push_back(t.item);
    }
    std::unordered_set<EntityId> seen_pairs;
    seen_pairs.reserve(log.triples.size());
    for (const auto& t : log.triples) {
        if (!seen_pairs.insert(t.user + "\t" + t.item).second) {
            throw ValidationError("train_toy_mf: duplicate (user, item) pair " + t.user + "/" +
                                  t.item);
        }
    }

    std::vector<int> attr(users.size(), 0);
    for (const auto& id : users_a.members) {
        auto it = user_idx.find(id);
        if (it != user_idx.end()) attr[it->second] = 1;
    }
    for (const auto& id : users_b.members) {
        auto it = user_idx.find(id);
        if (it != user_idx.end()) attr[it->second] = -1;
    }
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (attr[u] == 0) {
            throw ValidationError("train_toy_mf: user '" + users[u] + "' has no attribute label");
        }
    }

    // per-user and per-item observation lists
    std::vector<std::vector<std::pair<std::size_t, double>>> by_user(users.size()),
        by_item(items.size());
    for (const auto& t : log.triples) {
        const std::size_t u = user_idx[t.user], i = item_idx[t.item];
        by_user[u].emplace_back(i, t.weight);
        by_item[i].emplace_back(u, t.weight);
    }

    // fixed per-attribute offset direction (zero when the feature is off)
    std::vector<double> offset_dir(k, 0.0);
    if (use_attribute) {
        offset_dir = Rng::substream(seed, 0).unit_vector(k);
        for (auto& x : offset_dir) x *= config.attribute_strength;
    }

    std::vector<double> x(users.size() * k, 0.0);  // personal user factors
    std::vector<double> y(items.size() * k);       // item factors
    for (std::size_t i = 0; i < items.size(); ++i) {
        Rng rng = Rng::substream(seed, (1ULL << 32) + i);
        for (std::size_t j = 0; j < k; ++j) y[i * k + j] = 0.1 * rng.normal();
    }

    const double alpha = config.confidence;
    const double lambda = config.regularization;
    std::vector<double> gram(k * k);  // Y^T Y or X^T X of the fixed side

    auto effective_user = [&](std::size_t u, std::size_t j) {
        return x[u * k + j] + static_cast<double>(attr[u]) * offset_dir[j];
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // users given items
        std::fill(gram.begin(), gram.end(), 0.0);
        for (std::size_t i = 0; i < items.size(); ++i) {
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t c = 0; c <= r; ++c) {
                    gram[r * k + c] += y[i * k + r] * y[i * k + c];
                }
            }
        }
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = r + 1; c < k; ++c) gram[r * k + c] = gram[c * k + r];
        }
#pragma omp parallel for schedule(static)
        for (std::int64_t u = 0; u < static_cast<std::int64_t>(users.size()); ++u) {
            std::vector<double> m(gram);
            std::vector<double> b(k, 0.0);
            for (const auto& [i, w] : by_user[u]) {
                const double extra = alpha * w;
                for (std::size_t r = 0; r < k; ++r) {
                    for (std::size_t c = 0; c <= r; ++c) {
                        m[r * k + c] += extra * y[i * k + r] * y[i * k + c];
                    }
                    b[r] += (1.0 + extra) * y[i * k + r];
                }
            }
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t c = r + 1; c < k; ++c) m[r * k + c] = m[c * k + r];
            }
            // subtract the offset's contribution: b -= (M - lambda I) * o
            if (use_attribute) {
                for (std::size_t r = 0; r < k; ++r) {
                    double mo = 0.0;
                    for (std::size_t c = 0; c < k; ++c) {
                        mo += m[r * k + c] * (static_cast<double>(attr[u]) * offset_dir[c]);
                    }
                    b[r] -= mo;
                }
            }
            for (std::size_t r = 0; r < k; ++r) m[r * k + r] += lambda;
            const auto sol = solve_spd(std::move(m), std::move(b), k);
            for (std::size_t j = 0; j < k; ++j) x[u * k + j] = sol[j];
        }

        // items given users (effective user vectors include the offset)
        std::fill(gram.begin(), gram.end(), 0.0);
        for (std::size_t u = 0; u < users.size(); ++u) {
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t c = 0; c <= r; ++c) {
                    gram[r * k + c] += effective_user(u, r) * effective_user(u, c);
                }
            }
        }
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = r + 1; c < k; ++c) gram[r * k + c] = gram[c * k + r];
        }
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(items.size()); ++i) {
            std::vector<double> m(gram);
            std::vector<double> b(k, 0.0);
            for (const auto& [u, w] : by_item[i]) {
                const double extra = alpha * w;
                for (std::size_t r = 0; r < k; ++r) {
                    for (std::size_t c = 0; c <= r; ++c) {
                        m[r * k + c] += extra * effective_user(u, r) * effective_user(u, c);
                    }
                    b[r] += (1.0 + extra) * effective_user(u, r);
                }
            }
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t c = r + 1; c < k; ++c) m[r * k + c] = m[c * k + r];
            }
            for (std::size_t r = 0; r < k; ++r) m[r * k + r] += lambda;
            const auto sol = solve_spd(std::move(m), std::move(b), k);
            for (std::size_t j = 0; j < k; ++j) y[i * k + j] = sol[j];
        }
    }

    EmbeddingSpace space("toy_mf", k, use_attribute ? "with-attribute" : "without-attribute");
    std::vector<double> vec(k);
    for (std::size_t u = 0; u < users.size(); ++u) {
        for (std::size_t j = 0; j < k; ++j) vec[j] = effective_user(u, j);
        space.add_row(users[u], vec);
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = 0; j < k; ++j) vec[j] = y[i * k + j];
        space.add_row(items[i], vec);
    }
    return space;
}

}  // namespace aab
