#include "aab/reference.hpp"

#include <cmath>
#include <vector>

namespace aab::oracle {

namespace {

double cos_ref(const EmbeddingSpace& space, const EntityId& x, const EntityId& y) {
    const auto u = space.row(x);
    const auto v = space.row(y);
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

double cos_dir_ref(const EmbeddingSpace& space, const EntityId& x,
                   const std::vector<double>& d) {
    const auto u = space.row(x);
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * d[i];
        uu += u[i] * u[i];
        vv += d[i] * d[i];
    }
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

double stddev_ref(const std::vector<double>& vals) {
    double m = 0.0;
    for (double v : vals) m += v;
    m /= static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(vals.size()));
}

}  // namespace

double eaa(const EntityId& entity, const EntityGroup& a, const EntityGroup& b,
           const EmbeddingSpace& space) {
    double sa = 0.0;
    for (const auto& id : a.members) sa += cos_ref(space, entity, id);
    double sb = 0.0;
    for (const auto& id : b.members) sb += cos_ref(space, entity, id);
    return sa / static_cast<double>(a.members.size()) -
           sb / static_cast<double>(b.members.size());
}

double geaa(const EntityGroup& e, const EntityGroup& a, const EntityGroup& b,
            const EmbeddingSpace& space) {
    double s = 0.0;
    for (const auto& id : e.members) s += eaa(id, a, b, space);
    return s;
}

double deaa(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
            const EntityGroup& b, const EmbeddingSpace& space) {
    return geaa(e, a, b, space) - geaa(p, a, b, space);
}

double eaa_effect_size(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
                       const EntityGroup& b, const EmbeddingSpace& space) {
    std::vector<double> pooled;
    double me = 0.0, mp = 0.0;
    for (const auto& id : e.members) {
        const double v = eaa(id, a, b, space);
        pooled.push_back(v);
        me += v;
    }
    for (const auto& id : p.members) {
        const double v = eaa(id, a, b, space);
        pooled.push_back(v);
        mp += v;
    }
    me /= static_cast<double>(e.members.size());
    mp /= static_cast<double>(p.members.size());
    return (me - mp) / stddev_ref(pooled);
}

double rripa(const EntityGroup& e, const BiasDirection& psi, const EmbeddingSpace& space) {
    double s = 0.0;
    for (const auto& id : e.members) s += cos_dir_ref(space, id, psi.vector);
    return s / static_cast<double>(e.members.size());
}

double rripa_effect_size(const EntityGroup& e, const EntityGroup& p, const BiasDirection& psi,
                         const EmbeddingSpace& space) {
    std::vector<double> pooled;
    for (const auto& id : e.members) pooled.push_back(cos_dir_ref(space, id, psi.vector));
    for (const auto& id : p.members) pooled.push_back(cos_dir_ref(space, id, psi.vector));
    return (rripa(e, psi, space) - rripa(p, psi, space)) / stddev_ref(pooled);
}

}  // namespace aab::oracle
