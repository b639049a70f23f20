#include "aab/metrics.hpp"

#include <cmath>
#include <unordered_set>

#include "aab/kernels.hpp"

namespace aab {

void require_uncontaminated(const EntityGroup& test_group, const EntityGroup& a,
                            const EntityGroup& b) {
    require_disjoint(test_group, a);
    require_disjoint(test_group, b);
}

namespace {

void check_unit(const BiasDirection& psi) {
    const double n = norm(psi.vector);
    if (std::abs(n - 1.0) > 1e-8) {
        throw ValidationError("bias direction is not unit-norm (|v| = " + std::to_string(n) + ")");
    }
}

std::vector<EaaScore> eaa_scores(const EntityGroup& e, const EntityGroup& a,
                                 const EntityGroup& b, const EmbeddingSpace& space) {
    e.validate();
    a.validate();
    b.validate();
    require_disjoint(a, b);
    require_uncontaminated(e, a, b);
    const auto targets = resolve(e, space);
    const auto a_rows = resolve(a, space);
    const auto b_rows = resolve(b, space);
    const auto values = kernels::eaa_batch(space, targets, a_rows, b_rows);
    std::vector<EaaScore> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = {e.members[i], values[i]};
    }
    return out;
}

// Sums in member order so parallel and serial runs agree bit for bit.
double sum_values(const std::vector<EaaScore>& scores) {
    double s = 0.0;
    for (const auto& sc : scores) s += sc.value;
    return s;
}

}  // namespace

EaaScore eaa(const EntityId& entity, const EntityGroup& a, const EntityGroup& b,
             const EmbeddingSpace& space) {
    a.validate();
    b.validate();
    require_disjoint(a, b);
    for (const auto& g : {&a, &b}) {
        for (const auto& id : g->members) {
            if (id == entity) {
                throw ValidationError("entity '" + entity + "' is a member of attribute group '" +
                                      g->name + "'");
            }
        }
    }
    const auto v = space.row(entity);
    double sa = 0.0;
    for (const auto& id : a.members) sa += cosine(v, space.row(id));
    double sb = 0.0;
    for (const auto& id : b.members) sb += cosine(v, space.row(id));
    return {entity, sa / static_cast<double>(a.members.size()) -
                        sb / static_cast<double>(b.members.size())};
}

double geaa(const EntityGroup& e, const EntityGroup& a, const EntityGroup& b,
            const EmbeddingSpace& space) {
    return sum_values(eaa_scores(e, a, b, space));
}

double deaa(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
            const EntityGroup& b, const EmbeddingSpace& space) {
    require_disjoint(e, p);
    return geaa(e, a, b, space) - geaa(p, a, b, space);
}

double eaa_effect_size(const EntityGroup& e, const EntityGroup& p, const EntityGroup& a,
                       const EntityGroup& b, const EmbeddingSpace& space) {
    require_disjoint(e, p);
    const auto se = eaa_scores(e, a, b, space);
    const auto sp = eaa_scores(p, a, b, space);
    std::vector<double> pooled;
    pooled.reserve(se.size() + sp.size());
    for (const auto& s : se) pooled.push_back(s.value);
    for (const auto& s : sp) pooled.push_back(s.value);
    const double sd = population_stddev(pooled);
    if (sd == 0.0) {
        throw DegenerateInputError("eaa_effect_size: zero spread in pooled scores");
    }
    const double mean_e = sum_values(se) / static_cast<double>(se.size());
    const double mean_p = sum_values(sp) / static_cast<double>(sp.size());
    return (mean_e - mean_p) / sd;
}

double rripa(const EntityGroup& e, const BiasDirection& psi, const EmbeddingSpace& space) {
    e.validate();
    check_unit(psi);
    const auto rows = resolve(e, space);
    const auto cs = kernels::cosines_with(space, rows, psi.vector);
    double s = 0.0;
    for (double c : cs) s += c;
    return s / static_cast<double>(cs.size());
}

double rripa_effect_size(const EntityGroup& e, const EntityGroup& p, const BiasDirection& psi,
                         const EmbeddingSpace& space) {
    require_disjoint(e, p);
    check_unit(psi);
    const auto rows_e = resolve(e, space);
    const auto rows_p = resolve(p, space);
    const auto cs_e = kernels::cosines_with(space, rows_e, psi.vector);
    const auto cs_p = kernels::cosines_with(space, rows_p, psi.vector);
    std::vector<double> pooled;
    pooled.reserve(cs_e.size() + cs_p.size());
    pooled.insert(pooled.end(), cs_e.begin(), cs_e.end());
    pooled.insert(pooled.end(), cs_p.begin(), cs_p.end());
    const double sd = population_stddev(pooled);
    if (sd == 0.0) {
        throw DegenerateInputError("rripa_effect_size: zero spread in pooled cosines");
    }
    double me = 0.0, mp = 0.0;
    for (double c : cs_e) me += c;
    for (double c : cs_p) mp += c;
    me /= static_cast<double>(cs_e.size());
    mp /= static_cast<double>(cs_p.size());
    return (me - mp) / sd;
}

MetricBundle compute_metric_bundle(const EntityGroup& e, const EntityGroup& p,
                                   const EntityGroup& a, const EntityGroup& b,
                                   const EmbeddingSpace& space, const BiasDirection* psi) {
    require_disjoint(e, p);
    MetricBundle out;
    out.eaa_e = eaa_scores(e, a, b, space);
    out.eaa_p = eaa_scores(p, a, b, space);
    out.geaa_e = sum_values(out.eaa_e);
    out.geaa_p = sum_values(out.eaa_p);
    out.deaa = out.geaa_e - out.geaa_p;
    out.mean_eaa_e = out.geaa_e / static_cast<double>(out.eaa_e.size());
    out.mean_eaa_p = out.geaa_p / static_cast<double>(out.eaa_p.size());

    std::vector<double> pooled;
    pooled.reserve(out.eaa_e.size() + out.eaa_p.size());
    for (const auto& s : out.eaa_e) pooled.push_back(s.value);
    for (const auto& s : out.eaa_p) pooled.push_back(s.value);
    const double sd = population_stddev(pooled);
    if (sd == 0.0) {
        throw DegenerateInputError("effect size: zero spread in pooled scores");
    }
    out.effect_size = (out.mean_eaa_e - out.mean_eaa_p) / sd;

    if (psi != nullptr) {
        out.rripa_e = rripa(e, *psi, space);
        out.rripa_p = rripa(p, *psi, space);
        out.rripa_differential = out.rripa_e - out.rripa_p;
        out.rripa_effect = rripa_effect_size(e, p, *psi, space);
    }
    return out;
}

}  // namespace aab
