#include "aab/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace aab {

const char* role_name(Role r) {
    switch (r) {
        case Role::A: return "A";
        case Role::B: return "B";
        case Role::E: return "E";
        case Role::P: return "P";
        case Role::Unassigned: return "unassigned";
    }
    return "unassigned";
}

Role role_from_name(const std::string& s) {
    if (s == "A" || s == "a") return Role::A;
    if (s == "B" || s == "b") return Role::B;
    if (s == "E" || s == "e") return Role::E;
    if (s == "P" || s == "p") return Role::P;
    if (s == "unassigned") return Role::Unassigned;
    throw ValidationError("unknown group role: " + s);
}

EmbeddingSpace::EmbeddingSpace(std::string name, std::size_t dim, std::string variant_tag)
    : name_(std::move(name)), variant_tag_(std::move(variant_tag)), dim_(dim) {
    if (dim_ < 2) {
        throw ValidationError("embedding dimension must be >= 2, got " + std::to_string(dim_));
    }
}

void EmbeddingSpace::add_row(const EntityId& id, std::span<const double> vec) {
    if (id.empty()) {
        throw ValidationError("empty entity id");
    }
    if (vec.size() != dim_) {
        throw ValidationError("row '" + id + "' has dimension " + std::to_string(vec.size()) +
                              ", expected " + std::to_string(dim_));
    }
    if (index_.count(id)) {
        throw ValidationError("duplicate entity id '" + id + "'");
    }
    double norm2 = 0.0;
    for (double x : vec) {
        if (!std::isfinite(x)) {
            throw ValidationError("row '" + id + "' contains a non-finite component");
        }
        norm2 += x * x;
    }
    if (norm2 == 0.0) {
        throw DegenerateInputError("row '" + id + "' has zero norm");
    }
    index_.emplace(id, ids_.size());
    ids_.push_back(id);
    data_.insert(data_.end(), vec.begin(), vec.end());
    norms_.push_back(std::sqrt(norm2));
}

std::size_t EmbeddingSpace::index_of(const EntityId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw LookupError("entity id '" + id + "' not found in space '" + name_ + "'");
    }
    return it->second;
}

void EntityGroup::validate() const {
    if (members.empty()) {
        throw ValidationError("group '" + name + "' is empty");
    }
    std::unordered_set<EntityId> seen;
    for (const auto& id : members) {
        if (id.empty()) {
            throw ValidationError("group '" + name + "' contains an empty id");
        }
        if (!seen.insert(id).second) {
            throw ValidationError("group '" + name + "' contains duplicate id '" + id + "'");
        }
    }
}

void AttributeLabeling::validate() const {
    positive_group.validate();
    negative_group.validate();
    require_disjoint(positive_group, negative_group);
}

double dot(std::span<const double> u, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
}

double norm(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) {
        throw DegenerateInputError("cosine of a zero-norm vector");
    }
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

std::vector<double> centroid(const EntityGroup& group, const EmbeddingSpace& space) {
    group.validate();
    // accumulate in row-index order so the result is exactly invariant
    // under re-ordering of the member list
    std::vector<std::size_t> rows = resolve(group, space);
    std::sort(rows.begin(), rows.end());
    std::vector<double> acc(space.dim(), 0.0);
    for (std::size_t r : rows) {
        const auto row = space.row(r);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += row[j];
    }
    const double inv = 1.0 / static_cast<double>(group.members.size());
    for (auto& x : acc) x *= inv;
    return acc;
}

double population_stddev(std::span<const double> values) {
    if (values.size() < 2) {
        throw InsufficientDataError("population_stddev needs >= 2 values, got " +
                                    std::to_string(values.size()));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

std::vector<std::size_t> resolve(const EntityGroup& group, const EmbeddingSpace& space) {
    std::vector<std::size_t> rows;
    rows.reserve(group.members.size());
    for (const auto& id : group.members) rows.push_back(space.index_of(id));
    return rows;
}

void require_disjoint(const EntityGroup& x, const EntityGroup& y) {
    std::unordered_set<EntityId> xs(x.members.begin(), x.members.end());
    std::string overlap;
    for (const auto& id : y.members) {
        if (xs.count(id)) {
            if (!overlap.empty()) overlap += ", ";
            overlap += id;
        }
    }
    if (!overlap.empty()) {
        throw ValidationError("groups '" + x.name + "' and '" + y.name +
                              "' overlap on ids: " + overlap);
    }
}

std::vector<double> normalized(std::span<const double> v) {
    const double n = norm(v);
    if (n == 0.0) {
        throw DegenerateInputError("cannot normalize a zero-norm vector");
    }
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x /= n;
    return out;
}

}  // namespace aab
