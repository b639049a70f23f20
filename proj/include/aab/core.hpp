#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aab/error.hpp"

namespace aab {

using EntityId = std::string;

enum class Role { A, B, E, P, Unassigned };

const char* role_name(Role r);
Role role_from_name(const std::string& s);

// Dense id-indexed embedding matrix for one trained model variant.
// Immutable after loading; safe for shared read-only access from parallel
// workers. Rows are stored contiguously (row-major) with cached norms.
class EmbeddingSpace {
  public:
    EmbeddingSpace() = default;
    EmbeddingSpace(std::string name, std::size_t dim, std::string variant_tag = "");

    // Rejects: empty id, duplicate id, dimension mismatch, non-finite
    // components, zero-norm vectors (meaningless under cosine geometry).
    void add_row(const EntityId& id, std::span<const double> vec);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    std::span<const double> row(const EntityId& id) const { return row(index_of(id)); }

    double norm(std::size_t i) const { return norms_[i]; }

    std::size_t index_of(const EntityId& id) const;
    bool contains(const EntityId& id) const { return index_.count(id) != 0; }

    const std::vector<EntityId>& ids() const { return ids_; }
    const std::string& name() const { return name_; }
    const std::string& variant_tag() const { return variant_tag_; }

  private:
    std::string name_;
    std::string variant_tag_;
    std::size_t dim_ = 0;
    std::vector<double> data_;
    std::vector<double> norms_;
    std::vector<EntityId> ids_;
    std::unordered_map<EntityId, std::size_t> index_;
};

// Named, ordered set of entity ids playing one of the audit roles.
struct EntityGroup {
    std::string name;
    Role role = Role::Unassigned;
    std::vector<EntityId> members;

    void validate() const;  // non-empty, no duplicate ids
};

// Binary attribute contrast: positive_group labeled 1, negative_group 0.
struct AttributeLabeling {
    std::string attribute_name;
    EntityGroup positive_group;
    EntityGroup negative_group;

    void validate() const;
};

// ---- elementary vector statistics ----

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);

// cos(u, v); throws DegenerateInputError on a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

// Component-wise mean of the group's member vectors.
std::vector<double> centroid(const EntityGroup& group, const EmbeddingSpace& space);

// Population standard deviation (divisor n). The n-divisor form is fixed so
// effect sizes are comparable across group sizes; callers must not switch to
// the sample (n-1) form.
double population_stddev(std::span<const double> values);

// Row indices of the group's members; LookupError names the missing id.
std::vector<std::size_t> resolve(const EntityGroup& group, const EmbeddingSpace& space);

// ValidationError listing every id present in both groups.
void require_disjoint(const EntityGroup& x, const EntityGroup& y);

std::vector<double> normalized(std::span<const double> v);  // DegenerateInputError on zero norm

}  // namespace aab
