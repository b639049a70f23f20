#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aab/core.hpp"

namespace aab {

// Mean-centered PCA basis fit on a chosen entity subset. Components are
// pairwise orthonormal and ordered by eigenvalue; any entity of the same
// dimension can be projected into the basis afterwards.
struct ProjectionModel {
    std::vector<double> mean;
    std::vector<std::vector<double>> components;
    std::vector<double> explained_variance;        // eigenvalues, non-increasing
    std::vector<double> explained_variance_share;  // eigenvalue / total variance
    std::vector<EntityId> fit_entity_ids;
};

// Power-iteration PCA with deflation. Throws when the entity count or the
// data's numerical rank cannot support n_components, naming the achievable
// rank. Directions beyond the data's spread (zero eigenvalue) are completed
// orthonormally with zero explained variance so collinear clouds still get
// a full plotting basis.
ProjectionModel fit_projection(const EntityGroup& entities, const EmbeddingSpace& space,
                               std::size_t n_components, std::uint64_t seed);

struct ProjectedPoint {
    EntityId id;
    std::vector<double> coords;
};

std::vector<ProjectedPoint> project(const ProjectionModel& model, const EntityGroup& targets,
                                    const EmbeddingSpace& space);

// Scatter artifacts for the first two coordinates. Points are emitted in
// ascending id order so outputs are byte-stable. Labels map id -> class
// name; ids without a label get the empty class.
void emit_scatter_csv(const std::vector<ProjectedPoint>& points,
                      const std::vector<std::pair<EntityId, std::string>>& labels,
                      const std::string& path);
void emit_scatter_svg(const std::vector<ProjectedPoint>& points,
                      const std::vector<std::pair<EntityId, std::string>>& labels,
                      const std::string& path, int width = 800, int height = 600);

}  // namespace aab
