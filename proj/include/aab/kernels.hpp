#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aab/core.hpp"

// Data-parallel inner loops shared by the metric, significance and direction
// code. Every kernel comes in two variants: a plain serial form (the reference
// the tests compare against) and an OpenMP form. The OpenMP form writes each
// output slot from exactly the same arithmetic as the serial form and reduces
// nothing across threads, so the two are bit-identical for any thread count.
namespace aab::kernels {

// cos(row_i, q) for each row index in `rows`.
std::vector<double> cosines_with_serial(const EmbeddingSpace& space,
                                        std::span<const std::size_t> rows,
                                        std::span<const double> q);
std::vector<double> cosines_with(const EmbeddingSpace& space,
                                 std::span<const std::size_t> rows,
                                 std::span<const double> q);

// Per-entity attribute association score for each target row:
//   mean_{a in a_rows} cos(t, a) - mean_{b in b_rows} cos(t, b)
std::vector<double> eaa_batch_serial(const EmbeddingSpace& space,
                                     std::span<const std::size_t> targets,
                                     std::span<const std::size_t> a_rows,
                                     std::span<const std::size_t> b_rows);
std::vector<double> eaa_batch(const EmbeddingSpace& space,
                              std::span<const std::size_t> targets,
                              std::span<const std::size_t> a_rows,
                              std::span<const std::size_t> b_rows);

// For each member m: sum over targets of cos(target, m). Feeds the label-
// shuffling null of the group association test without materializing the
// full cosine matrix.
std::vector<double> cosine_colsums_serial(const EmbeddingSpace& space,
                                          std::span<const std::size_t> targets,
                                          std::span<const std::size_t> members);
std::vector<double> cosine_colsums(const EmbeddingSpace& space,
                                   std::span<const std::size_t> targets,
                                   std::span<const std::size_t> members);

// cos(row, dir_j) for every (row, direction) pair, flattened row-major:
// out[i * dirs.size() + j]. Directions must be unit vectors.
std::vector<double> cosine_cross_serial(const EmbeddingSpace& space,
                                        std::span<const std::size_t> rows,
                                        const std::vector<std::vector<double>>& dirs);
std::vector<double> cosine_cross(const EmbeddingSpace& space,
                                 std::span<const std::size_t> rows,
                                 const std::vector<std::vector<double>>& dirs);

}  // namespace aab::kernels
