#include "aab/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace aab::kernels {

namespace {

inline double dot_n(const double* u, const double* v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += u[i] * v[i];
    return acc;
}

inline double cos_rows(const EmbeddingSpace& space, std::size_t i, std::size_t j) {
    const std::size_t d = space.dim();
    return dot_n(space.row(i).data(), space.row(j).data(), d) / (space.norm(i) * space.norm(j));
}

inline double cos_row_vec(const EmbeddingSpace& space, std::size_t i, std::span<const double> q,
                          double q_norm) {
    return dot_n(space.row(i).data(), q.data(), space.dim()) / (space.norm(i) * q_norm);
}

inline double eaa_one(const EmbeddingSpace& space, std::size_t t,
                      std::span<const std::size_t> a_rows, std::span<const std::size_t> b_rows) {
    double sa = 0.0;
    for (std::size_t a : a_rows) sa += cos_rows(space, t, a);
    double sb = 0.0;
    for (std::size_t b : b_rows) sb += cos_rows(space, t, b);
    return sa / static_cast<double>(a_rows.size()) - sb / static_cast<double>(b_rows.size());
}

inline double colsum_one(const EmbeddingSpace& space, std::size_t m,
                         std::span<const std::size_t> targets) {
    double s = 0.0;
    for (std::size_t t : targets) s += cos_rows(space, t, m);
    return s;
}

}  // namespace

std::vector<double> cosines_with_serial(const EmbeddingSpace& space,
                                        std::span<const std::size_t> rows,
                                        std::span<const double> q) {
    const double qn = norm(q);
    if (qn == 0.0) throw DegenerateInputError("cosines_with: zero-norm query");
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = cos_row_vec(space, rows[i], q, qn);
    return out;
}

std::vector<double> cosines_with(const EmbeddingSpace& space, std::span<const std::size_t> rows,
                                 std::span<const double> q) {
    const double qn = norm(q);
    if (qn == 0.0) throw DegenerateInputError("cosines_with: zero-norm query");
    std::vector<double> out(rows.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
        out[i] = cos_row_vec(space, rows[i], q, qn);
    }
    return out;
}

std::vector<double> eaa_batch_serial(const EmbeddingSpace& space,
                                     std::span<const std::size_t> targets,
                                     std::span<const std::size_t> a_rows,
                                     std::span<const std::size_t> b_rows) {
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        out[i] = eaa_one(space, targets[i], a_rows, b_rows);
    }
    return out;
}

std::vector<double> eaa_batch(const EmbeddingSpace& space, std::span<const std::size_t> targets,
                              std::span<const std::size_t> a_rows,
                              std::span<const std::size_t> b_rows) {
    std::vector<double> out(targets.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(targets.size()); ++i) {
        out[i] = eaa_one(space, targets[i], a_rows, b_rows);
    }
    return out;
}

std::vector<double> cosine_colsums_serial(const EmbeddingSpace& space,
                                          std::span<const std::size_t> targets,
                                          std::span<const std::size_t> members) {
    std::vector<double> out(members.size());
    for (std::size_t j = 0; j < members.size(); ++j) {
        out[j] = colsum_one(space, members[j], targets);
    }
    return out;
}

std::vector<double> cosine_colsums(const EmbeddingSpace& space,
                                   std::span<const std::size_t> targets,
                                   std::span<const std::size_t> members) {
    std::vector<double> out(members.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(members.size()); ++j) {
        out[j] = colsum_one(space, members[j], targets);
    }
    return out;
}

std::vector<double> cosine_cross_serial(const EmbeddingSpace& space,
                                        std::span<const std::size_t> rows,
                                        const std::vector<std::vector<double>>& dirs) {
    const std::size_t m = dirs.size();
    std::vector<double> out(rows.size() * m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out[i * m + j] = dot_n(space.row(rows[i]).data(), dirs[j].data(), space.dim()) /
                             space.norm(rows[i]);
        }
    }
    return out;
}

std::vector<double> cosine_cross(const EmbeddingSpace& space, std::span<const std::size_t> rows,
                                 const std::vector<std::vector<double>>& dirs) {
    const std::size_t m = dirs.size();
    std::vector<double> out(rows.size() * m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out[i * m + j] = dot_n(space.row(rows[i]).data(), dirs[j].data(), space.dim()) /
                             space.norm(rows[i]);
        }
    }
    return out;
}

}  // namespace aab::kernels
