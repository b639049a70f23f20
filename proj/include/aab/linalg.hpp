#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace aab {

// Leading eigenvector of a symmetric PSD operator given as a matvec.
// Returns (eigenvector, eigenvalue). The start vector is seeded so results
// are reproducible; `orthogonal_to` deflates previously found components by
// re-orthogonalizing every iterate.
struct PowerIterationResult {
    std::vector<double> vector;
    double eigenvalue = 0.0;
    bool converged = false;
    int iterations = 0;
};

PowerIterationResult power_iteration(
    const std::function<void(std::span<const double>, std::span<double>)>& matvec,
    std::size_t dim, std::uint64_t seed,
    const std::vector<std::vector<double>>& orthogonal_to = {}, double tol = 1e-9,
    int max_iterations = 10000);

// Solves the k x k symmetric positive-definite system M x = b in place
// (Cholesky). Used by the toy recommender's alternating ridge updates.
std::vector<double> solve_spd(std::vector<double> m, std::vector<double> b, std::size_t k);

}  // namespace aab
