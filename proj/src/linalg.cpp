#include "aab/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "aab/error.hpp"
#include "aab/rng.hpp"

namespace aab {

namespace {

// Two Gram-Schmidt passes: a single pass leaves a residual parallel to the
// removed components whenever the true orthogonal part is below the rounding
// error, which would let deflated power iteration snap back to an earlier
// eigenvector.
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
            double proj = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * b[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
        }
        if (basis.empty()) break;
    }
}

double normalize_in_place(std::vector<double>& v) {
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double n = std::sqrt(n2);
    if (n > 0.0) {
        for (auto& x : v) x /= n;
    }
    return n;
}

}  // namespace

PowerIterationResult power_iteration(
    const std::function<void(std::span<const double>, std::span<double>)>& matvec,
    std::size_t dim, std::uint64_t seed, const std::vector<std::vector<double>>& orthogonal_to,
    double tol, int max_iterations) {
    Rng rng(seed);
    PowerIterationResult res;
    std::vector<double> v = rng.unit_vector(dim);
    orthogonalize(v, orthogonal_to);
    if (normalize_in_place(v) == 0.0) {
        // start vector fell entirely inside the deflated subspace; retry once
        v = rng.unit_vector(dim);
        orthogonalize(v, orthogonal_to);
        if (normalize_in_place(v) == 0.0) {
            throw DegenerateInputError("power_iteration: no direction outside deflated subspace");
        }
    }

    std::vector<double> next(dim);
    for (int it = 0; it < max_iterations; ++it) {
        matvec(v, next);
        double pre_norm2 = 0.0;
        for (double x : next) pre_norm2 += x * x;
        orthogonalize(next, orthogonal_to);
        const double n = normalize_in_place(next);
        res.iterations = it + 1;
        if (n == 0.0 || n * n <= 1e-20 * pre_norm2 || pre_norm2 == 0.0) {
            // the operator maps the remaining subspace (numerically) to the
            // deflated span: zero-variance direction
            res.vector = v;
            res.eigenvalue = 0.0;
            res.converged = true;
            return res;
        }
        double align = 0.0;
        for (std::size_t i = 0; i < dim; ++i) align += next[i] * v[i];
        v.swap(next);
        if (std::abs(align) >= 1.0 - tol) {
            res.converged = true;
            break;
        }
    }
    // Rayleigh quotient on the final iterate.
    matvec(v, next);
    double lambda = 0.0;
    for (std::size_t i = 0; i < dim; ++i) lambda += v[i] * next[i];
    res.vector = std::move(v);
    res.eigenvalue = lambda;
    return res;
}

std::vector<double> solve_spd(std::vector<double> m, std::vector<double> b, std::size_t k) {
    // Cholesky: m = L L^T, stored in the lower triangle of m.
    for (std::size_t j = 0; j < k; ++j) {
        double d = m[j * k + j];
        for (std::size_t p = 0; p < j; ++p) d -= m[j * k + p] * m[j * k + p];
        if (d <= 0.0) {
            throw DegenerateInputError("solve_spd: matrix not positive definite");
        }
        const double lj = std::sqrt(d);
        m[j * k + j] = lj;
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = m[i * k + j];
            for (std::size_t p = 0; p < j; ++p) s -= m[i * k + p] * m[j * k + p];
            m[i * k + j] = s / lj;
        }
    }
    // forward solve L y = b
    for (std::size_t i = 0; i < k; ++i) {
        double s = b[i];
        for (std::size_t p = 0; p < i; ++p) s -= m[i * k + p] * b[p];
        b[i] = s / m[i * k + i];
    }
    // back solve L^T x = y
    for (std::size_t ii = k; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t p = ii + 1; p < k; ++p) s -= m[p * k + ii] * b[p];
        b[ii] = s / m[ii * k + ii];
    }
    return b;
}

}  // namespace aab
