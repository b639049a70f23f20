// Benchmark comparing the serial reference kernels against their OpenMP
// counterparts on a planted space, and timing the permutation engine.
// Usage: aab-bench [n_entities] [dim] [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aab/kernels.hpp"
#include "aab/rng.hpp"
#include "aab/significance.hpp"
#include "aab/synthetic.hpp"

using namespace aab;

namespace {

double time_ms(const std::function<void()>& f, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    const std::size_t dim = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 128;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    PlantedConfig pc;
    pc.dim = dim;
    pc.n_a = n / 4;
    pc.n_b = n / 4;
    pc.n_e = n / 4;
    pc.n_p = n - 3 * (n / 4);
    pc.seed = 42;
    const auto planted = generate_planted_space(pc);
    const auto& space = planted.space;

    const auto a_rows = resolve(planted.group_a, space);
    const auto b_rows = resolve(planted.group_b, space);
    std::vector<std::size_t> targets = resolve(planted.group_e, space);
    {
        const auto p_rows = resolve(planted.group_p, space);
        targets.insert(targets.end(), p_rows.begin(), p_rows.end());
    }

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::printf("space: %zu entities x %zu dims; |A|=|B|=%zu, |targets|=%zu\n\n", space.size(),
                dim, a_rows.size(), targets.size());
    std::printf("%-24s %12s %12s %9s %12s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "max |diff|");

    auto row = [&](const char* name, const std::function<std::vector<double>()>& serial,
                   const std::function<std::vector<double>()>& parallel) {
        std::vector<double> rs, rp;
        const double ts = time_ms([&] { rs = serial(); }, repeats);
        const double tp = time_ms([&] { rp = parallel(); }, repeats);
        std::printf("%-24s %12.2f %12.2f %8.2fx %12g\n", name, ts, tp, ts / tp,
                    max_abs_diff(rs, rp));
    };

    row(
        "cosines_with", [&] { return kernels::cosines_with_serial(space, targets, planted.true_direction); },
        [&] { return kernels::cosines_with(space, targets, planted.true_direction); });
    row(
        "eaa_batch", [&] { return kernels::eaa_batch_serial(space, targets, a_rows, b_rows); },
        [&] { return kernels::eaa_batch(space, targets, a_rows, b_rows); });
    row(
        "cosine_colsums",
        [&] { return kernels::cosine_colsums_serial(space, targets, a_rows); },
        [&] { return kernels::cosine_colsums(space, targets, a_rows); });
    {
        std::vector<std::vector<double>> dirs(64);
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            dirs[j] = Rng::substream(7, j).unit_vector(dim);
        }
        row(
            "cosine_cross(64 dirs)",
            [&] { return kernels::cosine_cross_serial(space, a_rows, dirs); },
            [&] { return kernels::cosine_cross(space, a_rows, dirs); });
    }

    const double t_perm = time_ms(
        [&] {
            (void)permutation_test_deaa(planted.group_e, planted.group_p, planted.group_a,
                                        planted.group_b, space, 10000, 7);
        },
        repeats);
    std::printf("\npermutation_test_deaa (10000 resamples): %.2f ms\n", t_perm);
    return 0;
}
