#include <doctest.h>

#include "aab/kernels.hpp"
#include "aab/rng.hpp"
#include "aab/synthetic.hpp"

using namespace aab;

namespace {

PlantedSpace small_planted() {
    PlantedConfig pc;
    pc.dim = 24;
    pc.n_a = 40;
    pc.n_b = 35;
    pc.n_e = 30;
    pc.n_p = 25;
    pc.seed = 99;
    return generate_planted_space(pc);
}

}  // namespace

// The OpenMP kernels compute each slot with the same arithmetic as the
// serial reference and reduce nothing across threads, so outputs must be
// bit-identical, not merely close.
TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    const auto planted = small_planted();
    const auto& space = planted.space;
    const auto a_rows = resolve(planted.group_a, space);
    const auto b_rows = resolve(planted.group_b, space);
    auto targets = resolve(planted.group_e, space);
    {
        const auto p_rows = resolve(planted.group_p, space);
        targets.insert(targets.end(), p_rows.begin(), p_rows.end());
    }

    CHECK(kernels::cosines_with(space, targets, planted.true_direction) ==
          kernels::cosines_with_serial(space, targets, planted.true_direction));
    CHECK(kernels::eaa_batch(space, targets, a_rows, b_rows) ==
          kernels::eaa_batch_serial(space, targets, a_rows, b_rows));
    CHECK(kernels::cosine_colsums(space, targets, a_rows) ==
          kernels::cosine_colsums_serial(space, targets, a_rows));
    std::vector<std::vector<double>> dirs;
    for (std::uint64_t j = 0; j < 7; ++j) dirs.push_back(Rng::substream(3, j).unit_vector(24));
    CHECK(kernels::cosine_cross(space, targets, dirs) ==
          kernels::cosine_cross_serial(space, targets, dirs));
}

TEST_CASE("cosines_with agrees with the scalar cosine") {
    const auto planted = small_planted();
    const auto& space = planted.space;
    const auto rows = resolve(planted.group_e, space);
    const auto got = kernels::cosines_with(space, rows, planted.true_direction);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(std::abs(got[i] - cosine(space.row(rows[i]), planted.true_direction)) < 1e-14);
    }
}

TEST_CASE("eaa_batch matches the direct formula") {
    const auto planted = small_planted();
    const auto& space = planted.space;
    const auto a_rows = resolve(planted.group_a, space);
    const auto b_rows = resolve(planted.group_b, space);
    const auto targets = resolve(planted.group_e, space);
    const auto got = kernels::eaa_batch(space, targets, a_rows, b_rows);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double sa = 0.0;
        for (auto r : a_rows) sa += cosine(space.row(targets[i]), space.row(r));
        double sb = 0.0;
        for (auto r : b_rows) sb += cosine(space.row(targets[i]), space.row(r));
        const double want = sa / static_cast<double>(a_rows.size()) -
                            sb / static_cast<double>(b_rows.size());
        CHECK(std::abs(got[i] - want) < 1e-12);
    }
}

TEST_CASE("colsums match per-member sums") {
    const auto planted = small_planted();
    const auto& space = planted.space;
    const auto members = resolve(planted.group_a, space);
    const auto targets = resolve(planted.group_p, space);
    const auto got = kernels::cosine_colsums(space, targets, members);
    for (std::size_t j = 0; j < members.size(); ++j) {
        double s = 0.0;
        for (auto t : targets) s += cosine(space.row(t), space.row(members[j]));
        CHECK(std::abs(got[j] - s) < 1e-10);
    }
}
