#include <doctest.h>

#include <cmath>

#include "aab/metrics.hpp"
#include "aab/reference.hpp"
#include "aab/rng.hpp"
#include "helpers.hpp"

using namespace aab;
using aab::testing::make_group;
using aab::testing::make_space;
using aab::testing::random_instance;

namespace {

BiasDirection unit_x(std::size_t dim) {
    BiasDirection d;
    d.vector.assign(dim, 0.0);
    d.vector[0] = 1.0;
    return d;
}

}  // namespace

TEST_CASE("eaa hand-computed examples") {
    auto space = make_space(2, {{"eps", {1, 0}},
                                {"a1", {1, 0}},
                                {"a2", {0, 1}},
                                {"b1", {0, 1}},
                                {"b2", {-1, 0}},
                                {"orth", {0, 1}}});
    CHECK(eaa("eps", make_group("A", {"a1"}), make_group("B", {"b1"}), space).value ==
          doctest::Approx(1.0).epsilon(1e-15));
    // eps aligned with one of two A members, B at the opposite pole
    CHECK(eaa("eps", make_group("A", {"a1", "a2"}), make_group("B", {"b2"}), space).value ==
          doctest::Approx(1.5).epsilon(1e-12));
    // orthogonal to everything it is compared against
    auto space3 = make_space(3, {{"eps", {0, 0, 1}},
                                 {"a1", {1, 0, 0}},
                                 {"b1", {0, 1, 0}}});
    CHECK(eaa("eps", make_group("A", {"a1"}), make_group("B", {"b1"}), space3).value ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("eaa rejects contaminated entities") {
    auto space = make_space(2, {{"a1", {1, 0}}, {"b1", {0, 1}}});
    CHECK_THROWS_AS(
        (void)eaa("a1", make_group("A", {"a1"}), make_group("B", {"b1"}), space),
        ValidationError);
}

TEST_CASE("geaa is a sum, not a mean") {
    auto space = make_space(2, {{"e1", {1, 0}},
                                {"e2", {1, 0}},
                                {"a1", {1, 0}},
                                {"b1", {-1, 0}}});
    const auto a = make_group("A", {"a1"});
    const auto b = make_group("B", {"b1"});
    // each entity has EAA = 1 - (-1) = 2
    CHECK(geaa(make_group("E", {"e1", "e2"}), a, b, space) ==
          doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("deaa arithmetic and symmetry") {
    auto space = make_space(2, {{"e1", {1, 0}},
                                {"e2", {1, 0.1}},
                                {"p1", {1, 0}},
                                {"p2", {1, 0.1}},
                                {"a1", {1, 0.5}},
                                {"b1", {-0.3, 1}}});
    const auto a = make_group("A", {"a1"});
    const auto b = make_group("B", {"b1"});
    const auto e = make_group("E", {"e1", "e2"});
    const auto p = make_group("P", {"p1", "p2"});
    // composition-identical test sets: same vectors under different ids
    CHECK(deaa(e, p, a, b, space) == 0.0);
}

TEST_CASE("effect size matches the hand-computed two-point case") {
    auto space = make_space(2, {{"e1", {1, 0}},
                                {"e2", {1, 0}},
                                {"p1", {0, 1}},
                                {"p2", {0, 1}},
                                {"a1", {1, 0}},
                                {"b1", {0, 1}}});
    const auto a = make_group("A", {"a1"});
    const auto b = make_group("B", {"b1"});
    // EAA(E) = {1, 1}, EAA(P) = {-1, -1}; population sd of {1,1,-1,-1} is 1
    CHECK(eaa_effect_size(make_group("E", {"e1", "e2"}), make_group("P", {"p1", "p2"}), a, b,
                          space) == doctest::Approx(2.0).epsilon(1e-12));
    // identical distributions -> 0 needs spread; reuse mixed groups
    auto space2 = make_space(2, {{"e1", {1, 0}},
                                 {"e2", {0, 1}},
                                 {"p1", {1, 0}},
                                 {"p2", {0, 1}},
                                 {"a1", {1, 0}},
                                 {"b1", {0, 1}}});
    CHECK(eaa_effect_size(make_group("E", {"e1", "e2"}), make_group("P", {"p1", "p2"}), a, b,
                          space2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("effect size rejects zero spread") {
    auto space = make_space(2, {{"e1", {1, 0}},
                                {"p1", {1, 0}},
                                {"a1", {1, 0}},
                                {"b1", {0, 1}}});
    CHECK_THROWS_AS((void)eaa_effect_size(make_group("E", {"e1"}), make_group("P", {"p1"}),
                                          make_group("A", {"a1"}), make_group("B", {"b1"}),
                                          space),
                    DegenerateInputError);
}

TEST_CASE("rripa hand-computed examples") {
    auto space = make_space(2, {{"e1", {1, 0}}, {"e2", {-1, 0}}, {"p1", {0, 1}}});
    const auto psi = unit_x(2);
    CHECK(rripa(make_group("E", {"e1"}), psi, space) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rripa(make_group("E", {"e1", "e2"}), psi, space) ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rripa effect size matches hand computation") {
    auto space = make_space(2, {{"e1", {2, 0}},
                                {"e2", {3, 0}},
                                {"p1", {-1, 0}},
                                {"p2", {-5, 0}}});
    // cosines with x are {1,1} and {-1,-1}
    CHECK(rripa_effect_size(make_group("E", {"e1", "e2"}), make_group("P", {"p1", "p2"}),
                            unit_x(2), space) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rripa validates unit norm") {
    auto space = make_space(2, {{"e1", {1, 0}}, {"e2", {0, 1}}});
    BiasDirection bad;
    bad.vector = {2.0, 0.0};
    CHECK_THROWS_AS((void)rripa(make_group("E", {"e1"}), bad, space), ValidationError);
}

TEST_CASE("antisymmetry, linearity and bounds over random instances") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto inst = random_instance(seed, 4 + seed % 5, 4, 5, 4, 6);
        for (const auto& id : inst.e.members) {
            const double ab = eaa(id, inst.a, inst.b, inst.space).value;
            const double ba = eaa(id, inst.b, inst.a, inst.space).value;
            CHECK(ab == -ba);  // exact sign flip
            CHECK(std::abs(ab) <= 2.0);
        }
        const double ge = geaa(inst.e, inst.a, inst.b, inst.space);
        const double gp = geaa(inst.p, inst.a, inst.b, inst.space);
        CHECK(deaa(inst.e, inst.p, inst.a, inst.b, inst.space) == ge - gp);
        CHECK(deaa(inst.e, inst.p, inst.a, inst.b, inst.space) ==
              -deaa(inst.p, inst.e, inst.a, inst.b, inst.space));
        BiasDirection psi;
        psi.vector = Rng(seed).unit_vector(inst.space.dim());
        CHECK(std::abs(rripa(inst.e, psi, inst.space)) <= 1.0 + 1e-15);
    }
}

TEST_CASE("scale invariance of all six metrics") {
    auto inst = random_instance(7, 6, 5, 5, 6, 5);
    EmbeddingSpace scaled("scaled", inst.space.dim());
    const double factor = 37.5;
    std::vector<double> v;
    for (std::size_t i = 0; i < inst.space.size(); ++i) {
        v.assign(inst.space.row(i).begin(), inst.space.row(i).end());
        for (auto& x : v) x *= factor;
        scaled.add_row(inst.space.ids()[i], v);
    }
    BiasDirection psi;
    psi.vector = Rng(9).unit_vector(inst.space.dim());
    const auto m1 = compute_metric_bundle(inst.e, inst.p, inst.a, inst.b, inst.space, &psi);
    const auto m2 = compute_metric_bundle(inst.e, inst.p, inst.a, inst.b, scaled, &psi);
    CHECK(std::abs(m1.geaa_e - m2.geaa_e) < 1e-10);
    CHECK(std::abs(m1.geaa_p - m2.geaa_p) < 1e-10);
    CHECK(std::abs(m1.deaa - m2.deaa) < 1e-10);
    CHECK(std::abs(m1.effect_size - m2.effect_size) < 1e-10);
    CHECK(std::abs(m1.rripa_e - m2.rripa_e) < 1e-10);
    CHECK(std::abs(m1.rripa_effect - m2.rripa_effect) < 1e-10);
}

TEST_CASE("optimized metrics agree with the naive oracle") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        auto inst = random_instance(seed, 4 + seed % 4, 3 + seed % 7, 4, 5, 3 + seed % 6);
        BiasDirection psi;
        psi.vector = Rng(seed + 1).unit_vector(inst.space.dim());
        const auto bundle =
            compute_metric_bundle(inst.e, inst.p, inst.a, inst.b, inst.space, &psi);
        CHECK(std::abs(bundle.geaa_e - oracle::geaa(inst.e, inst.a, inst.b, inst.space)) <
              1e-10);
        CHECK(std::abs(bundle.deaa -
                       oracle::deaa(inst.e, inst.p, inst.a, inst.b, inst.space)) < 1e-10);
        CHECK(std::abs(bundle.effect_size -
                       oracle::eaa_effect_size(inst.e, inst.p, inst.a, inst.b, inst.space)) <
              1e-10);
        CHECK(std::abs(bundle.rripa_e - oracle::rripa(inst.e, psi, inst.space)) < 1e-10);
        CHECK(std::abs(bundle.rripa_effect -
                       oracle::rripa_effect_size(inst.e, inst.p, psi, inst.space)) < 1e-10);
        for (const auto& s : bundle.eaa_e) {
            CHECK(std::abs(s.value - oracle::eaa(s.entity, inst.a, inst.b, inst.space)) <
                  1e-10);
        }
    }
}

TEST_CASE("bundle rejects contaminated test groups") {
    auto inst = random_instance(5, 4, 5, 5, 5, 5);
    auto contaminated = inst.e;
    contaminated.members.push_back(inst.a.members.front());
    CHECK_THROWS_AS((void)compute_metric_bundle(contaminated, inst.p, inst.a, inst.b,
                                                inst.space),
                    ValidationError);
}
