#include <doctest.h>

#include <cmath>

#include "aab/directions.hpp"
#include "aab/rng.hpp"
#include "aab/synthetic.hpp"
#include "helpers.hpp"

using namespace aab;
using aab::testing::make_group;
using aab::testing::make_space;

TEST_CASE("centroid difference direction on hand-computed inputs") {
    auto space = make_space(2, {{"a1", {1, 0}},
                                {"a2", {3, 0}},
                                {"b1", {0, 2}},
                                {"c1", {1, 0}},
                                {"c2", {-1, 0}}});
    const auto d = centroid_difference_direction(make_group("A", {"a1", "a2"}, Role::A),
                                                 make_group("B", {"b1"}, Role::B), space);
    CHECK(d.vector[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(d.vector[1] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    const auto d2 = centroid_difference_direction(make_group("A", {"c1"}, Role::A),
                                                  make_group("B", {"c2"}, Role::B), space);
    CHECK(d2.vector == std::vector<double>{1, 0});
}

TEST_CASE("coinciding centroids are a degenerate direction") {
    auto space = make_space(2, {{"a1", {1, 1}}, {"b1", {1, 1}}});
    CHECK_THROWS_AS((void)centroid_difference_direction(make_group("A", {"a1"}, Role::A),
                                                        make_group("B", {"b1"}, Role::B),
                                                        space),
                    DegenerateInputError);
}

namespace {

// two separable clusters on the x axis, 6 points each
aab::testing::RandomInstance separable_instance(std::uint64_t seed) {
    aab::testing::RandomInstance inst;
    inst.space = EmbeddingSpace("sep", 4);
    Rng rng(seed);
    inst.a = {"A", Role::A, {}};
    inst.b = {"B", Role::B, {}};
    std::vector<double> v(4);
    for (int i = 0; i < 6; ++i) {
        for (auto& x : v) x = 0.05 * rng.normal();
        v[0] += 1.0;
        const EntityId id = "a" + std::to_string(i);
        inst.space.add_row(id, v);
        inst.a.members.push_back(id);
    }
    for (int i = 0; i < 6; ++i) {
        for (auto& x : v) x = 0.05 * rng.normal();
        v[0] -= 1.0;
        const EntityId id = "b" + std::to_string(i);
        inst.space.add_row(id, v);
        inst.b.members.push_back(id);
    }
    return inst;
}

}  // namespace

TEST_CASE("probe training separates separable clusters") {
    auto inst = separable_instance(4);
    const auto probe = train_linear_probe(inst.a, inst.b, inst.space, 0.8, 1);
    CHECK(probe.train_accuracy == 1.0);
    CHECK(probe.test_accuracy == 1.0);
    const auto d = probe_direction(probe);
    CHECK(std::abs(norm(d.vector) - 1.0) < 1e-10);
    CHECK(d.vector[0] > 0.9);  // oriented toward A on +x
}

TEST_CASE("probe training is deterministic bit for bit") {
    auto inst = separable_instance(9);
    const auto p1 = train_linear_probe(inst.a, inst.b, inst.space, 0.8, 7);
    const auto p2 = train_linear_probe(inst.a, inst.b, inst.space, 0.8, 7);
    CHECK(p1.weights == p2.weights);
    CHECK(p1.intercept == p2.intercept);
    CHECK(p1.training_ids == p2.training_ids);
}

TEST_CASE("probe preconditions") {
    auto space = make_space(2, {{"a1", {1, 0}}, {"a2", {1, 0.1}},
                                {"b1", {-1, 0}}, {"b2", {-1, 0.1}}});
    const auto a = make_group("A", {"a1", "a2"}, Role::A);
    const auto b = make_group("B", {"b1", "b2"}, Role::B);
    CHECK_THROWS_AS((void)train_linear_probe(a, b, space, 0.8, 1), InsufficientDataError);
}

TEST_CASE("probe on label-free noise stays near chance over many seeds") {
    int within = 0;
    const int trials = 50;
    double acc_sum = 0.0;
    for (int seed = 0; seed < trials; ++seed) {
        auto inst = aab::testing::random_instance(1000 + seed, 8, 30, 30, 5, 5);
        const auto probe = train_linear_probe(inst.a, inst.b, inst.space, 0.8, seed);
        acc_sum += probe.test_accuracy;
        if (probe.test_accuracy >= 0.0 && probe.test_accuracy <= 1.0) ++within;
    }
    CHECK(within == trials);
    CHECK(acc_sum / trials == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("probe direction orientation and degeneracy") {
    LinearProbe probe;
    probe.weights = {0, -3};
    probe.orient_hint = {0, -1};
    auto d = probe_direction(probe);
    CHECK(d.vector == std::vector<double>{0, -1});
    probe.weights = {1, 1};
    probe.orient_hint = {1, 0};
    d = probe_direction(probe);
    CHECK(d.vector[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    probe.weights = {0, 0};
    CHECK_THROWS_AS((void)probe_direction(probe), DegenerateInputError);
}

TEST_CASE("most biased entities: ordering, whole group, ties") {
    auto space = make_space(2, {{"u1", {0.9, std::sqrt(1 - 0.81)}},
                                {"u2", {0.5, std::sqrt(0.75)}},
                                {"u3", {0.1, std::sqrt(0.99)}},
                                {"t1", {1, 0}},
                                {"t2", {1, 0}}});
    BiasDirection d;
    d.vector = {1, 0};
    const auto g = make_group("G", {"u3", "u1", "u2"}, Role::A);
    const auto top2 = most_biased_entities(g, d, space, 2);
    CHECK(top2.members == std::vector<EntityId>{"u1", "u2"});
    const auto all = most_biased_entities(g, d, space, 3);
    CHECK(all.members == std::vector<EntityId>{"u1", "u2", "u3"});
    // identical cosine: lexicographically smaller id first
    const auto tied = most_biased_entities(make_group("T", {"t2", "t1"}, Role::A), d, space, 2);
    CHECK(tied.members == std::vector<EntityId>{"t1", "t2"});
    // opposed group: most negative first
    const auto opp = most_biased_entities(make_group("G", {"u1", "u3"}, Role::B), d, space, 1);
    CHECK(opp.members == std::vector<EntityId>{"u3"});
    CHECK_THROWS_AS((void)most_biased_entities(g, d, space, 4), ValidationError);
}

TEST_CASE("paired pca: identical differences return the shared direction") {
    auto space = make_space(2, {{"a1", {1, 5}},
                                {"a2", {2, 6}},
                                {"a3", {7, 3}},
                                {"b1", {1, 1}},
                                {"b2", {2, 2}},
                                {"b3", {7, -1}}});
    const auto d = paired_pca_direction({{"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}}, space, 3);
    CHECK(d.vector[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.vector[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("paired pca: collinear differences resolve by orientation") {
    auto space = make_space(2, {{"a1", {2, 1}},
                                {"a2", {0, 1}},
                                {"a3", {3, 1}},
                                {"b1", {1, 1}}});
    // differences (1,0), (-1,0), (2,0): mean (2/3, 0) orients toward +x
    const auto d =
        paired_pca_direction({{"a1", "b1"}, {"a2", "b1"}, {"a3", "b1"}}, space, 5);
    CHECK(d.vector[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(d.vector[1]) < 1e-9);
}

TEST_CASE("paired pca needs two pairs and nonzero differences") {
    auto space = make_space(2, {{"a1", {1, 1}}, {"b1", {1, 1}}, {"b2", {1, 1}}});
    CHECK_THROWS_AS((void)paired_pca_direction({{"a1", "b1"}}, space, 1),
                    InsufficientDataError);
    CHECK_THROWS_AS((void)paired_pca_direction({{"a1", "b1"}, {"a1", "b2"}}, space, 1),
                    DegenerateInputError);
}

TEST_CASE("every method recovers the planted direction exactly when noise is zero") {
    PlantedConfig pc;
    pc.dim = 12;
    pc.n_a = pc.n_b = pc.n_e = pc.n_p = 10;
    pc.noise_sigma = 0.0;
    pc.bias_strength = 1.0;
    pc.seed = 31;
    const auto planted = generate_planted_space(pc);
    const auto cd =
        centroid_difference_direction(planted.group_a, planted.group_b, planted.space);
    CHECK(std::abs(cosine(cd.vector, planted.true_direction)) >= 0.999);
    const auto probe =
        train_linear_probe(planted.group_a, planted.group_b, planted.space, 0.8, 2);
    CHECK(std::abs(cosine(probe_direction(probe).vector, planted.true_direction)) >= 0.999);
    const auto pairs = random_cross_pairs(planted.group_a, planted.group_b, 10, 3);
    const auto pca = paired_pca_direction(pairs, planted.space, 4);
    CHECK(std::abs(cosine(pca.vector, planted.true_direction)) >= 0.999);
}

TEST_CASE("orientation convention holds on random data") {
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        auto inst = aab::testing::random_instance(seed, 6, 12, 12, 5, 5);
        const auto ca = centroid(inst.a, inst.space);
        const auto cb = centroid(inst.b, inst.space);
        std::vector<double> ref(ca.size());
        for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = ca[i] - cb[i];

        const auto cd = centroid_difference_direction(inst.a, inst.b, inst.space);
        CHECK(std::abs(norm(cd.vector) - 1.0) < 1e-10);
        CHECK(cosine(cd.vector, ref) >= 0.0);
        const auto probe = train_linear_probe(inst.a, inst.b, inst.space, 0.8, seed);
        const auto pd = probe_direction(probe);
        CHECK(std::abs(norm(pd.vector) - 1.0) < 1e-10);
        CHECK(cosine(pd.vector, ref) >= 0.0);
        const auto pairs = random_cross_pairs(inst.a, inst.b, 12, seed);
        const auto pca = paired_pca_direction(pairs, inst.space, seed);
        CHECK(std::abs(norm(pca.vector) - 1.0) < 1e-10);
        CHECK(cosine(pca.vector, ref) >= -1e-12);
    }
}

TEST_CASE("centroid difference is order and scale invariant") {
    auto inst = aab::testing::random_instance(77, 5, 8, 8, 5, 5);
    const auto d1 = centroid_difference_direction(inst.a, inst.b, inst.space);
    auto shuffled_a = inst.a;
    Rng(3).shuffle(shuffled_a.members);
    const auto d2 = centroid_difference_direction(shuffled_a, inst.b, inst.space);
    for (std::size_t i = 0; i < d1.vector.size(); ++i) {
        CHECK(d1.vector[i] == doctest::Approx(d2.vector[i]).epsilon(1e-12));
    }
    EmbeddingSpace scaled("scaled", inst.space.dim());
    std::vector<double> v;
    for (std::size_t i = 0; i < inst.space.size(); ++i) {
        v.assign(inst.space.row(i).begin(), inst.space.row(i).end());
        for (auto& x : v) x *= 4.25;
        scaled.add_row(inst.space.ids()[i], v);
    }
    const auto d3 = centroid_difference_direction(inst.a, inst.b, scaled);
    for (std::size_t i = 0; i < d1.vector.size(); ++i) {
        CHECK(d1.vector[i] == doctest::Approx(d3.vector[i]).epsilon(1e-10));
    }
}
