#include "aab/directions.hpp"

#include <algorithm>
#include <cmath>

#include "aab/linalg.hpp"
#include "aab/rng.hpp"

namespace aab {

const char* direction_method_name(DirectionMethod m) {
    switch (m) {
        case DirectionMethod::CentroidDifference: return "centroid_difference";
        case DirectionMethod::LinearProbe: return "linear_probe";
        case DirectionMethod::PairedPca: return "paired_pca";
    }
    return "centroid_difference";
}

DirectionMethod direction_method_from_name(const std::string& s) {
    if (s == "centroid_difference") return DirectionMethod::CentroidDifference;
    if (s == "linear_probe") return DirectionMethod::LinearProbe;
    if (s == "paired_pca") return DirectionMethod::PairedPca;
    throw ValidationError("unknown direction method: " + s);
}

namespace {

// Flips `v` in place if needed so cos(v, reference) >= 0.
void apply_orientation(std::vector<double>& v, std::span<const double> reference) {
    if (reference.empty()) return;
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * reference[i];
    if (d < 0.0) {
        for (auto& x : v) x = -x;
    }
}

}  // namespace

BiasDirection centroid_difference_direction(const EntityGroup& a, const EntityGroup& b,
                                            const EmbeddingSpace& space) {
    require_disjoint(a, b);
    const auto ca = centroid(a, space);
    const auto cb = centroid(b, space);
    std::vector<double> diff(ca.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = ca[i] - cb[i];
    if (norm(diff) <= 1e-12) {
        throw DegenerateInputError("centroid_difference_direction: centroids of '" + a.name +
                                   "' and '" + b.name + "' coincide (no attribute separation)");
    }
    BiasDirection dir;
    dir.vector = normalized(diff);
    dir.method = DirectionMethod::CentroidDifference;
    dir.group_a = a.name;
    dir.group_b = b.name;
    dir.label = "centroid_difference";
    return dir;
}

LinearProbe train_linear_probe(const EntityGroup& a, const EntityGroup& b,
                               const EmbeddingSpace& space, double split_fraction,
                               std::uint64_t seed, ProbeHyperparameters hp) {
    a.validate();
    b.validate();
    require_disjoint(a, b);
    if (a.members.size() + b.members.size() < 10) {
        throw InsufficientDataError("train_linear_probe needs |A|+|B| >= 10, got " +
                                    std::to_string(a.members.size() + b.members.size()));
    }
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw ValidationError("split_fraction must lie in (0,1)");
    }
    hp.split_fraction = split_fraction;

    // Stratified split; the shuffles are per-group sub-streams of the seed.
    auto split_group = [&](const EntityGroup& g, std::uint64_t stream,
                           std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
        std::vector<std::size_t> rows = resolve(g, space);
        Rng rng = Rng::substream(seed, stream);
        rng.shuffle(rows);
        std::size_t n_train = static_cast<std::size_t>(
            std::floor(split_fraction * static_cast<double>(rows.size())));
        n_train = std::min(n_train, rows.size() - 1);
        n_train = std::max<std::size_t>(n_train, 1);
        train.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    };
    std::vector<std::size_t> train_a, test_a, train_b, test_b;
    split_group(a, 1, train_a, test_a);
    split_group(b, 2, train_b, test_b);

    const std::size_t d = space.dim();
    std::vector<std::size_t> train_rows;
    std::vector<double> labels;
    for (std::size_t r : train_a) {
        train_rows.push_back(r);
        labels.push_back(1.0);
    }
    for (std::size_t r : train_b) {
        train_rows.push_back(r);
        labels.push_back(-1.0);
    }
    const double n_inv = 1.0 / static_cast<double>(train_rows.size());
    const double lambda = hp.regularization;

    // Full-batch Pegasos-style subgradient descent on
    //   lambda/2 ||w||^2 + mean hinge(y (w.x + b)), step 1/(lambda t).
    std::vector<double> w(d, 0.0);
    double intercept = 0.0;
    std::vector<double> grad(d);
    double prev_obj = 0.0;
    double last_rel_change = 1.0;
    for (int t = 1; t <= hp.epochs; ++t) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        double hinge_sum = 0.0;
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            const auto x = space.row(train_rows[i]);
            const double margin = labels[i] * (dot(w, x) + intercept);
            if (margin < 1.0) {
                hinge_sum += 1.0 - margin;
                for (std::size_t j = 0; j < d; ++j) grad[j] += labels[i] * x[j];
                grad_b += labels[i];
            }
        }
        double w_norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            w[j] = (1.0 - eta * lambda) * w[j] + eta * n_inv * grad[j];
            w_norm2 += w[j] * w[j];
        }
        intercept += eta * n_inv * grad_b;
        // Pegasos projection onto the ball of radius 1/sqrt(lambda).
        const double radius = 1.0 / std::sqrt(lambda);
        if (w_norm2 > radius * radius) {
            const double scale = radius / std::sqrt(w_norm2);
            for (auto& x : w) x *= scale;
            w_norm2 = radius * radius;
        }
        const double obj = 0.5 * lambda * w_norm2 + n_inv * hinge_sum;
        if (t > 1) {
            last_rel_change = std::abs(obj - prev_obj) / std::max(1.0, std::abs(obj));
        }
        prev_obj = obj;
    }

    LinearProbe probe;
    probe.weights = std::move(w);
    probe.intercept = intercept;
    probe.hp = hp;
    probe.seed = seed;
    probe.group_a = a.name;
    probe.group_b = b.name;
    if (last_rel_change > 1e-6) {
        probe.converged = false;
        probe.warning = "objective still changing after " + std::to_string(hp.epochs) + " epochs";
    }

    auto accuracy = [&](const std::vector<std::size_t>& rows_a,
                        const std::vector<std::size_t>& rows_b) {
        std::size_t correct = 0;
        for (std::size_t r : rows_a) {
            if (dot(probe.weights, space.row(r)) + probe.intercept > 0.0) ++correct;
        }
        for (std::size_t r : rows_b) {
            if (!(dot(probe.weights, space.row(r)) + probe.intercept > 0.0)) ++correct;
        }
        return static_cast<double>(correct) /
               static_cast<double>(rows_a.size() + rows_b.size());
    };
    probe.train_accuracy = accuracy(train_a, train_b);
    probe.test_accuracy = accuracy(test_a, test_b);

    for (std::size_t r : train_a) probe.training_ids.push_back(space.ids()[r]);
    for (std::size_t r : train_b) probe.training_ids.push_back(space.ids()[r]);

    const auto ca = centroid(a, space);
    const auto cb = centroid(b, space);
    probe.orient_hint.resize(d);
    for (std::size_t j = 0; j < d; ++j) probe.orient_hint[j] = ca[j] - cb[j];
    return probe;
}

BiasDirection probe_direction(const LinearProbe& probe) {
    if (norm(probe.weights) == 0.0) {
        throw DegenerateInputError("probe_direction: zero weight vector");
    }
    BiasDirection dir;
    // The intercept is dropped: only the weight direction defines the
    // attribute subspace. Reports note this.
    dir.vector = normalized(probe.weights);
    apply_orientation(dir.vector, probe.orient_hint);
    dir.method = DirectionMethod::LinearProbe;
    dir.group_a = probe.group_a;
    dir.group_b = probe.group_b;
    dir.seed = probe.seed;
    dir.label = "linear_probe";
    return dir;
}

EntityGroup most_biased_entities(const EntityGroup& group, const BiasDirection& direction,
                                 const EmbeddingSpace& space, std::size_t k) {
    group.validate();
    if (k == 0 || k > group.members.size()) {
        throw ValidationError("most_biased_entities: k=" + std::to_string(k) +
                              " outside [1, " + std::to_string(group.members.size()) + "]");
    }
    std::vector<std::pair<double, EntityId>> scored;
    scored.reserve(group.members.size());
    for (const auto& id : group.members) {
        scored.emplace_back(cosine(space.row(id), direction.vector), id);
    }
    const bool ascending = group.role == Role::B;  // opposed group: most negative first
    std::sort(scored.begin(), scored.end(), [&](const auto& l, const auto& r) {
        if (l.first != r.first) return ascending ? l.first < r.first : l.first > r.first;
        return l.second < r.second;
    });
    EntityGroup out;
    out.name = group.name + "_top" + std::to_string(k);
    out.role = group.role;
    out.members.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.members.push_back(scored[i].second);
    return out;
}

BiasDirection paired_pca_direction(const std::vector<std::pair<EntityId, EntityId>>& pairs,
                                   const EmbeddingSpace& space, std::uint64_t seed) {
    if (pairs.size() < 2) {
        throw InsufficientDataError("paired_pca_direction needs >= 2 pairs");
    }
    const std::size_t d = space.dim();
    const std::size_t n = pairs.size();
    std::vector<double> diffs(n * d);
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto va = space.row(pairs[i].first);
        const auto vb = space.row(pairs[i].second);
        for (std::size_t j = 0; j < d; ++j) {
            const double v = va[j] - vb[j];
            diffs[i * d + j] = v;
            mean[j] += v;
        }
    }
    for (auto& x : mean) x /= static_cast<double>(n);
    double total_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            diffs[i * d + j] -= mean[j];
            total_var += diffs[i * d + j] * diffs[i * d + j];
        }
    }
    total_var /= static_cast<double>(n);
    const double mean_norm2 = dot(mean, mean);

    BiasDirection dir;
    dir.method = DirectionMethod::PairedPca;
    dir.seed = seed;
    dir.label = "paired_pca";
    if (total_var <= 1e-24 * (mean_norm2 + total_var) || total_var == 0.0) {
        // all differences identical: the shared difference is the direction
        if (mean_norm2 == 0.0) {
            throw DegenerateInputError("paired_pca_direction: all pair differences are zero");
        }
        dir.vector = normalized(mean);
        return dir;
    }

    auto matvec = [&](std::span<const double> v, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = diffs.data() + i * d;
            double proj = 0.0;
            for (std::size_t j = 0; j < d; ++j) proj += row[j] * v[j];
            for (std::size_t j = 0; j < d; ++j) out[j] += proj * row[j];
        }
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : out) x *= inv;
    };
    auto pc = power_iteration(matvec, d, seed);
    dir.vector = normalized(pc.vector);
    // centroid(a-side) - centroid(b-side) equals the mean difference
    apply_orientation(dir.vector, mean);
    return dir;
}

std::vector<std::pair<EntityId, EntityId>> random_cross_pairs(const EntityGroup& a,
                                                              const EntityGroup& b,
                                                              std::size_t n_pairs,
                                                              std::uint64_t seed) {
    a.validate();
    b.validate();
    const std::size_t max_pairs = std::min(a.members.size(), b.members.size());
    if (n_pairs == 0 || n_pairs > max_pairs) {
        throw ValidationError("random_cross_pairs: n_pairs=" + std::to_string(n_pairs) +
                              " outside [1, " + std::to_string(max_pairs) + "]");
    }
    std::vector<EntityId> as = a.members;
    std::vector<EntityId> bs = b.members;
    Rng::substream(seed, 1).shuffle(as);
    Rng::substream(seed, 2).shuffle(bs);
    std::vector<std::pair<EntityId, EntityId>> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) pairs.emplace_back(as[i], bs[i]);
    return pairs;
}

}  // namespace aab
