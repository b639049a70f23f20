#include "aab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "aab/stats.hpp"

namespace aab {

std::vector<Prediction> predict_labels(const LinearProbe& probe, const EntityGroup& targets,
                                       const EmbeddingSpace& space) {
    targets.validate();
    if (probe.weights.size() != space.dim()) {
        throw ValidationError("predict_labels: probe dimension " +
                              std::to_string(probe.weights.size()) +
                              " does not match space dimension " + std::to_string(space.dim()));
    }
    std::vector<Prediction> out;
    out.reserve(targets.members.size());
    for (const auto& id : targets.members) {
        const double score = dot(probe.weights, space.row(id)) + probe.intercept;
        out.push_back({id, score > 0.0 ? AttrLabel::A : AttrLabel::B});
    }
    return out;
}

std::vector<DecileRow> decile_breakdown(const std::vector<Prediction>& predictions,
                                        const std::vector<EngagementShare>& shares,
                                        const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw ValidationError("decile_breakdown: no thresholds");
    std::unordered_map<EntityId, double> share_of;
    for (const auto& s : shares) {
        if (s.share_positive < 0.0 || s.share_positive > 1.0) {
            throw ValidationError("engagement share for '" + s.entity + "' outside [0, 1]");
        }
        share_of[s.entity] = s.share_positive;
    }
    std::vector<double> sorted_thresholds = thresholds;
    std::sort(sorted_thresholds.begin(), sorted_thresholds.end());

    struct Cell {
        std::size_t count = 0;
        std::size_t predicted_a = 0;
    };
    std::vector<Cell> cells(2 * sorted_thresholds.size());
    for (const auto& pred : predictions) {
        auto it = share_of.find(pred.entity);
        if (it == share_of.end()) {
            throw LookupError("no engagement share for predicted entity '" + pred.entity + "'");
        }
        const double share_a = it->second;
        const AttrLabel majority = share_a >= 0.5 ? AttrLabel::A : AttrLabel::B;
        const double majority_share = std::max(share_a, 1.0 - share_a);
        // decile floor: the largest threshold not exceeding the majority share
        std::size_t bucket = 0;
        bool in_any = false;
        for (std::size_t t = 0; t < sorted_thresholds.size(); ++t) {
            if (majority_share >= sorted_thresholds[t]) {
                bucket = t;
                in_any = true;
            }
        }
        if (!in_any) continue;  // below the lowest threshold
        auto& cell = cells[(majority == AttrLabel::A ? 0 : sorted_thresholds.size()) + bucket];
        cell.count += 1;
        if (pred.label == AttrLabel::A) cell.predicted_a += 1;
    }

    std::vector<DecileRow> rows;
    for (int side = 0; side < 2; ++side) {
        for (std::size_t t = 0; t < sorted_thresholds.size(); ++t) {
            DecileRow row;
            row.majority = side == 0 ? AttrLabel::A : AttrLabel::B;
            row.decile = static_cast<int>(std::lround(sorted_thresholds[t] * 100.0));
            const auto& cell = cells[side * sorted_thresholds.size() + t];
            row.count = cell.count;
            if (cell.count > 0) {
                row.frac_a = static_cast<double>(cell.predicted_a) /
                             static_cast<double>(cell.count);
                row.frac_b = 1.0 - *row.frac_a;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

EmbeddingSpace history_centroid_features(
    const std::vector<std::pair<EntityId, std::vector<EntityId>>>& interactions, std::size_t k,
    const EmbeddingSpace& item_space, std::vector<EntityId>* excluded) {
    if (k == 0) throw ValidationError("history_centroid_features: k must be >= 1");
    EmbeddingSpace features("history_centroid_top" + std::to_string(k), item_space.dim(),
                            item_space.variant_tag());
    std::vector<double> acc(item_space.dim());
    for (const auto& [user, ranked_items] : interactions) {
        if (ranked_items.size() < k) {
            if (excluded) excluded->push_back(user);
            continue;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            const auto v = item_space.row(ranked_items[i]);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += v[j];
        }
        for (auto& x : acc) x /= static_cast<double>(k);
        features.add_row(user, acc);
    }
    return features;
}

ScenarioResult stereotype_scores(const std::vector<Prediction>& predictions,
                                 const std::vector<std::pair<EntityGroup, AttrLabel>>& truth) {
    if (truth.empty()) throw ValidationError("stereotype_scores: no stereotype groups");
    std::unordered_map<EntityId, std::size_t> group_of;
    for (std::size_t gi = 0; gi < truth.size(); ++gi) {
        truth[gi].first.validate();
        for (const auto& id : truth[gi].first.members) {
            if (!group_of.emplace(id, gi).second) {
                throw ValidationError("entity '" + id + "' belongs to multiple stereotype groups");
            }
        }
    }
    std::unordered_map<EntityId, AttrLabel> predicted;
    for (const auto& p : predictions) predicted.emplace(p.entity, p.label);
    for (const auto& [group, label] : truth) {
        for (const auto& id : group.members) {
            if (!predicted.count(id)) {
                throw LookupError("stereotype group '" + group.name +
                                  "' member '" + id + "' has no prediction");
            }
        }
    }

    ScenarioResult result;
    result.scenario = "stereotyped_genre";
    std::vector<std::vector<double>> correctness(truth.size());
    for (std::size_t gi = 0; gi < truth.size(); ++gi) {
        GroupScore score;
        score.group = truth[gi].first.name;
        score.expected = truth[gi].second;
        for (const auto& id : truth[gi].first.members) {
            const AttrLabel got = predicted.at(id);
            const bool correct = got == score.expected;
            correctness[gi].push_back(correct ? 1.0 : 0.0);
            if (correct) {
                score.true_positive += 1;
            } else {
                score.false_negative += 1;
            }
            result.scored_entities += 1;
        }
        result.groups.push_back(score);
    }
    // false positives: members of other groups predicted with this group's label
    for (auto& score : result.groups) {
        for (std::size_t gi = 0; gi < truth.size(); ++gi) {
            if (truth[gi].first.name == score.group) continue;
            for (const auto& id : truth[gi].first.members) {
                if (predicted.at(id) == score.expected) score.false_positive += 1;
            }
        }
        const double tp = static_cast<double>(score.true_positive);
        const double fp = static_cast<double>(score.false_positive);
        const double fn = static_cast<double>(score.false_negative);
        score.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        score.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        score.f1 = score.precision + score.recall > 0.0
                       ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                       : 0.0;
    }
    if (truth.size() == 2 && correctness[0].size() >= 5 && correctness[1].size() >= 5) {
        try {
            result.cross_group_rank_sum_p = rank_sum_test(correctness[0], correctness[1]);
        } catch (const DegenerateInputError&) {
            result.cross_group_rank_sum_p = 1.0;  // all predictions equally (in)correct
        }
    }
    return result;
}

double variant_shift_chi_square(const ScenarioResult& lhs, const ScenarioResult& rhs,
                                const std::string& group) {
    auto find = [&](const ScenarioResult& res) -> const GroupScore& {
        for (const auto& g : res.groups) {
            if (g.group == group) return g;
        }
        throw LookupError("scenario result has no group '" + group + "'");
    };
    const auto& l = find(lhs);
    const auto& r = find(rhs);
    return chi_square_test({{{static_cast<double>(l.true_positive),
                              static_cast<double>(l.false_negative)},
                             {static_cast<double>(r.true_positive),
                              static_cast<double>(r.false_negative)}}});
}

std::vector<MisclassifiedCell> misclassified_centroid_analysis(
    const std::vector<Prediction>& predictions,
    const std::vector<std::pair<EntityId, AttrLabel>>& truth_labels,
    const std::vector<std::pair<std::string, std::vector<double>>>& reference_centroids,
    const EmbeddingSpace& space) {
    if (reference_centroids.empty()) {
        throw ValidationError("misclassified_centroid_analysis: no reference centroids");
    }
    std::unordered_map<EntityId, AttrLabel> truth;
    for (const auto& [id, label] : truth_labels) truth.emplace(id, label);

    struct Acc {
        std::size_t count = 0;
        std::vector<double> sums;
    };
    std::map<std::pair<int, int>, Acc> cells;
    for (const auto& pred : predictions) {
        auto it = truth.find(pred.entity);
        if (it == truth.end()) {
            throw LookupError("no truth label for predicted entity '" + pred.entity + "'");
        }
        if (it->second == pred.label) continue;
        auto& cell = cells[{it->second == AttrLabel::A ? 0 : 1,
                            pred.label == AttrLabel::A ? 0 : 1}];
        if (cell.sums.empty()) cell.sums.assign(reference_centroids.size(), 0.0);
        cell.count += 1;
        for (std::size_t ri = 0; ri < reference_centroids.size(); ++ri) {
            cell.sums[ri] += cosine(space.row(pred.entity), reference_centroids[ri].second);
        }
    }
    std::vector<MisclassifiedCell> out;
    for (const auto& [key, acc] : cells) {
        MisclassifiedCell cell;
        cell.truth = key.first == 0 ? AttrLabel::A : AttrLabel::B;
        cell.predicted = key.second == 0 ? AttrLabel::A : AttrLabel::B;
        cell.count = acc.count;
        for (std::size_t ri = 0; ri < reference_centroids.size(); ++ri) {
            cell.mean_cosine[reference_centroids[ri].first] =
                acc.sums[ri] / static_cast<double>(acc.count);
        }
        out.push_back(std::move(cell));
    }
    return out;
}

}  // namespace aab
