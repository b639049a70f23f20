#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aab/core.hpp"
#include "aab/directions.hpp"

namespace aab {

enum class AttrLabel { A, B };

inline const char* attr_label_name(AttrLabel l) { return l == AttrLabel::A ? "A" : "B"; }

struct Prediction {
    EntityId entity;
    AttrLabel label;
};

// sign(w.v + intercept): strictly positive -> A, otherwise B (the
// on-hyperplane tie resolves to B).
std::vector<Prediction> predict_labels(const LinearProbe& probe, const EntityGroup& targets,
                                       const EmbeddingSpace& space);

struct EngagementShare {
    EntityId entity;
    double share_positive = 0.0;  // fraction of engagement from the A-labeled group
};

// One row per (majority side, decile bucket). Buckets cover majority shares
// >= threshold by decile floor; empty buckets keep count 0 and unset shares.
struct DecileRow {
    AttrLabel majority;
    int decile = 50;  // 50, 60, 70, 80, 90 under the default thresholds
    std::size_t count = 0;
    std::optional<double> frac_a;
    std::optional<double> frac_b;
};

std::vector<DecileRow> decile_breakdown(const std::vector<Prediction>& predictions,
                                        const std::vector<EngagementShare>& shares,
                                        const std::vector<double>& thresholds = {0.5, 0.6, 0.7,
                                                                                 0.8, 0.9});

// Per-user feature space: centroid of the user's top-k items from a ranked
// interaction history. Users with fewer than k items are skipped and
// reported through `excluded`.
EmbeddingSpace history_centroid_features(
    const std::vector<std::pair<EntityId, std::vector<EntityId>>>& interactions, std::size_t k,
    const EmbeddingSpace& item_space, std::vector<EntityId>* excluded = nullptr);

struct GroupScore {
    std::string group;
    AttrLabel expected;
    std::size_t true_positive = 0, false_positive = 0, false_negative = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct ScenarioResult {
    std::string scenario;
    std::vector<GroupScore> groups;
    std::size_t scored_entities = 0;
    // Mann-Whitney between the correctness indicators of the two groups
    double cross_group_rank_sum_p = 1.0;
    std::vector<DecileRow> decile_table;
    std::map<std::string, double> comparison_p_values;
};

// Precision/recall/F1 per stereotyped group against the stereotype labels.
// Every scored entity must belong to exactly one group.
ScenarioResult stereotype_scores(const std::vector<Prediction>& predictions,
                                 const std::vector<std::pair<EntityGroup, AttrLabel>>& truth);

// Chi-square on correct/incorrect counts per group across two variants of
// the same scenario (e.g. trained with vs. without the attribute).
double variant_shift_chi_square(const ScenarioResult& lhs, const ScenarioResult& rhs,
                                const std::string& group);

struct MisclassifiedCell {
    AttrLabel truth;
    AttrLabel predicted;
    std::size_t count = 0;
    std::map<std::string, double> mean_cosine;  // reference centroid name -> mean
};

// For each misclassified entity, cosine with each named reference centroid,
// aggregated per (truth, predicted) cell. Correctly classified entities do
// not appear.
std::vector<MisclassifiedCell> misclassified_centroid_analysis(
    const std::vector<Prediction>& predictions,
    const std::vector<std::pair<EntityId, AttrLabel>>& truth_labels,
    const std::vector<std::pair<std::string, std::vector<double>>>& reference_centroids,
    const EmbeddingSpace& space);

}  // namespace aab
