#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aab/core.hpp"
#include "aab/directions.hpp"
#include "aab/scenarios.hpp"

namespace aab {

enum class EmbeddingFormat { Tsv, Jsonl };
enum class ReportFormat { Json, Markdown };

EmbeddingFormat embedding_format_from_name(const std::string& s);
ReportFormat report_format_from_name(const std::string& s);

// TSV: header `id<TAB>d0..d{k-1}`, one row per entity. JSONL: one
// {"id": ..., "vec": [...]} object per line. The dimension is inferred from
// the first row and enforced afterwards; parse errors carry line numbers.
EmbeddingSpace read_embeddings(const std::string& path, EmbeddingFormat format,
                               const std::string& variant_tag = "");
void write_embeddings(const EmbeddingSpace& space, const std::string& path,
                      EmbeddingFormat format);

// Group labelings. A `.json` file holds explicit blocks:
//   {"groups": [{"name": ..., "role": "A", "members": [...]}, ...]}
// anything else is a two-column TSV `id<TAB>label` producing one unassigned
// group per label. An id carrying two labels is a validation error.
std::vector<EntityGroup> read_groups(const std::string& path);
void write_groups_tsv(const std::vector<EntityGroup>& groups, const std::string& path);

// Ranked interaction history `user<TAB>item<TAB>rank` (rank 1 = top).
std::vector<std::pair<EntityId, std::vector<EntityId>>> read_interactions(
    const std::string& path);
void write_interactions(const std::vector<std::pair<EntityId, std::vector<EntityId>>>& history,
                        const std::string& path);

// Engagement shares `item<TAB>share_positive`.
std::vector<EngagementShare> read_engagement_shares(const std::string& path);
void write_engagement_shares(const std::vector<EngagementShare>& shares,
                             const std::string& path);

// Direction provenance (vector + method + groups + seed) for reuse across runs.
void write_direction_json(const BiasDirection& direction, const std::string& path);
BiasDirection read_direction_json(const std::string& path);

// ---- audit configuration ----

struct VariantSpec {
    std::string variant;
    std::string path;
    EmbeddingFormat format = EmbeddingFormat::Tsv;
};

struct GroupsSpec {
    std::string path;
    std::string label_a, label_b, label_e, label_p;
};

struct DirectionSpec {
    std::string method;        // centroid_difference | linear_probe | paired_pca | csvc
    std::size_t csvc_k = 200;  // per-group count for the csvc preset
    std::size_t pca_pairs = 0; // 0 -> min(|A|, |B|)
};

struct ScenarioSpec {
    bool enabled = false;
    std::string interactions_path;
    std::string shares_path;
    std::size_t history_k = 3;
    // stereotype labels for the test groups (which attribute pole each is
    // hypothesized to lean toward)
    std::string stereotype_e = "A";
    std::string stereotype_p = "B";
};

struct ProjectionSpec {
    bool enabled = false;
    std::size_t n_components = 2;
    std::size_t most_biased_k = 200;  // per attribute group
    std::string out_prefix = "projection";
    bool emit_csv = true;
    bool emit_svg = true;
    bool shared_basis = false;  // default: refit the basis per variant
};

struct AuditConfig {
    std::string attribute_name;
    std::uint64_t seed = 0;
    bool seed_set = false;  // runs must be reproducible; a seed is mandatory
    double alpha = 0.05;
    std::string correction = "bonferroni";
    std::uint64_t permutations = 10000;
    int n_random_vectors = 1000;
    std::string rripa_test = "permutation";  // or "subsample_wilcoxon"
    std::size_t rripa_subsamples = 10;
    std::vector<std::string> metrics = {"eaa", "rripa"};  // metric families to run
    std::vector<VariantSpec> embeddings;
    GroupsSpec groups;
    std::vector<DirectionSpec> directions;
    ProbeHyperparameters probe;
    ScenarioSpec scenarios;
    ProjectionSpec projection;
    std::string report_path = "report.json";
    ReportFormat report_format = ReportFormat::Json;
    bool include_null_samples = false;

    void validate() const;
};

AuditConfig load_audit_config(const std::string& path);

// CLI overrides applied on top of the file values.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> permutations;
    std::optional<double> alpha;
    std::optional<std::string> report_format;
    std::optional<std::string> report_path;
};

void apply_overrides(AuditConfig& config, const ConfigOverrides& overrides);

}  // namespace aab
