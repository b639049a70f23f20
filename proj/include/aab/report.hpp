#pragma once

#include <map>
#include <string>
#include <vector>

#include "aab/directions.hpp"
#include "aab/io.hpp"
#include "aab/metrics.hpp"
#include "aab/scenarios.hpp"
#include "aab/significance.hpp"

namespace aab {

// One audited bias direction within a variant: provenance, validation, the
// direction-parameterized metrics and their significance test.
struct DirectionReport {
    BiasDirection direction;
    DirectionValidation validation;
    MetricBundle metrics;  // direction-parameterized entries filled per direction
    PermutationResult rripa_permutation;   // route "permutation"
    double rripa_wilcoxon_p = 1.0;         // route "subsample_wilcoxon"
    std::string rripa_route;               // which route the config selected
    bool has_probe = false;
    double probe_train_accuracy = 0.0;
    double probe_test_accuracy = 0.0;
    bool probe_converged = true;
    std::string probe_warning;
};

struct ScenarioBlock {
    bool enabled = false;
    ScenarioResult item_scenario;       // attribute prediction on item vectors
    ScenarioResult history_scenario;    // prediction from interaction-history centroids
    std::vector<DecileRow> decile_table;
    std::vector<MisclassifiedCell> misclassified;
    std::vector<EntityId> excluded_users;  // too-short histories
    double history_accuracy = 0.0;
};

struct VariantReport {
    std::string variant;
    std::string group_a, group_b, group_e, group_p;
    std::size_t n_a = 0, n_b = 0, n_e = 0, n_p = 0;
    std::vector<DirectionReport> directions;
    // direction labels x direction labels cosine matrix
    std::vector<std::string> direction_labels;
    std::vector<std::vector<double>> direction_cosines;
    PermutationResult deaa_permutation;
    PermutationResult geaa_e_permutation;
    PermutationResult geaa_p_permutation;
    ScenarioBlock scenarios;
};

// The full audit verdict. Every flag is traceable to a p-value and the
// corrected threshold stored alongside; the embedded config echo makes the
// report re-runnable.
struct AssociationReport {
    std::string toolkit_version;
    std::string attribute;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double alpha_corrected = 0.05;
    int n_tests = 0;
    std::string correction;
    AuditConfig config;  // echoed into the serialized report
    std::vector<VariantReport> variants;
    std::map<std::string, bool> flags;  // test name -> significant at alpha_corrected
    bool bias_flagged = false;
    std::vector<std::string> notes;
};

// Serialization contract: canonical (lexicographic) key order, floats
// rounded to 12 significant digits, identical input + seed gives
// byte-identical output. Refuses to serialize non-finite values.
void write_report(const AssociationReport& report, const std::string& path, ReportFormat format);

std::string report_to_json_string(const AssociationReport& report);

AssociationReport read_report_json(const std::string& path);

}  // namespace aab
