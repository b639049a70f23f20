#pragma once

#include <string>
#include <vector>

#include "aab/io.hpp"
#include "aab/report.hpp"

namespace aab {

// Exit-code contract (stable): 0 = ran clean, no significant bias flagged;
// 10 = ran clean, bias flagged; 1 = error (thrown as an exception and
// mapped by the CLI).
inline constexpr int kExitClean = 0;
inline constexpr int kExitBiasFlagged = 10;
inline constexpr int kExitError = 1;

struct AuditOutcome {
    AssociationReport report;
    int exit_code = kExitClean;
};

// Runs directions -> validation -> metrics -> permutation tests ->
// scenarios (if configured) -> projections (if configured) and writes the
// report to config.report_path.
AuditOutcome run_audit(const AuditConfig& config);

// Side-by-side comparison of two audit reports (e.g. trained with vs.
// without the attribute). Writes a comparison document; returns kExitClean.
int run_compare(const std::string& report_a_path, const std::string& report_b_path,
                const std::string& out_path, ReportFormat format);

struct GenerateOutcome {
    std::vector<std::string> files;
};

// Synthetic data generation driven by a JSON config ("kind": "planted" or
// "mf"). Emits embeddings, groups, and, for the recommender scenario, the
// interaction log, engagement shares and a ready-to-run audit config.
GenerateOutcome run_generate(const std::string& config_path);

// Projection stage only: fit on the most-biased entities, project the
// attribute groups and the test groups, emit scatter files.
std::vector<std::string> run_project(const AuditConfig& config);

// Builds the configured directions and validates each; prints one line per
// direction. Returns kExitClean when all pass, kExitBiasFlagged otherwise.
int run_validate_direction(const AuditConfig& config, std::string* summary_out = nullptr);

}  // namespace aab
