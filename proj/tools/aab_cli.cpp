#include <cstdio>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "aab/audit.hpp"

namespace {

aab::ConfigOverrides g_overrides;

void add_override_flags(CLI::App* cmd) {
    cmd->add_option("--seed", g_overrides.seed, "override the config seed");
    cmd->add_option("--permutations", g_overrides.permutations,
                    "override the permutation count");
    cmd->add_option("--alpha", g_overrides.alpha, "override the significance level");
    cmd->add_option("--format", g_overrides.report_format, "report format: json or markdown");
    cmd->add_option("--out", g_overrides.report_path, "override the report output path");
}

aab::AuditConfig load_with_overrides(const std::string& path) {
    auto config = aab::load_audit_config(path);
    aab::apply_overrides(config, g_overrides);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attribute association bias audit for embedding spaces"};
    app.require_subcommand(1);
    int threads = 0;

    app.add_option("--threads", threads, "worker thread count (default: OpenMP runtime)");

    std::string config_path, report_a, report_b, out_path = "comparison.json";
    std::string compare_format = "json";

    auto* audit = app.add_subcommand("audit", "run the full audit pipeline");
    audit->add_option("config", config_path, "audit config JSON")->required();
    add_override_flags(audit);

    auto* compare = app.add_subcommand("compare", "compare two audit reports");
    compare->add_option("report_a", report_a, "baseline report JSON")->required();
    compare->add_option("report_b", report_b, "comparison report JSON")->required();
    compare->add_option("--out", out_path, "comparison output path");
    compare->add_option("--format", compare_format, "json or markdown");

    auto* generate = app.add_subcommand("generate", "generate synthetic audit inputs");
    generate->add_option("config", config_path, "generator config JSON")->required();

    auto* project = app.add_subcommand("project", "emit PCA scatter artifacts");
    project->add_option("config", config_path, "audit config JSON")->required();
    add_override_flags(project);

    auto* validate =
        app.add_subcommand("validate-direction", "build and validate bias directions");
    validate->add_option("config", config_path, "audit config JSON")->required();
    add_override_flags(validate);

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (audit->parsed()) {
            const auto outcome = aab::run_audit(load_with_overrides(config_path));
            std::cout << "report written to " << outcome.report.config.report_path << "\n";
            std::cout << "bias flagged: " << (outcome.report.bias_flagged ? "yes" : "no")
                      << " (alpha_corrected=" << outcome.report.alpha_corrected << ", "
                      << outcome.report.n_tests << " tests)\n";
            return outcome.exit_code;
        }
        if (compare->parsed()) {
            const int code = aab::run_compare(report_a, report_b, out_path,
                                              aab::report_format_from_name(compare_format));
            std::cout << "comparison written to " << out_path << "\n";
            return code;
        }
        if (generate->parsed()) {
            const auto outcome = aab::run_generate(config_path);
            for (const auto& f : outcome.files) std::cout << f << "\n";
            return 0;
        }
        if (project->parsed()) {
            const auto files = aab::run_project(load_with_overrides(config_path));
            for (const auto& f : files) std::cout << f << "\n";
            return 0;
        }
        if (validate->parsed()) {
            std::string summary;
            const int code =
                aab::run_validate_direction(load_with_overrides(config_path), &summary);
            std::cout << summary;
            return code;
        }
    } catch (const aab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return aab::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return aab::kExitError;
    }
    return aab::kExitError;
}
