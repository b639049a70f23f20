#include "aab/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aab {

namespace {

using nlohmann::json;

// Floats enter the report rounded to 12 significant digits; the dump then
// prints the shortest representation of the rounded value, which keeps
// byte-identical output for identical runs.
double round12(double v, const char* context) {
    if (!std::isfinite(v)) {
        throw ValidationError(std::string("report contains a non-finite value at '") + context +
                              "'");
    }
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    double out = 0.0;
    std::from_chars(buf, res.ptr, out);
    return out;
}

json vec_json(const std::vector<double>& v, const char* context) {
    json arr = json::array();
    for (double x : v) arr.push_back(round12(x, context));
    return arr;
}

json permutation_json(const PermutationResult& r, bool include_null_samples) {
    json j;
    j["observed"] = round12(r.observed_stat, "permutation.observed");
    j["p"] = round12(r.p_value, "permutation.p");
    j["permutations"] = r.permutations;
    j["exact"] = r.exact;
    j["seed"] = r.seed;
    j["null"] = {{"mean", round12(r.null_summary.mean, "null.mean")},
                 {"stddev", round12(r.null_summary.stddev, "null.stddev")},
                 {"q025", round12(r.null_summary.q025, "null.q025")},
                 {"q25", round12(r.null_summary.q25, "null.q25")},
                 {"q50", round12(r.null_summary.q50, "null.q50")},
                 {"q75", round12(r.null_summary.q75, "null.q75")},
                 {"q975", round12(r.null_summary.q975, "null.q975")}};
    if (include_null_samples && !r.null_samples.empty()) {
        j["null_samples"] = vec_json(r.null_samples, "null_samples");
    }
    return j;
}

PermutationResult permutation_from_json(const json& j) {
    PermutationResult r;
    r.observed_stat = j.value("observed", 0.0);
    r.p_value = j.value("p", 1.0);
    r.permutations = j.value("permutations", 0ULL);
    r.exact = j.value("exact", false);
    r.seed = j.value("seed", 0ULL);
    return r;
}

json validation_json(const DirectionValidation& v) {
    return {{"test1_p", round12(v.test1_p, "validation.test1_p")},
            {"test2_p", round12(v.test2_p, "validation.test2_p")},
            {"test3_p", round12(v.test3_p, "validation.test3_p")},
            {"alpha_corrected", round12(v.alpha_corrected, "validation.alpha")},
            {"n_random", v.n_random},
            {"seed", v.seed},
            {"passed", v.passed}};
}

json eaa_list_json(const std::vector<EaaScore>& scores) {
    json arr = json::array();
    for (const auto& s : scores) {
        arr.push_back(json::array({s.entity, round12(s.value, "eaa")}));
    }
    return arr;
}

json metrics_json(const MetricBundle& m, bool with_direction) {
    json j;
    j["geaa_e"] = round12(m.geaa_e, "geaa_e");
    j["geaa_p"] = round12(m.geaa_p, "geaa_p");
    j["deaa"] = round12(m.deaa, "deaa");
    j["effect_size"] = round12(m.effect_size, "effect_size");
    j["mean_eaa_e"] = round12(m.mean_eaa_e, "mean_eaa_e");
    j["mean_eaa_p"] = round12(m.mean_eaa_p, "mean_eaa_p");
    if (with_direction) {
        j["rripa_e"] = round12(m.rripa_e, "rripa_e");
        j["rripa_p"] = round12(m.rripa_p, "rripa_p");
        j["rripa_differential"] = round12(m.rripa_differential, "rripa_differential");
        j["rripa_effect"] = round12(m.rripa_effect, "rripa_effect");
    }
    return j;
}

json config_json(const AuditConfig& c) {
    json j;
    j["attribute"] = c.attribute_name;
    j["seed"] = c.seed;
    j["alpha"] = round12(c.alpha, "config.alpha");
    j["correction"] = c.correction;
    j["permutations"] = c.permutations;
    j["n_random_vectors"] = c.n_random_vectors;
    j["rripa_test"] = c.rripa_test;
    j["rripa_subsamples"] = c.rripa_subsamples;
    j["metrics"] = c.metrics;
    json embeddings = json::array();
    for (const auto& e : c.embeddings) {
        embeddings.push_back({{"variant", e.variant},
                              {"path", e.path},
                              {"format", e.format == EmbeddingFormat::Tsv ? "tsv" : "jsonl"}});
    }
    j["embeddings"] = embeddings;
    j["groups"] = {{"path", c.groups.path},
                   {"a", c.groups.label_a},
                   {"b", c.groups.label_b},
                   {"e", c.groups.label_e},
                   {"p", c.groups.label_p}};
    json dirs = json::array();
    for (const auto& d : c.directions) {
        json dj = {{"method", d.method}};
        if (d.method == "csvc") dj["k"] = d.csvc_k;
        if (d.method == "paired_pca" && d.pca_pairs != 0) dj["pairs"] = d.pca_pairs;
        dirs.push_back(dj);
    }
    j["directions"] = dirs;
    j["probe"] = {{"regularization", round12(c.probe.regularization, "probe.regularization")},
                  {"epochs", c.probe.epochs},
                  {"split_fraction", round12(c.probe.split_fraction, "probe.split")}};
    if (c.scenarios.enabled) {
        j["scenarios"] = {{"interactions", c.scenarios.interactions_path},
                          {"engagement_shares", c.scenarios.shares_path},
                          {"history_k", c.scenarios.history_k},
                          {"stereotype_e", c.scenarios.stereotype_e},
                          {"stereotype_p", c.scenarios.stereotype_p}};
    }
    if (c.projection.enabled) {
        j["projection"] = {{"n_components", c.projection.n_components},
                           {"most_biased_k", c.projection.most_biased_k},
                           {"out_prefix", c.projection.out_prefix},
                           {"csv", c.projection.emit_csv},
                           {"svg", c.projection.emit_svg},
                           {"shared_basis", c.projection.shared_basis}};
    }
    j["report"] = {{"path", c.report_path},
                   {"format", c.report_format == ReportFormat::Json ? "json" : "markdown"},
                   {"include_null_samples", c.include_null_samples}};
    return j;
}

json scenario_result_json(const ScenarioResult& r) {
    json j;
    j["scenario"] = r.scenario;
    j["scored_entities"] = r.scored_entities;
    j["cross_group_rank_sum_p"] = round12(r.cross_group_rank_sum_p, "scenario.rank_sum_p");
    json groups = json::array();
    for (const auto& g : r.groups) {
        groups.push_back({{"group", g.group},
                          {"expected", attr_label_name(g.expected)},
                          {"true_positive", g.true_positive},
                          {"false_positive", g.false_positive},
                          {"false_negative", g.false_negative},
                          {"precision", round12(g.precision, "precision")},
                          {"recall", round12(g.recall, "recall")},
                          {"f1", round12(g.f1, "f1")}});
    }
    j["groups"] = groups;
    json cmp;
    for (const auto& [name, value] : r.comparison_p_values) {
        cmp[name] = round12(value, "scenario.comparison_p");
    }
    j["comparison_p_values"] = cmp;
    return j;
}

ScenarioResult scenario_result_from_json(const json& j) {
    ScenarioResult r;
    r.scenario = j.value("scenario", "");
    r.scored_entities = j.value("scored_entities", 0ULL);
    r.cross_group_rank_sum_p = j.value("cross_group_rank_sum_p", 1.0);
    if (j.contains("comparison_p_values")) {
        for (const auto& [key, value] : j["comparison_p_values"].items()) {
            r.comparison_p_values[key] = value.get<double>();
        }
    }
    if (j.contains("groups")) {
        for (const auto& g : j["groups"]) {
            GroupScore s;
            s.group = g.value("group", "");
            s.expected = g.value("expected", "A") == "A" ? AttrLabel::A : AttrLabel::B;
            s.true_positive = g.value("true_positive", 0ULL);
            s.false_positive = g.value("false_positive", 0ULL);
            s.false_negative = g.value("false_negative", 0ULL);
            s.precision = g.value("precision", 0.0);
            s.recall = g.value("recall", 0.0);
            s.f1 = g.value("f1", 0.0);
            r.groups.push_back(std::move(s));
        }
    }
    return r;
}

json decile_json(const std::vector<DecileRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json rj = {{"majority", attr_label_name(row.majority)},
                   {"decile", row.decile},
                   {"count", row.count}};
        if (row.frac_a) {
            rj["frac_a"] = round12(*row.frac_a, "decile.frac_a");
            rj["frac_b"] = round12(*row.frac_b, "decile.frac_b");
        } else {
            rj["frac_a"] = nullptr;
            rj["frac_b"] = nullptr;
        }
        arr.push_back(rj);
    }
    return arr;
}

json variant_json(const VariantReport& v, const AuditConfig& config) {
    json j;
    j["variant"] = v.variant;
    j["groups"] = {{"a", {{"name", v.group_a}, {"size", v.n_a}}},
                   {"b", {{"name", v.group_b}, {"size", v.n_b}}},
                   {"e", {{"name", v.group_e}, {"size", v.n_e}}},
                   {"p", {{"name", v.group_p}, {"size", v.n_p}}}};
    json dirs = json::array();
    for (const auto& d : v.directions) {
        json dj;
        dj["label"] = d.direction.label;
        dj["method"] = direction_method_name(d.direction.method);
        dj["group_a"] = d.direction.group_a;
        dj["group_b"] = d.direction.group_b;
        dj["seed"] = d.direction.seed;
        dj["vector"] = vec_json(d.direction.vector, "direction.vector");
        dj["validation"] = validation_json(d.validation);
        dj["metrics"] = metrics_json(d.metrics, true);
        if (d.rripa_route == "permutation") {
            dj["rripa_test"] = permutation_json(d.rripa_permutation, config.include_null_samples);
            dj["rripa_test"]["route"] = "permutation";
        } else {
            dj["rripa_test"] = {{"route", "subsample_wilcoxon"},
                                {"p", round12(d.rripa_wilcoxon_p, "rripa_wilcoxon_p")}};
        }
        if (d.has_probe) {
            dj["probe"] = {{"train_accuracy", round12(d.probe_train_accuracy, "probe.train")},
                           {"test_accuracy", round12(d.probe_test_accuracy, "probe.test")},
                           {"converged", d.probe_converged},
                           {"warning", d.probe_warning},
                           {"intercept_dropped", true}};
        }
        dirs.push_back(dj);
    }
    j["directions"] = dirs;
    json cos;
    cos["labels"] = v.direction_labels;
    json matrix = json::array();
    for (const auto& row : v.direction_cosines) {
        matrix.push_back(vec_json(row, "direction_cosines"));
    }
    cos["matrix"] = matrix;
    j["direction_cosines"] = cos;
    // the direction-independent metric block, identical for every direction
    if (!v.directions.empty()) {
        j["metrics"] = metrics_json(v.directions.front().metrics, false);
        j["metrics"]["per_entity_eaa"] = {
            {"e", eaa_list_json(v.directions.front().metrics.eaa_e)},
            {"p", eaa_list_json(v.directions.front().metrics.eaa_p)}};
    }
    j["deaa_permutation"] = permutation_json(v.deaa_permutation, config.include_null_samples);
    j["geaa_e_permutation"] = permutation_json(v.geaa_e_permutation, config.include_null_samples);
    j["geaa_p_permutation"] = permutation_json(v.geaa_p_permutation, config.include_null_samples);
    if (v.scenarios.enabled) {
        json s;
        s["item_scenario"] = scenario_result_json(v.scenarios.item_scenario);
        s["history_scenario"] = scenario_result_json(v.scenarios.history_scenario);
        s["history_accuracy"] = round12(v.scenarios.history_accuracy, "history_accuracy");
        s["decile_table"] = decile_json(v.scenarios.decile_table);
        json mis = json::array();
        for (const auto& cell : v.scenarios.misclassified) {
            json cj = {{"truth", attr_label_name(cell.truth)},
                       {"predicted", attr_label_name(cell.predicted)},
                       {"count", cell.count}};
            json means;
            for (const auto& [name, value] : cell.mean_cosine) {
                means[name] = round12(value, "misclassified.mean_cosine");
            }
            cj["mean_cosine"] = means;
            mis.push_back(cj);
        }
        s["misclassified_centroids"] = mis;
        json excluded = json::array();
        for (const auto& id : v.scenarios.excluded_users) excluded.push_back(id);
        s["excluded_users"] = excluded;
        j["scenarios"] = s;
    }
    return j;
}

json report_json(const AssociationReport& r) {
    json j;
    j["toolkit_version"] = r.toolkit_version;
    j["attribute"] = r.attribute;
    j["seed"] = r.seed;
    j["alpha"] = round12(r.alpha, "alpha");
    j["alpha_corrected"] = round12(r.alpha_corrected, "alpha_corrected");
    j["n_tests"] = r.n_tests;
    j["correction"] = r.correction;
    j["config"] = config_json(r.config);
    json variants = json::array();
    for (const auto& v : r.variants) variants.push_back(variant_json(v, r.config));
    j["variants"] = variants;
    json flags;
    for (const auto& [name, value] : r.flags) flags[name] = value;
    j["flags"] = flags;
    j["bias_flagged"] = r.bias_flagged;
    j["notes"] = r.notes;
    return j;
}

void write_markdown(const AssociationReport& r, std::ostream& out) {
    out << "# Attribute association audit: " << r.attribute << "\n\n";
    out << "- toolkit version: " << r.toolkit_version << "\n";
    out << "- seed: " << r.seed << "\n";
    out << "- alpha: " << r.alpha << " (" << r.correction << "-corrected to " << r.alpha_corrected
        << " over " << r.n_tests << " tests)\n";
    out << "- bias flagged: " << (r.bias_flagged ? "**yes**" : "no") << "\n\n";
    for (const auto& v : r.variants) {
        out << "## Variant `" << v.variant << "`\n\n";
        out << "Groups: A=" << v.group_a << " (" << v.n_a << "), B=" << v.group_b << " (" << v.n_b
            << "), E=" << v.group_e << " (" << v.n_e << "), P=" << v.group_p << " (" << v.n_p
            << ")\n\n";
        out << "### Directions\n\n";
        out << "| direction | method | test1 p | test2 p | test3 p | validated |\n";
        out << "|---|---|---|---|---|---|\n";
        for (const auto& d : v.directions) {
            out << "| " << d.direction.label << " | " << direction_method_name(d.direction.method)
                << " | " << d.validation.test1_p << " | " << d.validation.test2_p << " | "
                << d.validation.test3_p << " | " << (d.validation.passed ? "yes" : "no")
                << " |\n";
        }
        out << "\n### Metrics\n\n";
        if (!v.directions.empty()) {
            const auto& m = v.directions.front().metrics;
            out << "| metric | value |\n|---|---|\n";
            out << "| GEAA(E) | " << m.geaa_e << " |\n";
            out << "| GEAA(P) | " << m.geaa_p << " |\n";
            out << "| DEAA | " << m.deaa << " |\n";
            out << "| effect size | " << m.effect_size << " |\n";
            out << "| mean EAA(E) (toolkit extra) | " << m.mean_eaa_e << " |\n";
            out << "| mean EAA(P) (toolkit extra) | " << m.mean_eaa_p << " |\n";
        }
        out << "\n### Significance\n\n";
        out << "| test | observed | p | flag |\n|---|---|---|---|\n";
        auto perm_row = [&](const char* name, const PermutationResult& p) {
            out << "| " << name << " | " << p.observed_stat << " | " << p.p_value << " | "
                << (p.p_value < r.alpha_corrected ? "significant" : "-") << " |\n";
        };
        perm_row("DEAA permutation", v.deaa_permutation);
        perm_row("GEAA(E) permutation", v.geaa_e_permutation);
        perm_row("GEAA(P) permutation", v.geaa_p_permutation);
        for (const auto& d : v.directions) {
            const std::string name = "R-RIPA (" + d.direction.label + ", " + d.rripa_route + ")";
            if (d.rripa_route == "permutation") {
                perm_row(name.c_str(), d.rripa_permutation);
            } else {
                out << "| " << name << " | " << d.metrics.rripa_differential << " | "
                    << d.rripa_wilcoxon_p << " | "
                    << (d.rripa_wilcoxon_p < r.alpha_corrected ? "significant" : "-") << " |\n";
            }
        }
        if (v.scenarios.enabled) {
            out << "\n### Classification scenarios\n\n";
            out << "| group | expected | precision | recall | f1 |\n|---|---|---|---|---|\n";
            for (const auto& g : v.scenarios.item_scenario.groups) {
                out << "| " << g.group << " | " << attr_label_name(g.expected) << " | "
                    << g.precision << " | " << g.recall << " | " << g.f1 << " |\n";
            }
            out << "\nhistory-centroid accuracy: " << v.scenarios.history_accuracy << "\n";
        }
        out << "\n";
    }
    if (!r.notes.empty()) {
        out << "## Notes\n\n";
        for (const auto& n : r.notes) out << "- " << n << "\n";
    }
}

}  // namespace

std::string report_to_json_string(const AssociationReport& report) {
    return report_json(report).dump(2) + "\n";
}

void write_report(const AssociationReport& report, const std::string& path, ReportFormat format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    if (format == ReportFormat::Json) {
        out << report_to_json_string(report);
    } else {
        std::ostringstream buf;
        write_markdown(report, buf);
        out << buf.str();
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

AssociationReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    AssociationReport r;
    r.toolkit_version = j.value("toolkit_version", "");
    r.attribute = j.value("attribute", "");
    r.seed = j.value("seed", 0ULL);
    r.alpha = j.value("alpha", 0.05);
    r.alpha_corrected = j.value("alpha_corrected", r.alpha);
    r.n_tests = j.value("n_tests", 0);
    r.correction = j.value("correction", "bonferroni");
    r.bias_flagged = j.value("bias_flagged", false);
    if (j.contains("flags")) {
        for (const auto& [key, value] : j["flags"].items()) r.flags[key] = value.get<bool>();
    }
    if (j.contains("variants")) {
        for (const auto& vj : j["variants"]) {
            VariantReport v;
            v.variant = vj.value("variant", "");
            if (vj.contains("groups")) {
                const auto& g = vj["groups"];
                v.group_a = g["a"].value("name", "");
                v.group_b = g["b"].value("name", "");
                v.group_e = g["e"].value("name", "");
                v.group_p = g["p"].value("name", "");
                v.n_a = g["a"].value("size", 0ULL);
                v.n_b = g["b"].value("size", 0ULL);
                v.n_e = g["e"].value("size", 0ULL);
                v.n_p = g["p"].value("size", 0ULL);
            }
            if (vj.contains("directions")) {
                for (const auto& dj : vj["directions"]) {
                    DirectionReport d;
                    d.direction.label = dj.value("label", "");
                    d.direction.method =
                        direction_method_from_name(dj.value("method", "centroid_difference"));
                    d.direction.group_a = dj.value("group_a", "");
                    d.direction.group_b = dj.value("group_b", "");
                    d.direction.seed = dj.value("seed", 0ULL);
                    if (dj.contains("vector")) {
                        d.direction.vector = dj["vector"].get<std::vector<double>>();
                    }
                    if (dj.contains("validation")) {
                        const auto& valj = dj["validation"];
                        d.validation.test1_p = valj.value("test1_p", 1.0);
                        d.validation.test2_p = valj.value("test2_p", 1.0);
                        d.validation.test3_p = valj.value("test3_p", 1.0);
                        d.validation.alpha_corrected = valj.value("alpha_corrected", 0.05);
                        d.validation.n_random = valj.value("n_random", 0);
                        d.validation.passed = valj.value("passed", false);
                    }
                    if (dj.contains("metrics")) {
                        const auto& mj = dj["metrics"];
                        d.metrics.geaa_e = mj.value("geaa_e", 0.0);
                        d.metrics.geaa_p = mj.value("geaa_p", 0.0);
                        d.metrics.deaa = mj.value("deaa", 0.0);
                        d.metrics.effect_size = mj.value("effect_size", 0.0);
                        d.metrics.mean_eaa_e = mj.value("mean_eaa_e", 0.0);
                        d.metrics.mean_eaa_p = mj.value("mean_eaa_p", 0.0);
                        d.metrics.rripa_e = mj.value("rripa_e", 0.0);
                        d.metrics.rripa_p = mj.value("rripa_p", 0.0);
                        d.metrics.rripa_differential = mj.value("rripa_differential", 0.0);
                        d.metrics.rripa_effect = mj.value("rripa_effect", 0.0);
                    }
                    if (dj.contains("rripa_test")) {
                        const auto& rt = dj["rripa_test"];
                        d.rripa_route = rt.value("route", "permutation");
                        if (d.rripa_route == "permutation") {
                            d.rripa_permutation = permutation_from_json(rt);
                        } else {
                            d.rripa_wilcoxon_p = rt.value("p", 1.0);
                        }
                    }
                    if (dj.contains("probe")) {
                        d.has_probe = true;
                        d.probe_train_accuracy = dj["probe"].value("train_accuracy", 0.0);
                        d.probe_test_accuracy = dj["probe"].value("test_accuracy", 0.0);
                        d.probe_converged = dj["probe"].value("converged", true);
                        d.probe_warning = dj["probe"].value("warning", "");
                    }
                    v.directions.push_back(std::move(d));
                }
            }
            if (vj.contains("direction_cosines")) {
                const auto& cj = vj["direction_cosines"];
                v.direction_labels = cj.value("labels", std::vector<std::string>{});
                if (cj.contains("matrix")) {
                    for (const auto& row : cj["matrix"]) {
                        v.direction_cosines.push_back(row.get<std::vector<double>>());
                    }
                }
            }
            if (vj.contains("deaa_permutation")) {
                v.deaa_permutation = permutation_from_json(vj["deaa_permutation"]);
            }
            if (vj.contains("geaa_e_permutation")) {
                v.geaa_e_permutation = permutation_from_json(vj["geaa_e_permutation"]);
            }
            if (vj.contains("geaa_p_permutation")) {
                v.geaa_p_permutation = permutation_from_json(vj["geaa_p_permutation"]);
            }
            if (vj.contains("scenarios")) {
                const auto& sj = vj["scenarios"];
                v.scenarios.enabled = true;
                if (sj.contains("item_scenario")) {
                    v.scenarios.item_scenario = scenario_result_from_json(sj["item_scenario"]);
                }
                if (sj.contains("history_scenario")) {
                    v.scenarios.history_scenario =
                        scenario_result_from_json(sj["history_scenario"]);
                }
                v.scenarios.history_accuracy = sj.value("history_accuracy", 0.0);
            }
            r.variants.push_back(std::move(v));
        }
    }
    return r;
}

}  // namespace aab
