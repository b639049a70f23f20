#include "aab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "aab/metrics.hpp"
#include "aab/projection.hpp"
#include "aab/reference.hpp"
#include "aab/rng.hpp"
#include "aab/significance.hpp"
#include "aab/stats.hpp"
#include "aab/synthetic.hpp"

namespace aab {

namespace {

using nlohmann::json;

struct Stage {
    const char* name;
};

// Errors are rethrown with the failing pipeline stage in front.
template <typename F>
auto with_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error("stage '" + std::string(stage) + "': " + e.what());
    }
}

struct ResolvedGroups {
    EntityGroup a, b, e, p;
};

ResolvedGroups resolve_groups(const AuditConfig& config) {
    const auto groups = read_groups(config.groups.path);
    auto pick = [&](const std::string& label, Role role) {
        for (const auto& g : groups) {
            if (g.name == label) {
                EntityGroup out = g;
                out.role = role;
                return out;
            }
        }
        throw ValidationError("groups file has no group labeled '" + label + "'");
    };
    ResolvedGroups r{pick(config.groups.label_a, Role::A), pick(config.groups.label_b, Role::B),
                     pick(config.groups.label_e, Role::E), pick(config.groups.label_p, Role::P)};
    require_disjoint(r.a, r.b);
    require_disjoint(r.e, r.p);
    require_uncontaminated(r.e, r.a, r.b);
    require_uncontaminated(r.p, r.a, r.b);
    return r;
}

bool wants_metric(const AuditConfig& config, const char* family) {
    return std::find(config.metrics.begin(), config.metrics.end(), family) !=
           config.metrics.end();
}

int count_tests(const AuditConfig& config) {
    const int v = static_cast<int>(config.embeddings.size());
    const int d = static_cast<int>(config.directions.size());
    int per_variant = 3 * d;  // three validation tests per direction
    if (wants_metric(config, "eaa")) per_variant += 3;
    if (wants_metric(config, "rripa")) per_variant += d;
    if (config.scenarios.enabled) {
        per_variant += 1;  // item-scenario cross-group rank-sum
        if (!config.scenarios.interactions_path.empty()) per_variant += 1;
    }
    int total = v * per_variant;
    if (config.scenarios.enabled && v > 1) total += 2 * (v - 1);  // cross-variant chi-squares
    return total;
}

struct BuiltDirection {
    DirectionReport report;
    bool has_probe = false;
    LinearProbe probe;
};

BuiltDirection build_direction(const DirectionSpec& spec, const ResolvedGroups& groups,
                               const EmbeddingSpace& space, const AuditConfig& config,
                               std::uint64_t seed, std::vector<std::string>& notes) {
    BuiltDirection built;
    if (spec.method == "centroid_difference") {
        built.report.direction = centroid_difference_direction(groups.a, groups.b, space);
    } else if (spec.method == "linear_probe") {
        built.probe = train_linear_probe(groups.a, groups.b, space,
                                         config.probe.split_fraction, seed, config.probe);
        built.has_probe = true;
        built.report.direction = probe_direction(built.probe);
        built.report.direction.label = "svc";
    } else if (spec.method == "paired_pca") {
        std::size_t n_pairs = spec.pca_pairs;
        const std::size_t max_pairs =
            std::min(groups.a.members.size(), groups.b.members.size());
        if (n_pairs == 0 || n_pairs > max_pairs) n_pairs = max_pairs;
        auto pairs = random_cross_pairs(groups.a, groups.b, n_pairs, seed);
        built.report.direction = paired_pca_direction(pairs, space, derive_seed(seed, 1));
        built.report.direction.group_a = groups.a.name;
        built.report.direction.group_b = groups.b.name;
    } else if (spec.method == "csvc") {
        // preset: select the most attribute-aligned entities by the centroid
        // direction, then train the probe on just those
        const auto cd = centroid_difference_direction(groups.a, groups.b, space);
        std::size_t k = spec.csvc_k;
        const std::size_t cap = std::min(groups.a.members.size(), groups.b.members.size());
        if (k == 0 || k > cap) {
            notes.push_back("csvc k clamped to " + std::to_string(cap));
            k = cap;
        }
        EntityGroup top_a = most_biased_entities(groups.a, cd, space, k);
        EntityGroup top_b = most_biased_entities(groups.b, cd, space, k);
        built.probe = train_linear_probe(top_a, top_b, space, config.probe.split_fraction, seed,
                                         config.probe);
        built.has_probe = true;
        built.report.direction = probe_direction(built.probe);
        built.report.direction.label = "csvc-" + std::to_string(k);
    } else {
        throw ValidationError("unknown direction method '" + spec.method + "'");
    }
    if (built.has_probe) {
        built.report.has_probe = true;
        built.report.probe_train_accuracy = built.probe.train_accuracy;
        built.report.probe_test_accuracy = built.probe.test_accuracy;
        built.report.probe_converged = built.probe.converged;
        built.report.probe_warning = built.probe.warning;
    }
    built.report.direction.seed = seed;
    return built;
}

std::vector<std::string> project_variant(const AuditConfig& config, const ResolvedGroups& groups,
                                         const EmbeddingSpace& space, const std::string& variant,
                                         std::uint64_t seed, ProjectionModel* shared_model) {
    std::vector<std::string> files;
    const auto& spec = config.projection;
    ProjectionModel model;
    if (spec.shared_basis && shared_model != nullptr && !shared_model->components.empty()) {
        model = *shared_model;
    } else {
        const auto cd = centroid_difference_direction(groups.a, groups.b, space);
        std::size_t k = std::min(
            {spec.most_biased_k, groups.a.members.size(), groups.b.members.size()});
        if (k == 0) k = std::min(groups.a.members.size(), groups.b.members.size());
        EntityGroup fit_group;
        fit_group.name = "most_biased_fit";
        const auto top_a = most_biased_entities(groups.a, cd, space, k);
        const auto top_b = most_biased_entities(groups.b, cd, space, k);
        fit_group.members = top_a.members;
        fit_group.members.insert(fit_group.members.end(), top_b.members.begin(),
                                 top_b.members.end());
        model = fit_projection(fit_group, space, spec.n_components, seed);
        if (shared_model != nullptr && shared_model->components.empty()) *shared_model = model;
    }

    auto emit = [&](const EntityGroup& g1, const EntityGroup& g2, const std::string& what) {
        EntityGroup targets;
        targets.name = what;
        targets.members = g1.members;
        targets.members.insert(targets.members.end(), g2.members.begin(), g2.members.end());
        const auto points = project(model, targets, space);
        std::vector<std::pair<EntityId, std::string>> labels;
        for (const auto& id : g1.members) labels.emplace_back(id, g1.name);
        for (const auto& id : g2.members) labels.emplace_back(id, g2.name);
        const std::string base = spec.out_prefix + "_" + variant + "_" + what;
        if (spec.emit_csv) {
            emit_scatter_csv(points, labels, base + ".csv");
            files.push_back(base + ".csv");
        }
        if (spec.emit_svg) {
            emit_scatter_svg(points, labels, base + ".svg");
            files.push_back(base + ".svg");
        }
    };
    emit(groups.a, groups.b, "attribute_groups");
    emit(groups.e, groups.p, "test_groups");
    return files;
}

void run_scenarios(const AuditConfig& config, const ResolvedGroups& groups,
                   const EmbeddingSpace& space, const LinearProbe& probe, VariantReport& variant,
                   std::uint64_t seed, std::vector<std::string>& notes) {
    auto& block = variant.scenarios;
    block.enabled = true;

    // scenario: attribute prediction on the test-set item vectors,
    // stereotype-scored
    auto preds_e = predict_labels(probe, groups.e, space);
    const auto preds_p = predict_labels(probe, groups.p, space);
    std::vector<Prediction> item_preds = preds_e;
    item_preds.insert(item_preds.end(), preds_p.begin(), preds_p.end());
    const AttrLabel label_e =
        config.scenarios.stereotype_e == "A" ? AttrLabel::A : AttrLabel::B;
    const AttrLabel label_p =
        config.scenarios.stereotype_p == "A" ? AttrLabel::A : AttrLabel::B;
    block.item_scenario =
        stereotype_scores(item_preds, {{groups.e, label_e}, {groups.p, label_p}});
    block.item_scenario.scenario = "stereotyped_genre";

    // decile breakdown against engagement shares, when provided
    if (!config.scenarios.shares_path.empty()) {
        const auto shares = read_engagement_shares(config.scenarios.shares_path);
        block.decile_table = decile_breakdown(item_preds, shares);
        block.item_scenario.decile_table = block.decile_table;
    }

    // scenario: attribute prediction from interaction-history centroids
    if (!config.scenarios.interactions_path.empty()) {
        const auto history = read_interactions(config.scenarios.interactions_path);
        auto features = history_centroid_features(history, config.scenarios.history_k, space,
                                                  &block.excluded_users);
        auto restrict = [&](const EntityGroup& g) {
            EntityGroup out;
            out.name = g.name;
            out.role = g.role;
            for (const auto& id : g.members) {
                if (features.contains(id)) out.members.push_back(id);
            }
            return out;
        };
        const EntityGroup hist_a = restrict(groups.a);
        const EntityGroup hist_b = restrict(groups.b);
        if (hist_a.members.size() + hist_b.members.size() < 10) {
            notes.push_back(variant.variant + ": history scenario skipped (too few users)");
        } else {
            const auto hist_probe =
                train_linear_probe(hist_a, hist_b, features, config.probe.split_fraction,
                                   derive_seed(seed, 11), config.probe);
            block.history_accuracy = hist_probe.test_accuracy;
            EntityGroup all_users;
            all_users.name = "history_users";
            all_users.members = hist_a.members;
            all_users.members.insert(all_users.members.end(), hist_b.members.begin(),
                                     hist_b.members.end());
            const auto hist_preds = predict_labels(hist_probe, all_users, features);
            block.history_scenario =
                stereotype_scores(hist_preds, {{hist_a, AttrLabel::A}, {hist_b, AttrLabel::B}});
            block.history_scenario.scenario = "history_centroid";

            // misclassification geometry against the four reference centroids
            std::vector<std::pair<EntityId, AttrLabel>> truth;
            for (const auto& id : hist_a.members) truth.emplace_back(id, AttrLabel::A);
            for (const auto& id : hist_b.members) truth.emplace_back(id, AttrLabel::B);
            std::vector<std::pair<std::string, std::vector<double>>> refs;
            refs.emplace_back(groups.a.name, centroid(groups.a, space));
            refs.emplace_back(groups.b.name, centroid(groups.b, space));
            refs.emplace_back(groups.a.name + "_history", centroid(hist_a, features));
            refs.emplace_back(groups.b.name + "_history", centroid(hist_b, features));
            // cosines are taken in the feature space, which shares the
            // embedding dimension
            EmbeddingSpace merged("misclassified_refs", space.dim(), space.variant_tag());
            for (const auto& id : all_users.members) merged.add_row(id, features.row(id));
            block.misclassified = misclassified_centroid_analysis(hist_preds, truth, refs, merged);
        }
    }
}

}  // namespace

AuditOutcome run_audit(const AuditConfig& config) {
    config.validate();
    AuditOutcome outcome;
    auto& report = outcome.report;
    report.toolkit_version = AAB_VERSION;
    report.attribute = config.attribute_name;
    report.seed = config.seed;
    report.alpha = config.alpha;
    report.correction = config.correction;
    report.config = config;
    report.n_tests = count_tests(config);
    report.alpha_corrected = config.correction == "bonferroni"
                                 ? bonferroni_alpha(config.alpha, report.n_tests)
                                 : config.alpha;
    report.notes.push_back(
        "effect size denominator: population stddev of per-entity scores over E u P");
    report.notes.push_back("probe directions: weights normalized, intercept dropped");

    const auto groups = with_stage("ingest", [&] { return resolve_groups(config); });
    const bool run_eaa = wants_metric(config, "eaa");
    const bool run_rripa = wants_metric(config, "rripa");

    ProjectionModel shared_model;
    for (std::size_t vi = 0; vi < config.embeddings.size(); ++vi) {
        const auto& vspec = config.embeddings[vi];
        const auto space = with_stage("ingest", [&] {
            return read_embeddings(vspec.path, vspec.format, vspec.variant);
        });
        VariantReport variant;
        variant.variant = vspec.variant;
        variant.group_a = groups.a.name;
        variant.group_b = groups.b.name;
        variant.group_e = groups.e.name;
        variant.group_p = groups.p.name;
        variant.n_a = groups.a.members.size();
        variant.n_b = groups.b.members.size();
        variant.n_e = groups.e.members.size();
        variant.n_p = groups.p.members.size();

        // directions + validation
        std::vector<BuiltDirection> built;
        with_stage("directions", [&] {
            for (std::size_t di = 0; di < config.directions.size(); ++di) {
                const std::uint64_t dir_seed =
                    derive_seed(config.seed, 0x1000 + vi * 100 + di);
                built.push_back(build_direction(config.directions[di], groups, space, config,
                                                dir_seed, report.notes));
            }
            return 0;
        });
        with_stage("validation", [&] {
            for (std::size_t di = 0; di < built.size(); ++di) {
                auto& b = built[di];
                b.report.validation = validate_direction(
                    b.report.direction, groups.a, groups.b, space, config.n_random_vectors,
                    derive_seed(config.seed, 0x2000 + vi * 100 + di), report.alpha_corrected);
                b.report.direction.validation = b.report.validation;
                report.flags[variant.variant + "/" + b.report.direction.label + "/validation"] =
                    b.report.validation.passed;
            }
            return 0;
        });

        // cross-direction cosine matrix
        for (const auto& b : built) variant.direction_labels.push_back(b.report.direction.label);
        variant.direction_cosines.assign(built.size(), std::vector<double>(built.size(), 1.0));
        for (std::size_t i = 0; i < built.size(); ++i) {
            for (std::size_t j = 0; j < built.size(); ++j) {
                variant.direction_cosines[i][j] =
                    cosine(built[i].report.direction.vector, built[j].report.direction.vector);
            }
        }

        // metrics per (direction, variant)
        with_stage("metrics", [&] {
            MetricBundle base;
            bool have_base = false;
            for (auto& b : built) {
                if (run_rripa) {
                    b.report.metrics = compute_metric_bundle(groups.e, groups.p, groups.a,
                                                             groups.b, space,
                                                             &b.report.direction);
                } else if (!have_base) {
                    base = compute_metric_bundle(groups.e, groups.p, groups.a, groups.b, space);
                    have_base = true;
                    b.report.metrics = base;
                } else {
                    b.report.metrics = base;
                }
            }
            return 0;
        });

        // permutation tests
        with_stage("significance", [&] {
            if (run_eaa) {
                variant.deaa_permutation = permutation_test_deaa(
                    groups.e, groups.p, groups.a, groups.b, space, config.permutations,
                    derive_seed(config.seed, 0x3000 + vi), config.include_null_samples);
                variant.geaa_e_permutation = permutation_test_geaa(
                    groups.e, groups.a, groups.b, space, config.permutations,
                    derive_seed(config.seed, 0x3100 + vi), config.include_null_samples);
                variant.geaa_p_permutation = permutation_test_geaa(
                    groups.p, groups.a, groups.b, space, config.permutations,
                    derive_seed(config.seed, 0x3200 + vi), config.include_null_samples);
                report.flags[variant.variant + "/deaa"] =
                    variant.deaa_permutation.p_value < report.alpha_corrected;
                report.flags[variant.variant + "/geaa_e"] =
                    variant.geaa_e_permutation.p_value < report.alpha_corrected;
                report.flags[variant.variant + "/geaa_p"] =
                    variant.geaa_p_permutation.p_value < report.alpha_corrected;
            }
            if (run_rripa) {
                for (std::size_t di = 0; di < built.size(); ++di) {
                    auto& b = built[di];
                    b.report.rripa_route = config.rripa_test;
                    const std::uint64_t s = derive_seed(config.seed, 0x3300 + vi * 100 + di);
                    double p;
                    if (config.rripa_test == "permutation") {
                        b.report.rripa_permutation = permutation_test_rripa(
                            groups.e, groups.p, b.report.direction, space, config.permutations,
                            s, config.include_null_samples);
                        p = b.report.rripa_permutation.p_value;
                    } else {
                        b.report.rripa_wilcoxon_p = rripa_subsample_wilcoxon(
                            groups.e, groups.p, b.report.direction, space,
                            config.rripa_subsamples, s);
                        p = b.report.rripa_wilcoxon_p;
                    }
                    report.flags[variant.variant + "/" + b.report.direction.label + "/rripa"] =
                        p < report.alpha_corrected;
                }
            }
            return 0;
        });

        // classification scenarios
        if (config.scenarios.enabled) {
            with_stage("scenarios", [&] {
                const BuiltDirection* probe_dir = nullptr;
                for (const auto& b : built) {
                    if (b.has_probe) {
                        probe_dir = &b;
                        break;
                    }
                }
                LinearProbe scenario_probe;
                if (probe_dir != nullptr) {
                    scenario_probe = probe_dir->probe;
                } else {
                    scenario_probe = train_linear_probe(
                        groups.a, groups.b, space, config.probe.split_fraction,
                        derive_seed(config.seed, 0x4000 + vi), config.probe);
                    report.notes.push_back(variant.variant +
                                           ": no probe direction configured; trained one for "
                                           "the classification scenarios");
                }
                run_scenarios(config, groups, space, scenario_probe, variant,
                              derive_seed(config.seed, 0x4100 + vi), report.notes);
                report.flags[variant.variant + "/scenario_item_rank_sum"] =
                    variant.scenarios.item_scenario.cross_group_rank_sum_p <
                    report.alpha_corrected;
                if (!config.scenarios.interactions_path.empty() &&
                    !variant.scenarios.history_scenario.groups.empty()) {
                    report.flags[variant.variant + "/scenario_history_rank_sum"] =
                        variant.scenarios.history_scenario.cross_group_rank_sum_p <
                        report.alpha_corrected;
                }
                return 0;
            });
        }

        // projection artifacts
        if (config.projection.enabled) {
            with_stage("projection", [&] {
                project_variant(config, groups, space, variant.variant,
                                derive_seed(config.seed, 0x5000 + vi),
                                config.projection.shared_basis ? &shared_model : nullptr);
                return 0;
            });
        }

        for (auto& b : built) variant.directions.push_back(std::move(b.report));
        report.variants.push_back(std::move(variant));
    }

    // cross-variant scenario shifts (with-attribute vs. without-attribute)
    if (config.scenarios.enabled && report.variants.size() > 1) {
        with_stage("scenarios", [&] {
            for (std::size_t vi = 1; vi < report.variants.size(); ++vi) {
                auto& base = report.variants.front().scenarios.item_scenario;
                auto& other = report.variants[vi].scenarios.item_scenario;
                for (const auto* g : {&groups.e, &groups.p}) {
                    double p = 1.0;
                    try {
                        p = variant_shift_chi_square(base, other, g->name);
                    } catch (const DegenerateInputError&) {
                        // identical perfect/failed classification in both
                        // variants leaves a zero marginal: no shift detectable
                        report.notes.push_back(report.variants[vi].variant +
                                               ": chi-square for group '" + g->name +
                                               "' degenerate (zero marginal); p set to 1");
                    } catch (const InsufficientDataError&) {
                        report.notes.push_back(report.variants[vi].variant +
                                               ": chi-square for group '" + g->name +
                                               "' unreliable (expected count < 1); p set to 1");
                    }
                    const std::string key = "chi_square_vs_" +
                                            report.variants.front().variant + "/" + g->name;
                    other.comparison_p_values[key] = p;
                    report.flags[report.variants[vi].variant + "/scenario_shift_" + g->name] =
                        p < report.alpha_corrected;
                }
            }
            return 0;
        });
    }

    // verdict: metric-level tests flag bias; direction-parameterized tests
    // count only when their direction validated
    bool flagged = false;
    for (const auto& v : report.variants) {
        if (run_eaa) {
            flagged = flagged || v.deaa_permutation.p_value < report.alpha_corrected ||
                      v.geaa_e_permutation.p_value < report.alpha_corrected ||
                      v.geaa_p_permutation.p_value < report.alpha_corrected;
        }
        if (run_rripa) {
            for (const auto& d : v.directions) {
                if (!d.validation.passed) continue;
                const double p = d.rripa_route == "permutation" ? d.rripa_permutation.p_value
                                                                : d.rripa_wilcoxon_p;
                flagged = flagged || p < report.alpha_corrected;
            }
        }
    }
    report.bias_flagged = flagged;
    outcome.exit_code = flagged ? kExitBiasFlagged : kExitClean;

    with_stage("report", [&] {
        write_report(report, config.report_path, config.report_format);
        return 0;
    });
    return outcome;
}

namespace {

json delta_json(double a, double b) {
    json j;
    j["a"] = a;
    j["b"] = b;
    j["delta"] = b - a;
    if (a != 0.0) {
        j["pct_change"] = (b - a) / std::abs(a) * 100.0;
    } else {
        j["pct_change"] = nullptr;
    }
    return j;
}

}  // namespace

int run_compare(const std::string& report_a_path, const std::string& report_b_path,
                const std::string& out_path, ReportFormat format) {
    const auto ra = read_report_json(report_a_path);
    const auto rb = read_report_json(report_b_path);
    if (ra.attribute != rb.attribute) {
        throw ValidationError("reports audit different attributes ('" + ra.attribute + "' vs '" +
                              rb.attribute + "')");
    }
    if (ra.variants.size() != rb.variants.size() || ra.variants.empty()) {
        throw ValidationError("reports have mismatched variant counts");
    }
    json out;
    out["attribute"] = ra.attribute;
    out["report_a"] = report_a_path;
    out["report_b"] = report_b_path;
    json variants = json::array();
    for (std::size_t vi = 0; vi < ra.variants.size(); ++vi) {
        const auto& va = ra.variants[vi];
        const auto& vb = rb.variants[vi];
        if (va.group_a != vb.group_a || va.group_b != vb.group_b || va.group_e != vb.group_e ||
            va.group_p != vb.group_p) {
            throw ValidationError("variant " + std::to_string(vi) +
                                  ": group schemas differ between reports");
        }
        if (va.directions.empty() || vb.directions.empty()) {
            throw ValidationError("variant " + std::to_string(vi) + ": report lacks directions");
        }
        json vj;
        vj["variant_a"] = va.variant;
        vj["variant_b"] = vb.variant;
        const auto& ma = va.directions.front().metrics;
        const auto& mb = vb.directions.front().metrics;
        vj["geaa_e"] = delta_json(ma.geaa_e, mb.geaa_e);
        vj["geaa_p"] = delta_json(ma.geaa_p, mb.geaa_p);
        vj["deaa"] = delta_json(ma.deaa, mb.deaa);
        vj["effect_size"] = delta_json(ma.effect_size, mb.effect_size);
        json rr;
        for (const auto& da : va.directions) {
            for (const auto& db : vb.directions) {
                if (da.direction.label == db.direction.label) {
                    rr[da.direction.label] = delta_json(da.metrics.rripa_differential,
                                                        db.metrics.rripa_differential);
                }
            }
        }
        vj["rripa_differential"] = rr;
        vj["deaa_p_a"] = va.deaa_permutation.p_value;
        vj["deaa_p_b"] = vb.deaa_permutation.p_value;
        const bool reduced = std::abs(mb.deaa) < std::abs(ma.deaa);
        const bool still_significant = vb.deaa_permutation.p_value < rb.alpha_corrected;
        vj["bias_reduced"] = reduced;
        vj["bias_reduced_but_still_significant"] = reduced && still_significant;
        // scenario confusion shifts, when both reports scored scenarios
        if (!va.scenarios.item_scenario.groups.empty() &&
            !vb.scenarios.item_scenario.groups.empty()) {
            json chi;
            for (const auto& ga : va.scenarios.item_scenario.groups) {
                for (const auto& gb : vb.scenarios.item_scenario.groups) {
                    if (ga.group != gb.group) continue;
                    chi[ga.group] = chi_square_test(
                        {{{static_cast<double>(ga.true_positive),
                           static_cast<double>(ga.false_negative)},
                          {static_cast<double>(gb.true_positive),
                           static_cast<double>(gb.false_negative)}}});
                }
            }
            vj["scenario_chi_square"] = chi;
        }
        variants.push_back(vj);
    }
    out["variants"] = variants;

    std::ofstream f(out_path);
    if (!f) throw IoError("cannot open '" + out_path + "' for writing");
    if (format == ReportFormat::Json) {
        f << out.dump(2) << '\n';
    } else {
        f << "# Audit comparison: " << ra.attribute << "\n\n";
        f << "A: `" << report_a_path << "`  \nB: `" << report_b_path << "`\n\n";
        for (const auto& vj : variants) {
            f << "## " << vj["variant_a"].get<std::string>() << " vs "
              << vj["variant_b"].get<std::string>() << "\n\n";
            f << "| metric | A | B | delta | % change |\n|---|---|---|---|---|\n";
            for (const char* key : {"geaa_e", "geaa_p", "deaa", "effect_size"}) {
                const auto& d = vj[key];
                f << "| " << key << " | " << d["a"] << " | " << d["b"] << " | " << d["delta"]
                  << " | " << d["pct_change"] << " |\n";
            }
            f << "\nbias reduced but still significant: "
              << (vj["bias_reduced_but_still_significant"].get<bool>() ? "**yes**" : "no")
              << "\n\n";
        }
    }
    if (!f) throw IoError("write failed for '" + out_path + "'");
    return kExitClean;
}

GenerateOutcome run_generate(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open '" + config_path + "' for reading");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(config_path + ": " + e.what());
    }
    const std::string kind = j.value("kind", "planted");
    const std::string out_dir = j.value("out_dir", ".");
    const std::string prefix = j.value("prefix", "synthetic");
    std::filesystem::create_directories(out_dir);
    auto path_of = [&](const std::string& suffix) {
        return (std::filesystem::path(out_dir) / (prefix + suffix)).string();
    };
    GenerateOutcome outcome;
    auto track = [&](const std::string& p) {
        outcome.files.push_back(p);
        return p;
    };

    json audit_cfg;
    if (kind == "planted") {
        PlantedConfig pc;
        if (j.contains("planted")) {
            const auto& p = j["planted"];
            pc.dim = p.value("dim", pc.dim);
            pc.n_a = p.value("n_a", pc.n_a);
            pc.n_b = p.value("n_b", pc.n_b);
            pc.n_e = p.value("n_e", pc.n_e);
            pc.n_p = p.value("n_p", pc.n_p);
            pc.bias_strength = p.value("bias_strength", pc.bias_strength);
            pc.noise_sigma = p.value("noise_sigma", pc.noise_sigma);
            pc.e_alignment = p.value("e_alignment", pc.e_alignment);
            pc.p_alignment = p.value("p_alignment", pc.p_alignment);
            pc.seed = p.value("seed", pc.seed);
        }
        const auto planted = generate_planted_space(pc);
        write_embeddings(planted.space, track(path_of("_embeddings.tsv")), EmbeddingFormat::Tsv);
        write_groups_tsv({planted.group_a, planted.group_b, planted.group_e, planted.group_p},
                         track(path_of("_groups.tsv")));
        {
            json t;
            t["true_direction"] = planted.true_direction;
            t["seed"] = pc.seed;
            std::ofstream f(track(path_of("_true_direction.json")));
            f << t.dump(2) << '\n';
        }
        audit_cfg["embeddings"] = json::array(
            {{{"variant", "planted"}, {"path", path_of("_embeddings.tsv")}, {"format", "tsv"}}});
        audit_cfg["seed"] = pc.seed;
    } else if (kind == "mf") {
        SkewedLogConfig lc;
        ToyMfConfig mc;
        std::uint64_t seed = 1;
        if (j.contains("mf")) {
            const auto& m = j["mf"];
            lc.n_users_per_attribute = m.value("users_per_attribute", lc.n_users_per_attribute);
            lc.n_items_per_genre = m.value("items_per_genre", lc.n_items_per_genre);
            lc.items_per_user = m.value("items_per_user", lc.items_per_user);
            lc.skew = m.value("skew", lc.skew);
            seed = m.value("seed", seed);
            lc.seed = seed;
            mc.dim = m.value("dim", mc.dim);
            mc.epochs = m.value("epochs", mc.epochs);
            mc.regularization = m.value("regularization", mc.regularization);
            mc.confidence = m.value("confidence", mc.confidence);
            mc.attribute_strength = m.value("attribute_strength", mc.attribute_strength);
        }
        const auto skewed = generate_skewed_log(lc);
        const auto with_attr = train_toy_mf(skewed.log, skewed.users_a, skewed.users_b, true, mc,
                                            derive_seed(seed, 1));
        const auto without_attr = train_toy_mf(skewed.log, skewed.users_a, skewed.users_b, false,
                                               mc, derive_seed(seed, 1));
        write_embeddings(with_attr, track(path_of("_with_attribute.tsv")), EmbeddingFormat::Tsv);
        write_embeddings(without_attr, track(path_of("_without_attribute.tsv")),
                         EmbeddingFormat::Tsv);
        write_groups_tsv({skewed.users_a, skewed.users_b, skewed.items_e, skewed.items_p},
                         track(path_of("_groups.tsv")));
        // ranked history per user (insertion order; the toy log is unweighted)
        std::vector<std::pair<EntityId, std::vector<EntityId>>> history;
        {
            std::unordered_map<EntityId, std::size_t> idx;
            for (const auto& t : skewed.log.triples) {
                auto [it, fresh] = idx.emplace(t.user, history.size());
                if (fresh) history.emplace_back(t.user, std::vector<EntityId>{});
                history[it->second].second.push_back(t.item);
            }
        }
        write_interactions(history, track(path_of("_interactions.tsv")));
        // engagement shares: fraction of each item's interactions from A-users
        {
            std::unordered_set<EntityId> a_users(skewed.users_a.members.begin(),
                                                 skewed.users_a.members.end());
            std::vector<EngagementShare> shares;
            std::unordered_map<EntityId, std::pair<std::size_t, std::size_t>> counts;
            std::vector<EntityId> item_order;
            for (const auto& t : skewed.log.triples) {
                auto [it, fresh] = counts.emplace(t.item, std::make_pair(0u, 0u));
                if (fresh) item_order.push_back(t.item);
                it->second.second += 1;
                if (a_users.count(t.user)) it->second.first += 1;
            }
            for (const auto& item : item_order) {
                const auto& [from_a, total] = counts[item];
                shares.push_back(
                    {item, static_cast<double>(from_a) / static_cast<double>(total)});
            }
            write_engagement_shares(shares, track(path_of("_shares.tsv")));
        }
        audit_cfg["embeddings"] =
            json::array({{{"variant", "with-attribute"},
                          {"path", path_of("_with_attribute.tsv")},
                          {"format", "tsv"}},
                         {{"variant", "without-attribute"},
                          {"path", path_of("_without_attribute.tsv")},
                          {"format", "tsv"}}});
        audit_cfg["scenarios"] = {{"interactions", path_of("_interactions.tsv")},
                                  {"engagement_shares", path_of("_shares.tsv")},
                                  {"history_k", 3},
                                  {"stereotype_e", "A"},
                                  {"stereotype_p", "B"}};
        audit_cfg["seed"] = seed;
    } else {
        throw ValidationError(config_path + ": kind must be 'planted' or 'mf'");
    }

    audit_cfg["attribute"] = j.value("attribute", "attribute");
    audit_cfg["groups"] = {
        {"path", path_of("_groups.tsv")}, {"a", "A"}, {"b", "B"}, {"e", "E"}, {"p", "P"}};
    audit_cfg["directions"] = json::array({{{"method", "centroid_difference"}},
                                           {{"method", "linear_probe"}},
                                           {{"method", "paired_pca"}}});
    audit_cfg["permutations"] = j.value("permutations", 10000);
    audit_cfg["alpha"] = 0.05;
    audit_cfg["report"] = {{"path", path_of("_report.json")}, {"format", "json"}};
    {
        std::ofstream f(track(path_of("_audit_config.json")));
        if (!f) throw IoError("cannot write audit config");
        f << audit_cfg.dump(2) << '\n';
    }
    return outcome;
}

std::vector<std::string> run_project(const AuditConfig& config) {
    config.validate();
    if (!config.projection.enabled) {
        throw ValidationError("config has no projection block");
    }
    const auto groups = with_stage("ingest", [&] { return resolve_groups(config); });
    std::vector<std::string> files;
    ProjectionModel shared_model;
    for (std::size_t vi = 0; vi < config.embeddings.size(); ++vi) {
        const auto& vspec = config.embeddings[vi];
        const auto space = with_stage("ingest", [&] {
            return read_embeddings(vspec.path, vspec.format, vspec.variant);
        });
        auto emitted = with_stage("projection", [&] {
            return project_variant(config, groups, space, vspec.variant,
                                   derive_seed(config.seed, 0x5000 + vi),
                                   config.projection.shared_basis ? &shared_model : nullptr);
        });
        files.insert(files.end(), emitted.begin(), emitted.end());
    }
    return files;
}

int run_validate_direction(const AuditConfig& config, std::string* summary_out) {
    config.validate();
    const auto groups = with_stage("ingest", [&] { return resolve_groups(config); });
    const double alpha_corrected =
        config.correction == "bonferroni"
            ? bonferroni_alpha(config.alpha, 3 * static_cast<int>(config.directions.size()))
            : config.alpha;
    std::ostringstream out;
    bool all_passed = true;
    for (std::size_t vi = 0; vi < config.embeddings.size(); ++vi) {
        const auto& vspec = config.embeddings[vi];
        const auto space = with_stage("ingest", [&] {
            return read_embeddings(vspec.path, vspec.format, vspec.variant);
        });
        std::vector<std::string> notes;
        for (std::size_t di = 0; di < config.directions.size(); ++di) {
            auto built = with_stage("directions", [&] {
                return build_direction(config.directions[di], groups, space, config,
                                       derive_seed(config.seed, 0x1000 + vi * 100 + di), notes);
            });
            const auto val = with_stage("validation", [&] {
                return validate_direction(built.report.direction, groups.a, groups.b, space,
                                          config.n_random_vectors,
                                          derive_seed(config.seed, 0x2000 + vi * 100 + di),
                                          alpha_corrected);
            });
            out << vspec.variant << '/' << built.report.direction.label
                << ": test1_p=" << val.test1_p << " test2_p=" << val.test2_p
                << " test3_p=" << val.test3_p << " alpha=" << alpha_corrected << " -> "
                << (val.passed ? "validated" : "FAILED") << '\n';
            all_passed = all_passed && val.passed;
        }
    }
    if (summary_out != nullptr) {
        *summary_out = out.str();
    }
    return all_passed ? kExitClean : kExitBiasFlagged;
}

}  // namespace aab
