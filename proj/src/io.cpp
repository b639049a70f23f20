#include "aab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace aab {

namespace {

using nlohmann::json;

std::string fmt_shortest(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view tok, const std::string& where) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError(where + ": cannot parse number '" + std::string(tok) + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError(where + ": non-finite value '" + std::string(tok) + "'");
    }
    return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

EmbeddingFormat embedding_format_from_name(const std::string& s) {
    if (s == "tsv") return EmbeddingFormat::Tsv;
    if (s == "jsonl") return EmbeddingFormat::Jsonl;
    throw ValidationError("unknown embedding format: " + s);
}

ReportFormat report_format_from_name(const std::string& s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    throw ValidationError("unknown report format: " + s);
}

namespace {

EmbeddingSpace read_embeddings_tsv(const std::string& path, const std::string& variant_tag) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    ++line_no;
    strip_cr(line);
    const auto header = split_tabs(line);
    if (header.size() < 3 || header[0] != "id") {
        throw ParseError(path + " line 1: expected header 'id<TAB>d0<TAB>d1...'");
    }
    const std::size_t dim = header.size() - 1;
    EmbeddingSpace space(path, dim, variant_tag);
    std::vector<double> vec(dim);
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto where = path + " line " + std::to_string(line_no);
        const auto fields = split_tabs(line);
        if (fields.size() != dim + 1) {
            throw ParseError(where + ": expected " + std::to_string(dim + 1) + " fields, got " +
                             std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < dim; ++j) vec[j] = parse_double(fields[j + 1], where);
        try {
            space.add_row(std::string(fields[0]), vec);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const DegenerateInputError& e) {
            throw DegenerateInputError(where + ": " + e.what());
        }
    }
    if (space.size() < 2) {
        throw ParseError(path + ": embedding space needs at least 2 rows");
    }
    return space;
}

EmbeddingSpace read_embeddings_jsonl(const std::string& path, const std::string& variant_tag) {
    auto in = open_input(path);
    std::string line;
    std::size_t record = 0;
    EmbeddingSpace space;
    bool have_dim = false;
    std::vector<double> vec;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        ++record;
        const auto where = path + " record " + std::to_string(record);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("vec") || !j["vec"].is_array()) {
            throw ParseError(where + ": expected {\"id\": ..., \"vec\": [...]}");
        }
        const auto& arr = j["vec"];
        if (!have_dim) {
            space = EmbeddingSpace(path, arr.size(), variant_tag);
            have_dim = true;
        }
        if (arr.size() != space.dim()) {
            throw ParseError(where + ": dimension " + std::to_string(arr.size()) +
                             " does not match " + std::to_string(space.dim()));
        }
        vec.resize(arr.size());
        for (std::size_t k = 0; k < arr.size(); ++k) {
            if (!arr[k].is_number()) throw ParseError(where + ": non-numeric component");
            vec[k] = arr[k].get<double>();
            if (!std::isfinite(vec[k])) throw ParseError(where + ": non-finite component");
        }
        try {
            space.add_row(j["id"].get<std::string>(), vec);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const DegenerateInputError& e) {
            throw DegenerateInputError(where + ": " + e.what());
        }
    }
    if (!have_dim || space.size() < 2) {
        throw ParseError(path + ": embedding space needs at least 2 rows");
    }
    return space;
}

}  // namespace

EmbeddingSpace read_embeddings(const std::string& path, EmbeddingFormat format,
                               const std::string& variant_tag) {
    return format == EmbeddingFormat::Tsv ? read_embeddings_tsv(path, variant_tag)
                                          : read_embeddings_jsonl(path, variant_tag);
}

void write_embeddings(const EmbeddingSpace& space, const std::string& path,
                      EmbeddingFormat format) {
    auto out = open_output(path);
    if (format == EmbeddingFormat::Tsv) {
        out << "id";
        for (std::size_t j = 0; j < space.dim(); ++j) out << "\td" << j;
        out << '\n';
        for (std::size_t i = 0; i < space.size(); ++i) {
            out << space.ids()[i];
            for (double v : space.row(i)) out << '\t' << fmt_shortest(v);
            out << '\n';
        }
    } else {
        for (std::size_t i = 0; i < space.size(); ++i) {
            out << "{\"id\":\"" << space.ids()[i] << "\",\"vec\":[";
            const auto r = space.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) {
                if (j) out << ',';
                out << fmt_shortest(r[j]);
            }
            out << "]}\n";
        }
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<EntityGroup> read_groups(const std::string& path) {
    std::vector<EntityGroup> groups;
    if (ends_with(path, ".json")) {
        auto in = open_input(path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        if (!j.contains("groups") || !j["groups"].is_array()) {
            throw ParseError(path + ": expected top-level \"groups\" array");
        }
        for (const auto& g : j["groups"]) {
            EntityGroup group;
            group.name = g.value("name", "");
            group.role = role_from_name(g.value("role", "unassigned"));
            for (const auto& m : g.at("members")) group.members.push_back(m.get<std::string>());
            groups.push_back(std::move(group));
        }
    } else {
        auto in = open_input(path);
        std::string line;
        std::size_t line_no = 0;
        std::unordered_map<std::string, std::size_t> by_label;
        std::unordered_map<EntityId, std::string> label_of;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            const auto fields = split_tabs(line);
            if (fields.size() != 2) {
                throw ParseError(path + " line " + std::to_string(line_no) +
                                 ": expected 'id<TAB>label'");
            }
            const EntityId id{fields[0]};
            const std::string label{fields[1]};
            if (id.empty() || label.empty()) {
                throw ParseError(path + " line " + std::to_string(line_no) +
                                 ": empty id or label");
            }
            auto [it, fresh] = label_of.emplace(id, label);
            if (!fresh) {
                throw ValidationError(path + " line " + std::to_string(line_no) + ": id '" + id +
                                      "' already labeled '" + it->second + "'");
            }
            auto [git, created] = by_label.emplace(label, groups.size());
            if (created) groups.push_back({label, Role::Unassigned, {}});
            groups[git->second].members.push_back(id);
        }
    }
    for (const auto& g : groups) g.validate();
    // verify role-paired disjointness where roles are declared
    const EntityGroup* by_role[4] = {nullptr, nullptr, nullptr, nullptr};
    for (const auto& g : groups) {
        if (g.role == Role::Unassigned) continue;
        const auto idx = static_cast<std::size_t>(g.role);
        if (by_role[idx] != nullptr) {
            throw ValidationError(path + ": two groups declare role " + role_name(g.role));
        }
        by_role[idx] = &g;
    }
    if (by_role[0] && by_role[1]) require_disjoint(*by_role[0], *by_role[1]);
    if (by_role[2] && by_role[3]) require_disjoint(*by_role[2], *by_role[3]);
    return groups;
}

void write_groups_tsv(const std::vector<EntityGroup>& groups, const std::string& path) {
    auto out = open_output(path);
    for (const auto& g : groups) {
        for (const auto& id : g.members) out << id << '\t' << g.name << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<std::pair<EntityId, std::vector<EntityId>>> read_interactions(
    const std::string& path) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::unordered_map<EntityId, std::vector<std::pair<long, EntityId>>> ranked;
    std::vector<EntityId> order;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3) {
            throw ParseError(path + " line " + std::to_string(line_no) +
                             ": expected 'user<TAB>item<TAB>rank'");
        }
        long rank = 0;
        auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), rank);
        if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) {
            throw ParseError(path + " line " + std::to_string(line_no) + ": bad rank");
        }
        const EntityId user{fields[0]};
        if (!ranked.count(user)) order.push_back(user);
        ranked[user].emplace_back(rank, EntityId{fields[1]});
    }
    std::vector<std::pair<EntityId, std::vector<EntityId>>> out;
    out.reserve(order.size());
    for (const auto& user : order) {
        auto& items = ranked[user];
        std::sort(items.begin(), items.end());
        std::vector<EntityId> ids;
        ids.reserve(items.size());
        for (auto& [rank, id] : items) ids.push_back(std::move(id));
        out.emplace_back(user, std::move(ids));
    }
    return out;
}

void write_interactions(const std::vector<std::pair<EntityId, std::vector<EntityId>>>& history,
                        const std::string& path) {
    auto out = open_output(path);
    for (const auto& [user, items] : history) {
        for (std::size_t r = 0; r < items.size(); ++r) {
            out << user << '\t' << items[r] << '\t' << (r + 1) << '\n';
        }
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<EngagementShare> read_engagement_shares(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<EngagementShare> out;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto where = path + " line " + std::to_string(line_no);
        const auto fields = split_tabs(line);
        if (fields.size() != 2) throw ParseError(where + ": expected 'item<TAB>share'");
        EngagementShare s;
        s.entity = EntityId{fields[0]};
        s.share_positive = parse_double(fields[1], where);
        if (s.share_positive < 0.0 || s.share_positive > 1.0) {
            throw ParseError(where + ": share outside [0, 1]");
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_engagement_shares(const std::vector<EngagementShare>& shares,
                             const std::string& path) {
    auto out = open_output(path);
    for (const auto& s : shares) out << s.entity << '\t' << fmt_shortest(s.share_positive) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_direction_json(const BiasDirection& direction, const std::string& path) {
    json j;
    j["method"] = direction_method_name(direction.method);
    j["label"] = direction.label;
    j["group_a"] = direction.group_a;
    j["group_b"] = direction.group_b;
    j["seed"] = direction.seed;
    j["vector"] = direction.vector;
    if (direction.validation) {
        const auto& v = *direction.validation;
        j["validation"] = {{"test1_p", v.test1_p},
                           {"test2_p", v.test2_p},
                           {"test3_p", v.test3_p},
                           {"alpha_corrected", v.alpha_corrected},
                           {"n_random", v.n_random},
                           {"passed", v.passed}};
    }
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

BiasDirection read_direction_json(const std::string& path) {
    auto in = open_input(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    BiasDirection d;
    d.method = direction_method_from_name(j.at("method").get<std::string>());
    d.label = j.value("label", direction_method_name(d.method));
    d.group_a = j.value("group_a", "");
    d.group_b = j.value("group_b", "");
    d.seed = j.value("seed", 0ULL);
    d.vector = j.at("vector").get<std::vector<double>>();
    return d;
}

void AuditConfig::validate() const {
    if (!seed_set) throw ValidationError("config: a seed is required (runs must be reproducible)");
    if (permutations < 100) throw ValidationError("config: permutations must be >= 100");
    if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("config: alpha must lie in (0, 0.5)");
    if (n_random_vectors < 100) throw ValidationError("config: n_random_vectors must be >= 100");
    if (correction != "bonferroni" && correction != "none") {
        throw ValidationError("config: correction must be 'bonferroni' or 'none'");
    }
    if (rripa_test != "permutation" && rripa_test != "subsample_wilcoxon") {
        throw ValidationError("config: rripa_test must be 'permutation' or 'subsample_wilcoxon'");
    }
    if (metrics.empty()) throw ValidationError("config: metrics list must not be empty");
    for (const auto& m : metrics) {
        if (m != "eaa" && m != "rripa") {
            throw ValidationError("config: unknown metric family '" + m + "'");
        }
    }
    if (embeddings.empty()) throw ValidationError("config: at least one embeddings entry");
    if (groups.path.empty()) throw ValidationError("config: groups.path missing");
    if (groups.label_a.empty() || groups.label_b.empty() || groups.label_e.empty() ||
        groups.label_p.empty()) {
        throw ValidationError("config: groups must map labels for roles a, b, e, p");
    }
    if (directions.empty()) throw ValidationError("config: at least one direction");
    for (const auto& d : directions) {
        if (d.method != "centroid_difference" && d.method != "linear_probe" &&
            d.method != "paired_pca" && d.method != "csvc") {
            throw ValidationError("config: unknown direction method '" + d.method + "'");
        }
    }
}

AuditConfig load_audit_config(const std::string& path) {
    auto in = open_input(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    AuditConfig c;
    try {
        c.attribute_name = j.at("attribute").get<std::string>();
        if (j.contains("seed")) {
            c.seed = j["seed"].get<std::uint64_t>();
            c.seed_set = true;
        }
        c.alpha = j.value("alpha", c.alpha);
        c.correction = j.value("correction", c.correction);
        c.permutations = j.value("permutations", c.permutations);
        c.n_random_vectors = j.value("n_random_vectors", c.n_random_vectors);
        c.rripa_test = j.value("rripa_test", c.rripa_test);
        c.rripa_subsamples = j.value("rripa_subsamples", c.rripa_subsamples);
        if (j.contains("metrics")) c.metrics = j["metrics"].get<std::vector<std::string>>();
        for (const auto& e : j.at("embeddings")) {
            VariantSpec v;
            v.variant = e.value("variant", "default");
            v.path = e.at("path").get<std::string>();
            v.format = embedding_format_from_name(e.value("format", "tsv"));
            c.embeddings.push_back(std::move(v));
        }
        const auto& g = j.at("groups");
        c.groups.path = g.at("path").get<std::string>();
        c.groups.label_a = g.at("a").get<std::string>();
        c.groups.label_b = g.at("b").get<std::string>();
        c.groups.label_e = g.at("e").get<std::string>();
        c.groups.label_p = g.at("p").get<std::string>();
        if (j.contains("directions")) {
            for (const auto& d : j["directions"]) {
                DirectionSpec spec;
                spec.method = d.at("method").get<std::string>();
                spec.csvc_k = d.value("k", spec.csvc_k);
                spec.pca_pairs = d.value("pairs", spec.pca_pairs);
                c.directions.push_back(std::move(spec));
            }
        } else {
            c.directions = {{"centroid_difference"}, {"linear_probe"}, {"paired_pca"}};
        }
        if (j.contains("probe")) {
            const auto& p = j["probe"];
            c.probe.regularization = p.value("regularization", c.probe.regularization);
            c.probe.epochs = p.value("epochs", c.probe.epochs);
            c.probe.split_fraction = p.value("split_fraction", c.probe.split_fraction);
        }
        if (j.contains("scenarios")) {
            const auto& s = j["scenarios"];
            c.scenarios.enabled = true;
            c.scenarios.interactions_path = s.value("interactions", "");
            c.scenarios.shares_path = s.value("engagement_shares", "");
            c.scenarios.history_k = s.value("history_k", c.scenarios.history_k);
            c.scenarios.stereotype_e = s.value("stereotype_e", c.scenarios.stereotype_e);
            c.scenarios.stereotype_p = s.value("stereotype_p", c.scenarios.stereotype_p);
        }
        if (j.contains("projection")) {
            const auto& p = j["projection"];
            c.projection.enabled = true;
            c.projection.n_components = p.value("n_components", c.projection.n_components);
            c.projection.most_biased_k = p.value("most_biased_k", c.projection.most_biased_k);
            c.projection.out_prefix = p.value("out_prefix", c.projection.out_prefix);
            c.projection.emit_csv = p.value("csv", c.projection.emit_csv);
            c.projection.emit_svg = p.value("svg", c.projection.emit_svg);
            c.projection.shared_basis = p.value("shared_basis", c.projection.shared_basis);
        }
        if (j.contains("report")) {
            const auto& r = j["report"];
            c.report_path = r.value("path", c.report_path);
            c.report_format = report_format_from_name(r.value("format", "json"));
            c.include_null_samples = r.value("include_null_samples", c.include_null_samples);
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    c.validate();
    return c;
}

void apply_overrides(AuditConfig& config, const ConfigOverrides& overrides) {
    if (overrides.seed) {
        config.seed = *overrides.seed;
        config.seed_set = true;
    }
    if (overrides.permutations) config.permutations = *overrides.permutations;
    if (overrides.alpha) config.alpha = *overrides.alpha;
    if (overrides.report_format) {
        config.report_format = report_format_from_name(*overrides.report_format);
    }
    if (overrides.report_path) config.report_path = *overrides.report_path;
    config.validate();
}

}  // namespace aab
