#include "aab/projection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "aab/linalg.hpp"

namespace aab {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

void gram_schmidt(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (const auto& b : basis) {
        double proj = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * b[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
    }
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double n = std::sqrt(n2);
    if (n > 0.0) {
        for (auto& x : v) x /= n;
    }
}

}  // namespace

ProjectionModel fit_projection(const EntityGroup& entities, const EmbeddingSpace& space,
                               std::size_t n_components, std::uint64_t seed) {
    entities.validate();
    if (n_components < 2) {
        throw ValidationError("fit_projection: n_components must be >= 2");
    }
    if (entities.members.size() <= n_components) {
        throw ValidationError("fit_projection: need more entities than components");
    }
    const std::size_t d = space.dim();
    const std::size_t n = entities.members.size();
    const std::size_t structural_rank = std::min(n - 1, d);
    if (structural_rank < n_components) {
        throw ValidationError("fit_projection: achievable rank " +
                              std::to_string(structural_rank) + " below requested " +
                              std::to_string(n_components) + " components");
    }

    const auto rows = resolve(entities, space);
    ProjectionModel model;
    model.fit_entity_ids = entities.members;
    model.mean.assign(d, 0.0);
    for (std::size_t r : rows) {
        const auto v = space.row(r);
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += v[j];
    }
    for (auto& x : model.mean) x /= static_cast<double>(n);

    std::vector<double> centered(n * d);
    double total_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = space.row(rows[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double c = v[j] - model.mean[j];
            centered[i * d + j] = c;
            total_var += c * c;
        }
    }
    total_var /= static_cast<double>(n);
    if (total_var == 0.0) {
        throw ValidationError("fit_projection: achievable rank 0 (all fit entities identical)");
    }

    auto matvec = [&](std::span<const double> v, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = centered.data() + i * d;
            double proj = 0.0;
            for (std::size_t j = 0; j < d; ++j) proj += row[j] * v[j];
            for (std::size_t j = 0; j < d; ++j) out[j] += proj * row[j];
        }
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : out) x *= inv;
    };

    for (std::size_t c = 0; c < n_components; ++c) {
        auto pc = power_iteration(matvec, d, seed + c, model.components);
        double eigenvalue = std::max(0.0, pc.eigenvalue);
        if (eigenvalue <= 1e-12 * total_var) {
            // beyond the data's numerical rank: complete the basis with a
            // deterministic orthonormal direction carrying zero variance
            eigenvalue = 0.0;
        }
        gram_schmidt(pc.vector, model.components);
        model.components.push_back(std::move(pc.vector));
        model.explained_variance.push_back(eigenvalue);
        model.explained_variance_share.push_back(eigenvalue / total_var);
    }
    return model;
}

std::vector<ProjectedPoint> project(const ProjectionModel& model, const EntityGroup& targets,
                                    const EmbeddingSpace& space) {
    targets.validate();
    if (model.mean.size() != space.dim()) {
        throw ValidationError("project: model dimension " + std::to_string(model.mean.size()) +
                              " does not match space dimension " + std::to_string(space.dim()));
    }
    std::vector<ProjectedPoint> out;
    out.reserve(targets.members.size());
    for (const auto& id : targets.members) {
        const auto v = space.row(id);
        ProjectedPoint pt{id, {}};
        pt.coords.reserve(model.components.size());
        for (const auto& comp : model.components) {
            double s = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) s += (v[j] - model.mean[j]) * comp[j];
            pt.coords.push_back(s);
        }
        out.push_back(std::move(pt));
    }
    return out;
}

namespace {

std::vector<const ProjectedPoint*> sorted_by_id(const std::vector<ProjectedPoint>& points) {
    std::vector<const ProjectedPoint*> ordered;
    ordered.reserve(points.size());
    for (const auto& p : points) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(),
              [](const ProjectedPoint* l, const ProjectedPoint* r) { return l->id < r->id; });
    return ordered;
}

std::unordered_map<EntityId, std::string> label_map(
    const std::vector<std::pair<EntityId, std::string>>& labels) {
    std::unordered_map<EntityId, std::string> m;
    for (const auto& [id, label] : labels) m[id] = label;
    return m;
}

}  // namespace

void emit_scatter_csv(const std::vector<ProjectedPoint>& points,
                      const std::vector<std::pair<EntityId, std::string>>& labels,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const auto lmap = label_map(labels);
    out << "id,x,y,label\n";
    for (const auto* p : sorted_by_id(points)) {
        if (!std::isfinite(p->coords[0]) || !std::isfinite(p->coords[1])) {
            throw ValidationError("emit_scatter_csv: non-finite coordinate for '" + p->id + "'");
        }
        auto it = lmap.find(p->id);
        out << p->id << ',' << fmt_double(p->coords[0]) << ',' << fmt_double(p->coords[1]) << ','
            << (it == lmap.end() ? std::string() : it->second) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void emit_scatter_svg(const std::vector<ProjectedPoint>& points,
                      const std::vector<std::pair<EntityId, std::string>>& labels,
                      const std::string& path, int width, int height) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const auto lmap = label_map(labels);
    const auto ordered = sorted_by_id(points);

    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    bool first = true;
    for (const auto* p : ordered) {
        if (!std::isfinite(p->coords[0]) || !std::isfinite(p->coords[1])) {
            throw ValidationError("emit_scatter_svg: non-finite coordinate for '" + p->id + "'");
        }
        if (first) {
            min_x = max_x = p->coords[0];
            min_y = max_y = p->coords[1];
            first = false;
        } else {
            min_x = std::min(min_x, p->coords[0]);
            max_x = std::max(max_x, p->coords[0]);
            min_y = std::min(min_y, p->coords[1]);
            max_y = std::max(max_y, p->coords[1]);
        }
    }
    const double margin = 50.0;
    auto scale = [&](double v, double lo, double hi, double px) {
        if (hi == lo) return margin + px / 2.0;
        return margin + (v - lo) / (hi - lo) * px;
    };

    // classes in sorted order; empty classes never appear so the legend
    // lists exactly the labels present
    std::map<std::string, std::size_t> classes;
    for (const auto* p : ordered) {
        auto it = lmap.find(p->id);
        const std::string& label = it == lmap.end() ? std::string() : it->second;
        classes.emplace(label, classes.size());
    }
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    auto color_of = [&](const std::string& label) {
        return kPalette[classes.at(label) % 8];
    };

    const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-size=\"14\">component 1</text>\n";
    out << "  <text x=\"15\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"14\""
        << " transform=\"rotate(-90 15 " << height / 2 << ")\">component 2</text>\n";
    for (const auto* p : ordered) {
        auto it = lmap.find(p->id);
        const std::string& label = it == lmap.end() ? std::string() : it->second;
        const double cx = scale(p->coords[0], min_x, max_x, plot_w);
        const double cy = height - scale(p->coords[1], min_y, max_y, plot_h);
        out << "  <circle cx=\"" << fmt_double(cx) << "\" cy=\"" << fmt_double(cy)
            << "\" r=\"3\" fill=\"" << color_of(label) << "\" fill-opacity=\"0.7\"><title>"
            << p->id << "</title></circle>\n";
    }
    int legend_y = 20;
    for (const auto& [label, idx] : classes) {
        if (label.empty()) continue;
        out << "  <circle cx=\"" << width - 130 << "\" cy=\"" << legend_y - 4
            << "\" r=\"4\" fill=\"" << kPalette[idx % 8] << "\"/>\n";
        out << "  <text x=\"" << width - 120 << "\" y=\"" << legend_y
            << "\" font-size=\"12\">" << label << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace aab
