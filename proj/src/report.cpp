#include "semaxis/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace semaxis::report {

namespace {

using nlohmann::json;

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string px(double v) { return fmt("%.2f", v); }

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

json vec_json(const Vector& v) { return json(v); }

class SvgWriter {
public:
    explicit SvgWriter(const std::string& title) {
        out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px0(kSvgWidth) +
               "\" height=\"" + px0(kSvgHeight) + "\" viewBox=\"0 0 " + px0(kSvgWidth) + " " +
               px0(kSvgHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(kSvgWidth / 2, 22, title, "middle", 15);
    }

    void frame(const PlotFrame& f, const std::string& x_label, const std::string& y_label) {
        out_ += "<rect x=\"" + px(f.left()) + "\" y=\"" + px(f.bottom() - f.height()) +
                "\" width=\"" + px(f.width()) + "\" height=\"" + px(f.height()) +
                "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double xv = f.xmin + (f.xmax - f.xmin) * i / 4.0;
            const double yv = f.ymin + (f.ymax - f.ymin) * i / 4.0;
            text(f.x(xv), f.bottom() + 16, fmt("%.3g", xv), "middle", 11);
            text(f.left() - 6, f.y(yv) + 4, fmt("%.3g", yv), "end", 11);
        }
        text(f.left() + f.width() / 2, kSvgHeight - 18, x_label, "middle", 12);
        out_ += "<text x=\"16\" y=\"" + px(f.bottom() - f.height() / 2) +
                "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
                px(f.bottom() - f.height() / 2) + ")\">" + escape_xml(y_label) + "</text>\n";
    }

    void text(double x, double y, const std::string& s, const char* anchor, int size) {
        out_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor +
                "\" font-size=\"" + std::to_string(size) + "\">" + escape_xml(s) + "</text>\n";
    }

    void raw(const std::string& s) { out_ += s; }

    std::string finish() { return out_ + "</svg>\n"; }

private:
    static std::string px0(double v) { return fmt("%.0f", v); }
    std::string out_;
};

}  // namespace

std::string format_double(double x) { return fmt("%.17g", x); }

// --- CSV -------------------------------------------------------------------

std::string matrix_csv(const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels, const DenseMatrix& m,
                       const std::string& corner) {
    std::string out = csv_cell(corner);
    for (const auto& c : col_labels) out += "," + csv_cell(c);
    out += "\n";
    for (std::size_t i = 0; i < row_labels.size(); ++i) {
        out += csv_cell(row_labels[i]);
        for (std::size_t j = 0; j < col_labels.size(); ++j) out += "," + format_double(m(i, j));
        out += "\n";
    }
    return out;
}

std::string projection_csv(const ProjectionTable& proj) {
    return matrix_csv(proj.words, proj.axes, proj.values, "word");
}

std::string axis_values_csv(const std::vector<std::string>& axes, const Vector& values,
                            const std::string& column) {
    std::string out = "axis," + csv_cell(column) + "\n";
    for (std::size_t i = 0; i < axes.size(); ++i)
        out += csv_cell(axes[i]) + "," + format_double(values[i]) + "\n";
    return out;
}

std::string pairs_csv(const StructureAlignment& a, const std::string& x_name,
                      const std::string& y_name) {
    std::string out = "axis_a,axis_b," + csv_cell(x_name) + "," + csv_cell(y_name) + "\n";
    for (const auto& p : a.pairs)
        out += csv_cell(p.first) + "," + csv_cell(p.second) + "," + format_double(p.x) + "," +
               format_double(p.y) + "\n";
    return out;
}

std::string scree_csv(const SubspaceReport& r) {
    const std::size_t n =
        std::max({r.scree_survey.size(), r.scree_projections.size(), r.scree_raw_axes.size()});
    auto cell = [](const Vector& v, std::size_t i) {
        return i < v.size() ? format_double(v[i]) : std::string();
    };
    std::string out = "component,survey,projections,raw_axes\n";
    for (std::size_t i = 0; i < n; ++i)
        out += std::to_string(i + 1) + "," + cell(r.scree_survey, i) + "," +
               cell(r.scree_projections, i) + "," + cell(r.scree_raw_axes, i) + "\n";
    return out;
}

std::string loadings_csv(const SubspaceReport& r) {
    const std::size_t k = r.survey_loadings.cols();
    std::string out = "axis";
    for (std::size_t c = 0; c < k; ++c) out += ",survey_pc" + std::to_string(c + 1);
    for (std::size_t c = 0; c < k; ++c) out += ",llm_pc" + std::to_string(c + 1);
    for (std::size_t c = 0; c < k; ++c) out += ",survey_cv" + std::to_string(c + 1);
    for (std::size_t c = 0; c < k; ++c) out += ",llm_cv" + std::to_string(c + 1);
    out += "\n";
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        out += csv_cell(r.labels[i]);
        for (const DenseMatrix* m :
             {&r.survey_loadings, &r.llm_loadings, &r.cca.x_scores, &r.cca.y_scores})
            for (std::size_t c = 0; c < k; ++c) out += "," + format_double((*m)(i, c));
        out += "\n";
    }
    return out;
}

std::string trials_csv(const std::vector<TrialResult>& trials) {
    std::string out =
        "word,target_axis,direction,measured_axis,p_base,p_steered,logit_diff_base,"
        "logit_diff_steered\n";
    for (const auto& t : trials)
        out += csv_cell(t.word) + "," + csv_cell(t.target_axis) + "," +
               std::to_string(t.direction) + "," + csv_cell(t.measured_axis) + "," +
               format_double(t.p_base) + "," + format_double(t.p_steered) + "," +
               format_double(t.logit_diff_base) + "," + format_double(t.logit_diff_steered) +
               "\n";
    return out;
}

std::string failures_csv(const std::vector<TrialFailure>& failures) {
    std::string out = "word,measured_axis,reason\n";
    for (const auto& f : failures)
        out += csv_cell(f.word) + "," + csv_cell(f.measured_axis) + "," + csv_cell(f.reason) +
               "\n";
    return out;
}

std::string spillover_csv(const SpilloverMatrix& m, Units units) {
    return matrix_csv(m.labels, m.labels, m.values(units), "target\\measured");
}

std::string scatter_csv(const SpilloverScatter& s) {
    std::string out = "target,measured,cosine,spillover\n";
    for (const auto& p : s.points)
        out += csv_cell(p.target) + "," + csv_cell(p.measured) + "," + format_double(p.cosine) +
               "," + format_double(p.spillover) + "\n";
    return out;
}

std::string summary_csv(const std::vector<TargetSummary>& s) {
    std::string out = "axis,on_target,max_off_target,max_off_target_axis\n";
    for (const auto& t : s)
        out += csv_cell(t.axis) + "," + format_double(t.on_target) + "," +
               format_double(t.max_off_target) + "," + csv_cell(t.max_off_target_axis) + "\n";
    return out;
}

// --- JSON ------------------------------------------------------------------

json to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(Vector(r.begin(), r.end()));
    }
    return rows;
}

json to_json(const StructureAlignment& a) {
    json pairs = json::array();
    for (const auto& p : a.pairs) pairs.push_back({p.first, p.second, p.x, p.y});
    return {{"r", a.r}, {"pairs", pairs}};
}

json to_json(const SubspaceReport& r) {
    return {{"labels", r.labels},
            {"llm_subspace", r.llm_subspace == LlmSubspace::raw_axes ? "raw_axes" : "projections"},
            {"scree_survey", vec_json(r.scree_survey)},
            {"scree_projections", vec_json(r.scree_projections)},
            {"scree_raw_axes", vec_json(r.scree_raw_axes)},
            {"survey_loadings", to_json(r.survey_loadings)},
            {"llm_loadings", to_json(r.llm_loadings)},
            {"cca_correlations", vec_json(r.cca.correlations)},
            {"cca_survey_scores", to_json(r.cca.x_scores)},
            {"cca_llm_scores", to_json(r.cca.y_scores)},
            {"unrotated_loading_correlations", vec_json(r.unrotated_loading_correlations)}};
}

json to_json(const SpilloverScatter& s) {
    json points = json::array();
    for (const auto& p : s.points) points.push_back({p.target, p.measured, p.cosine, p.spillover});
    return {{"r", s.r}, {"points", points}};
}

json to_json(const std::vector<TargetSummary>& s) {
    json out = json::array();
    for (const auto& t : s)
        out.push_back({{"axis", t.axis},
                       {"on_target", t.on_target},
                       {"max_off_target", t.max_off_target},
                       {"max_off_target_axis", t.max_off_target_axis}});
    return out;
}

// --- SVG -------------------------------------------------------------------

PlotFrame PlotFrame::fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    PlotFrame f;
    auto range = [](const std::vector<double>& v, double& lo, double& hi) {
        if (v.empty()) {
            lo = 0.0;
            hi = 1.0;
            return;
        }
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        lo = *mn;
        hi = *mx;
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    };
    range(xs, f.xmin, f.xmax);
    range(ys, f.ymin, f.ymax);
    return f;
}

Svg scatter_svg(const ScatterSpec& spec) {
    Svg out;
    std::vector<double> xs, ys;
    for (const auto& [x, y] : spec.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            out.warnings.push_back("scatter '" + spec.title + "': skipped a non-finite point");
            continue;
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    const PlotFrame f = PlotFrame::fit(xs, ys);
    SvgWriter w(spec.title);
    w.frame(f, spec.x_label, spec.y_label);
    if (xs.empty()) {
        out.warnings.push_back("scatter '" + spec.title + "': no data points");
        w.text(f.left() + f.width() / 2, f.bottom() - f.height() / 2, "no data", "middle", 14);
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        w.raw("<circle cx=\"" + px(f.x(xs[i])) + "\" cy=\"" + px(f.y(ys[i])) +
              "\" r=\"3\" fill=\"" + kPalette[0] + "\" fill-opacity=\"0.7\"/>\n");
    if (spec.r)
        w.text(f.left() + 8, f.bottom() - f.height() + 16, "r = " + fmt("%.3f", *spec.r),
               "start", 13);
    out.text = w.finish();
    return out;
}

Svg scree_svg(const std::string& title,
              const std::vector<std::pair<std::string, Vector>>& curves) {
    Svg out;
    std::vector<double> xs, ys;
    for (const auto& [name, v] : curves)
        for (std::size_t i = 0; i < v.size(); ++i) {
            xs.push_back(static_cast<double>(i + 1));
            ys.push_back(v[i]);
        }
    if (!ys.empty()) ys.push_back(0.0);
    const PlotFrame f = PlotFrame::fit(xs, ys);
    SvgWriter w(title);
    w.frame(f, "component", "explained variance ratio");
    if (xs.empty()) {
        out.warnings.push_back("scree '" + title + "': no data");
        w.text(f.left() + f.width() / 2, f.bottom() - f.height() / 2, "no data", "middle", 14);
    }
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& [name, v] = curves[c];
        const char* color = kPalette[c % std::size(kPalette)];
        std::string pts;
        for (std::size_t i = 0; i < v.size(); ++i)
            pts += (i ? " " : "") + px(f.x(static_cast<double>(i + 1))) + "," + px(f.y(v[i]));
        w.raw("<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
              "\" stroke-width=\"1.5\"/>\n");
        w.text(f.left() + f.width() - 8, f.bottom() - f.height() + 16 + 16.0 * c, name, "end",
               12);
    }
    out.text = w.finish();
    return out;
}

Svg bar_svg(const std::string& title, const std::string& y_label,
            const std::vector<std::string>& labels, const Vector& values) {
    Svg out;
    std::vector<double> ys(values.begin(), values.end());
    ys.push_back(0.0);
    const std::vector<double> xs = {0.0, static_cast<double>(std::max<std::size_t>(values.size(), 1))};
    const PlotFrame f = PlotFrame::fit(xs, ys);
    SvgWriter w(title);
    w.frame(f, "", y_label);
    if (values.empty()) {
        out.warnings.push_back("bar chart '" + title + "': no data");
        w.text(f.left() + f.width() / 2, f.bottom() - f.height() / 2, "no data", "middle", 14);
    }
    const double slot = f.width() / static_cast<double>(std::max<std::size_t>(values.size(), 1));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double y0 = f.y(0.0), y1 = f.y(values[i]);
        const double x = f.left() + slot * static_cast<double>(i) + 0.1 * slot;
        w.raw("<rect x=\"" + px(x) + "\" y=\"" + px(std::min(y0, y1)) + "\" width=\"" +
              px(0.8 * slot) + "\" height=\"" + px(std::abs(y1 - y0)) + "\" fill=\"" +
              kPalette[0] + "\"/>\n");
        const double lx = x + 0.4 * slot, ly = f.bottom() + 12;
        w.raw("<text x=\"" + px(lx) + "\" y=\"" + px(ly) +
              "\" text-anchor=\"end\" font-size=\"9\" transform=\"rotate(-60 " + px(lx) + " " +
              px(ly) + ")\">" + escape_xml(i < labels.size() ? labels[i] : "") + "</text>\n");
    }
    out.text = w.finish();
    return out;
}

}  // namespace semaxis::report
