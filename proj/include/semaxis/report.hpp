#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semaxis/geometry.hpp"
#include "semaxis/linalg.hpp"
#include "semaxis/steering.hpp"

namespace semaxis::report {

/// %.17g: enough digits to read every double back exactly.
std::string format_double(double x);

// --- CSV -------------------------------------------------------------------

std::string matrix_csv(const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels, const DenseMatrix& m,
                       const std::string& corner = "");
std::string projection_csv(const ProjectionTable& proj);
std::string axis_values_csv(const std::vector<std::string>& axes, const Vector& values,
                            const std::string& column);
std::string pairs_csv(const StructureAlignment& a, const std::string& x_name,
                      const std::string& y_name);
std::string scree_csv(const SubspaceReport& r);
std::string loadings_csv(const SubspaceReport& r);
std::string trials_csv(const std::vector<TrialResult>& trials);
std::string failures_csv(const std::vector<TrialFailure>& failures);
std::string spillover_csv(const SpilloverMatrix& m, Units units);
std::string scatter_csv(const SpilloverScatter& s);
std::string summary_csv(const std::vector<TargetSummary>& s);

// --- JSON ------------------------------------------------------------------

nlohmann::json to_json(const DenseMatrix& m);
nlohmann::json to_json(const StructureAlignment& a);
nlohmann::json to_json(const SubspaceReport& r);
nlohmann::json to_json(const SpilloverScatter& s);
nlohmann::json to_json(const std::vector<TargetSummary>& s);

// --- SVG -------------------------------------------------------------------

inline constexpr double kSvgWidth = 640;
inline constexpr double kSvgHeight = 480;
inline constexpr double kMarginLeft = 70;
inline constexpr double kMarginRight = 20;
inline constexpr double kMarginTop = 40;
inline constexpr double kMarginBottom = 60;

/// Affine map from data to pixel coordinates. A degenerate range is widened
/// by 0.5 on each side.
struct PlotFrame {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

    static PlotFrame fit(const std::vector<double>& xs, const std::vector<double>& ys);

    double left() const { return kMarginLeft; }
    double bottom() const { return kSvgHeight - kMarginBottom; }
    double width() const { return kSvgWidth - kMarginLeft - kMarginRight; }
    double height() const { return kSvgHeight - kMarginTop - kMarginBottom; }
    double x(double v) const { return left() + (v - xmin) / (xmax - xmin) * width(); }
    double y(double v) const { return bottom() - (v - ymin) / (ymax - ymin) * height(); }
};

struct Svg {
    std::string text;
    std::vector<std::string> warnings;
};

struct ScatterSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::pair<double, double>> points;
    std::optional<double> r;  // annotated when present
};

Svg scatter_svg(const ScatterSpec& spec);

/// One polyline per named curve, x = component index (1-based).
Svg scree_svg(const std::string& title,
              const std::vector<std::pair<std::string, Vector>>& curves);

Svg bar_svg(const std::string& title, const std::string& y_label,
            const std::vector<std::string>& labels, const Vector& values);

}  // namespace semaxis::report
