#include "semaxis/geometry.hpp"

#include <algorithm>
#include <map>

#include "semaxis/error.hpp"
#include "semaxis/kernels.hpp"

namespace semaxis {

namespace {

// index of each `wanted` label in `have`, or a label-mismatch error naming
// every unmatched label on both sides
std::vector<std::size_t> match_labels(const std::vector<std::string>& wanted,
                                      const std::vector<std::string>& have,
                                      const std::string& what) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < have.size(); ++i) index.emplace(normalize_label(have[i]), i);
    std::vector<std::size_t> out;
    std::vector<bool> used(have.size(), false);
    std::string missing;
    for (const auto& w : wanted) {
        const auto it = index.find(normalize_label(w));
        if (it == index.end() || used[it->second]) {
            missing += (missing.empty() ? "" : ", ") + w;
            continue;
        }
        used[it->second] = true;
        out.push_back(it->second);
    }
    std::string extra;
    for (std::size_t i = 0; i < have.size(); ++i)
        if (!used[i]) extra += (extra.empty() ? "" : ", ") + have[i];
    if (!missing.empty() || !extra.empty()) {
        std::string msg = what + " labels do not match";
        if (!missing.empty()) msg += "; missing from survey: " + missing;
        if (!extra.empty()) msg += "; only in survey: " + extra;
        fail(ErrorKind::label_mismatch, msg);
    }
    return out;
}

void require_same_labels(const std::vector<std::string>& a, const std::vector<std::string>& b,
                         const std::string& what) {
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
        same = normalize_label(a[i]) == normalize_label(b[i]);
    require(same, ErrorKind::label_mismatch, what + ": label lists differ in names or order");
}

DenseMatrix raw_axis_matrix(std::span<const SemanticAxis> axes) {
    const std::size_t d = axes.front().vector.size();
    DenseMatrix m(d, axes.size());
    for (std::size_t j = 0; j < axes.size(); ++j)
        for (std::size_t c = 0; c < d; ++c) m(c, j) = axes[j].vector[c];
    return m;
}

}  // namespace

std::string_view to_string(PairwiseKind kind) noexcept {
    switch (kind) {
        case PairwiseKind::survey_correlation: return "survey_correlation";
        case PairwiseKind::projection_correlation: return "projection_correlation";
        case PairwiseKind::axis_cosine: return "axis_cosine";
    }
    return "unknown";
}

ProjectionTable project(std::span<const WordFeature> features,
                        std::span<const SemanticAxis> axes) {
    require(!features.empty() && !axes.empty(), ErrorKind::invalid_input,
            "project: need at least one feature and one axis");
    const std::size_t d = axes.front().unit_vector.size();
    ProjectionTable t;
    t.values = DenseMatrix(features.size(), axes.size());
    for (const auto& a : axes) {
        require(a.unit_vector.size() == d, ErrorKind::invalid_input,
                "project: axis '" + a.axis_name + "' has dim " +
                    std::to_string(a.unit_vector.size()) + ", expected " + std::to_string(d));
        t.axes.push_back(a.axis_name);
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        require(features[i].vector.size() == d, ErrorKind::invalid_input,
                "project: feature '" + features[i].word + "' has dim " +
                    std::to_string(features[i].vector.size()) + ", expected " +
                    std::to_string(d));
        t.words.push_back(features[i].word);
        for (std::size_t j = 0; j < axes.size(); ++j)
            t.values(i, j) = kernels::dot(features[i].vector, axes[j].unit_vector);
    }
    return t;
}

DenseMatrix align_survey(const ProjectionTable& proj, const SurveyTable& survey) {
    const auto rows = match_labels(proj.words, survey.words, "word");
    const auto cols = match_labels(proj.axes, survey.scales, "axis/scale");
    DenseMatrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = survey.ratings(rows[i], cols[j]);
    return out;
}

Vector projection_survey_correlations(const ProjectionTable& proj, const SurveyTable& survey) {
    const DenseMatrix s = align_survey(proj, survey);
    Vector r(proj.axes.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = pearson(proj.values.column(j), s.column(j));
    return r;
}

DenseMatrix column_correlations(const DenseMatrix& m) {
    const std::size_t p = m.cols();
    std::vector<Vector> cols(p);
    for (std::size_t j = 0; j < p; ++j) cols[j] = m.column(j);
    DenseMatrix out = DenseMatrix::identity(p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) out(i, j) = out(j, i) = pearson(cols[i], cols[j]);
    return out;
}

PairwiseSet pairwise_matrices(const ProjectionTable& proj, const SurveyTable& survey,
                              std::span<const SemanticAxis> axes) {
    std::vector<std::string> names;
    for (const auto& a : axes) names.push_back(a.axis_name);
    require_same_labels(proj.axes, names, "pairwise_matrices");

    PairwiseSet out;
    out.survey = {proj.axes, column_correlations(align_survey(proj, survey)),
                  PairwiseKind::survey_correlation};
    out.projection = {proj.axes, column_correlations(proj.values),
                      PairwiseKind::projection_correlation};
    DenseMatrix cos = DenseMatrix::identity(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i)
        for (std::size_t j = i + 1; j < axes.size(); ++j)
            cos(i, j) = cos(j, i) = cosine_similarity(axes[i].vector, axes[j].vector);
    out.cosine = {proj.axes, std::move(cos), PairwiseKind::axis_cosine};
    return out;
}

StructureAlignment structure_alignment(const PairwiseMatrix& m1, const PairwiseMatrix& m2) {
    require_same_labels(m1.labels, m2.labels, "structure_alignment");
    const std::size_t p = m1.labels.size();
    require(m1.values.rows() == p && m2.values.rows() == p, ErrorKind::invalid_input,
            "structure_alignment: matrix size does not match its labels");
    StructureAlignment out;
    Vector x, y;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            out.pairs.push_back({m1.labels[i], m1.labels[j], m1.values(i, j), m2.values(i, j)});
            x.push_back(m1.values(i, j));
            y.push_back(m2.values(i, j));
        }
    out.r = pearson(x, y);
    return out;
}

SubspaceReport subspace_analysis(const ProjectionTable& proj, const SurveyTable& survey,
                                 std::span<const SemanticAxis> axes, LlmSubspace llm,
                                 std::size_t components) {
    std::vector<std::string> names;
    for (const auto& a : axes) names.push_back(a.axis_name);
    require_same_labels(proj.axes, names, "subspace_analysis");
    const std::size_t p = axes.size();
    const std::size_t n = proj.words.size();
    const std::size_t d = axes.front().vector.size();
    require(n >= 4 && d >= 4, ErrorKind::invalid_input,
            "subspace_analysis: need at least 4 words and 4 dimensions");
    require(components >= 1 && components <= std::min({p, n - 1, d - 1}),
            ErrorKind::invalid_input, "subspace_analysis: too many components requested");

    const DenseMatrix s = align_survey(proj, survey);
    const PcaResult survey_pca = pca(s, std::min(n - 1, p), Preprocessing::standardize);
    const PcaResult proj_pca = pca(proj.values, std::min(n - 1, p), Preprocessing::standardize);
    const PcaResult raw_pca = pca(raw_axis_matrix(axes), std::min(d - 1, p), Preprocessing::center);

    SubspaceReport out;
    out.labels = proj.axes;
    out.llm_subspace = llm;
    out.scree_survey = survey_pca.explained_ratio;
    out.scree_projections = proj_pca.explained_ratio;
    out.scree_raw_axes = raw_pca.explained_ratio;
    out.survey_loadings = survey_pca.loadings.select_columns(0, components);
    out.llm_loadings = (llm == LlmSubspace::raw_axes ? raw_pca : proj_pca)
                           .loadings.select_columns(0, components);
    out.cca = cca(out.survey_loadings, out.llm_loadings, components);
    for (std::size_t k = 0; k < components; ++k)
        out.unrotated_loading_correlations.push_back(
            pearson(out.survey_loadings.column(k), out.llm_loadings.column(k)));
    return out;
}

}  // namespace semaxis
