#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "semaxis/axis_builder.hpp"
#include "semaxis/linalg.hpp"
#include "semaxis/survey.hpp"

namespace semaxis {

/// values(i, j) = dot(feature_i, unit_axis_j).
struct ProjectionTable {
    std::vector<std::string> words;
    std::vector<std::string> axes;
    DenseMatrix values;  // words x axes
};

ProjectionTable project(std::span<const WordFeature> features,
                        std::span<const SemanticAxis> axes);

enum class PairwiseKind { survey_correlation, projection_correlation, axis_cosine };

std::string_view to_string(PairwiseKind kind) noexcept;

/// Symmetric by construction with a unit diagonal.
struct PairwiseMatrix {
    std::vector<std::string> labels;
    DenseMatrix values;
    PairwiseKind kind = PairwiseKind::axis_cosine;
};

/// The survey reordered to the projection table's words and axes. Labels are
/// matched after trimming and lowercasing; anything unmatched on either side
/// is a label-mismatch error listing every name.
DenseMatrix align_survey(const ProjectionTable& proj, const SurveyTable& survey);

/// Pearson r between each projection column and its survey scale.
Vector projection_survey_correlations(const ProjectionTable& proj, const SurveyTable& survey);

struct PairwiseSet {
    PairwiseMatrix survey;
    PairwiseMatrix projection;
    PairwiseMatrix cosine;
};

/// Pearson correlation of every pair of columns, as a symmetric matrix.
DenseMatrix column_correlations(const DenseMatrix& m);

PairwiseSet pairwise_matrices(const ProjectionTable& proj, const SurveyTable& survey,
                              std::span<const SemanticAxis> axes);

struct PairRecord {
    std::string first;
    std::string second;
    double x = 0.0;  // entry of the first matrix
    double y = 0.0;  // entry of the second matrix
};

struct StructureAlignment {
    double r = 0.0;
    std::vector<PairRecord> pairs;  // strict upper triangle, row-major
};

StructureAlignment structure_alignment(const PairwiseMatrix& m1, const PairwiseMatrix& m2);

enum class LlmSubspace { raw_axes, projections };

struct SubspaceReport {
    std::vector<std::string> labels;  // axes, in projection order
    Vector scree_survey;
    Vector scree_projections;
    Vector scree_raw_axes;
    DenseMatrix survey_loadings;  // axes x components
    DenseMatrix llm_loadings;     // axes x components
    CcaResult cca;
    Vector unrotated_loading_correlations;
    LlmSubspace llm_subspace = LlmSubspace::raw_axes;
};

/// PCA of the survey and of the projections (both standardized) and of the
/// raw axis vectors (dims as observations, centered only); CCA between the
/// survey loadings and the chosen LLM-side loadings, with the axes as
/// observations.
SubspaceReport subspace_analysis(const ProjectionTable& proj, const SurveyTable& survey,
                                 std::span<const SemanticAxis> axes,
                                 LlmSubspace llm = LlmSubspace::raw_axes,
                                 std::size_t components = 3);

}  // namespace semaxis
