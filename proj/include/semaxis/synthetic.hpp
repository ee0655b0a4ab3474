#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semaxis/axis_builder.hpp"
#include "semaxis/linalg.hpp"
#include "semaxis/survey.hpp"

namespace semaxis {

/// Shared-factor world: every axis direction, every word feature and every
/// survey rating is driven by the same few latent factors, so the geometry
/// the pipeline should recover is known in closed form.
struct SyntheticWorldSpec {
    std::size_t n_words = 360;
    std::size_t n_axes = 32;
    std::size_t n_factors = 3;
    std::size_t dim = 64;
    std::size_t pairs_per_axis = 10;
    double noise_sigma = 0.2;
    /// Make the word factor scores exactly centered with identity sample
    /// covariance, so survey correlations equal the planted Gram matrix
    /// at finite n when noise_sigma = 0.
    bool whiten_scores = true;
    std::size_t layer = 0;
    std::uint64_t seed = 0;
};

void validate(const SyntheticWorldSpec& spec);

struct SyntheticGroundTruth {
    DenseMatrix loadings;            // axes x factors, unit rows
    DenseMatrix factor_directions;   // factors x dim, orthonormal rows
    DenseMatrix word_scores;         // words x factors
    DenseMatrix axis_vectors;        // axes x dim, loadings * directions + noise
    DenseMatrix planted_cosines;     // loadings * loadings^T
    double common_share = 1.0;       // 1 / (1 + sigma^2)
};

struct SyntheticWorld {
    SurveyTable survey;
    std::vector<WordFeature> word_features;  // survey words, in order
    std::vector<WordFeature> pair_features;  // every antonym-pair word
    std::vector<AntonymPairSet> axis_config;
    std::vector<SemanticAxis> axes;          // planted axis vectors
    SyntheticGroundTruth truth;
};

/// Axis j is named "pNN-nNN"; its pairs are (pNN, nNN), (pNN_1, nNN_1), ...
/// Words are "w000", "w001", .... Feature values are rounded to f32 so they
/// survive a SAXD round trip unchanged.
SyntheticWorld generate_synthetic_world(const SyntheticWorldSpec& spec);

}  // namespace semaxis
