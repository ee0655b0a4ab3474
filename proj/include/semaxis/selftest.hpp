#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semaxis/axis_builder.hpp"
#include "semaxis/steering.hpp"
#include "semaxis/toy_model.hpp"

namespace semaxis {

/// A toy model whose pole-token unembedding rows are planted unit directions,
/// plus the matching axes (steering direction = planted readout direction).
struct PlantedSteeringSpec {
    std::uint64_t seed = 0;
    std::size_t n_axes = 6;
    std::size_t n_words = 8;
    std::size_t d_model = 32;
    std::size_t n_layers = 0;
    std::size_t n_heads = 4;
    toy::FinalNorm final_norm = toy::FinalNorm::identity;
    double readout_norm = 1.0;
    std::optional<DenseMatrix> cosines;  // default: random, rank 3, |cos| <= 0.8
    std::size_t cosine_rank = 3;
    double max_abs_cosine = 0.8;
};

struct PlantedSteeringWorld {
    toy::Model model;
    std::vector<std::string> words;
    std::vector<SemanticAxis> axes;
    DenseMatrix cosines;  // realized cosines of the planted directions
};

/// Words are "w0", "w1", ...; axis i has poles "p<i>"/"n<i>" and is named
/// "p<i>-n<i>".
PlantedSteeringWorld make_planted_steering_world(const PlantedSteeringSpec& spec);

struct LawCheck {
    std::string name;
    bool pass = false;
    double worst = 0.0;     // largest deviation seen
    double tolerance = 0.0;
};

/// Linear-readout laws over `seeds` planted worlds (no blocks, identity final
/// norm, hook and readout on the residual stream at layer 0).
std::vector<LawCheck> linear_readout_selftest(std::size_t seeds, std::uint64_t first_seed = 1,
                                              double alpha = 0.33);

}  // namespace semaxis
