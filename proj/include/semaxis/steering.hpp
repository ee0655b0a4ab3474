#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semaxis/axis_builder.hpp"
#include "semaxis/geometry.hpp"
#include "semaxis/toy_model.hpp"

namespace semaxis {

/// Where the two answer logits are read.
/// final_token: the last prompt position (the forced-choice slot).
/// last_word_token: the last token of the rated word's second occurrence;
/// with no blocks between hook and readout this makes the readout linear in
/// the steered residual, which is what the exactness laws are stated for.
enum class ReadoutSite { final_token, last_word_token };

struct ForcedChoicePrompt {
    std::string word;
    std::string pos_antonym;
    std::string neg_antonym;
    std::string text;
    std::vector<toy::TokenId> tokens;
    std::vector<std::size_t> word_positions;  // every token of both occurrences
    std::size_t answer_position = 0;
    toy::TokenId pos_token_id = 0;
    toy::TokenId neg_token_id = 0;
};

std::string forced_choice_text(std::string_view word, std::string_view pos,
                               std::string_view neg);

/// Throws out-of-vocabulary, invalid-input when pos == neg or their first
/// tokens coincide, and not-found unless the word occurs exactly twice.
ForcedChoicePrompt render_prompt(const toy::Vocabulary& vocab, const std::string& word,
                                 const std::string& pos, const std::string& neg);

/// 1 / (1 + exp(-x)) without overflow for either sign.
double sigmoid(double x);

struct ChoiceOutcome {
    double logit_pos = 0.0;
    double logit_neg = 0.0;
    double logit_diff = 0.0;  // logit_pos - logit_neg, the log-odds
    double p_pos = 0.5;
    double p_neg = 0.5;
};

ChoiceOutcome forced_choice(const toy::Model& model, const ForcedChoicePrompt& prompt,
                            std::span<const toy::HookSpec> hooks = {},
                            ReadoutSite site = ReadoutSite::final_token);

struct TrialResult {
    std::string word;
    std::string target_axis;
    int direction = 1;
    std::string measured_axis;
    double p_base = 0.5;
    double p_steered = 0.5;
    double logit_diff_base = 0.0;
    double logit_diff_steered = 0.0;
};

struct TrialFailure {
    std::string word;
    std::string measured_axis;
    std::string reason;
};

enum class Units { probability, log_odds };

std::string_view to_string(Units units) noexcept;
Units parse_units(std::string_view s);

/// Rows are steered (target) axes, columns measured axes. A cell is the mean
/// over words and both directions of the sign-adjusted change; cells with no
/// successful trial hold 0 and count 0.
struct SpilloverMatrix {
    std::vector<std::string> labels;
    DenseMatrix probability;
    DenseMatrix log_odds;
    std::vector<std::size_t> counts;  // row-major, labels x labels

    const DenseMatrix& values(Units units) const {
        return units == Units::probability ? probability : log_odds;
    }
    std::size_t count(std::size_t target, std::size_t measured) const {
        return counts[target * labels.size() + measured];
    }
};

struct SpilloverOptions {
    double alpha = 0.33;
    std::size_t layer = 0;
    ReadoutSite site = ReadoutSite::final_token;
    unsigned threads = 0;
};

struct SpilloverRun {
    SpilloverMatrix matrix;
    std::vector<TrialResult> trials;  // word, measured, target, direction order
    std::vector<TrialFailure> failures;
};

/// Every axis is both steered (along its unit vector) and measured (by its
/// pole tokens). The steering vector is added at the word's positions only.
/// Failing (word, measured axis) prompts are recorded and skipped.
SpilloverRun run_spillover(const toy::Model& model, std::span<const std::string> words,
                           std::span<const SemanticAxis> axes, const SpilloverOptions& options);

/// Mean of the sign-adjusted deltas of one cell's trials, as run_spillover
/// aggregates them.
double aggregate_cell(std::span<const TrialResult> trials, Units units);

struct SpilloverPoint {
    std::string target;
    std::string measured;
    double cosine = 0.0;
    double spillover = 0.0;
};

struct SpilloverScatter {
    double r = 0.0;
    std::vector<SpilloverPoint> points;  // ordered off-diagonal pairs
};

/// Throws undefined-correlation when all spillover values are equal (e.g. a
/// zero-alpha run) and label-mismatch when the label lists differ.
SpilloverScatter spillover_vs_cosine(const SpilloverMatrix& matrix,
                                     const PairwiseMatrix& cosines, Units units);

struct TargetSummary {
    std::string axis;
    double on_target = 0.0;          // diagonal cell
    double max_off_target = 0.0;     // largest |off-diagonal| in the column
    std::string max_off_target_axis;
};

std::vector<TargetSummary> on_off_target_summary(const SpilloverMatrix& matrix,
                                                 Units units = Units::probability);

}  // namespace semaxis
