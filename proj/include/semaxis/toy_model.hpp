#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semaxis/linalg.hpp"

namespace semaxis::toy {

using TokenId = std::uint32_t;

// --- tokenizer -------------------------------------------------------------

/// Ordered, duplicate-free token list.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> tokens);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    std::optional<TokenId> find(std::string_view token) const;
    /// Throws out-of-vocabulary naming the token.
    TokenId id(std::string_view token) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_;
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

/// Word-level segmentation: whitespace separates segments and every ASCII
/// punctuation character is a segment of its own.
std::vector<std::string> segment(std::string_view text);

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab);
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

/// Vocabulary of every segment appearing in `texts`, in first-seen order.
Vocabulary build_vocabulary(std::span<const std::string> texts);

/// Index of every constituent token of every (non-overlapping)
/// occurrence of `word` in `tokens`, in order. Throws not-found when the word
/// never occurs.
std::vector<std::size_t> find_word_positions(std::span<const TokenId> tokens,
                                             std::span<const TokenId> word);

// --- configuration ---------------------------------------------------------

enum class FinalNorm { rms, identity };
enum class ReadoutMode { learned, planted };

struct PlantedAxis {
    std::string name;
    std::string pos_token;
    std::string neg_token;
    Vector direction;  // unit norm, d_model entries
};

/// Unembedding rows installed for the pole tokens of each axis so that the
/// readout geometry is known exactly.
struct PlantedReadout {
    std::vector<PlantedAxis> axes;
    DenseMatrix pairwise_cosines;  // declared target, axes x axes
    double readout_norm = 1.0;     // norm of each installed unembedding row
};

/// Builds unit directions in d_model space whose Gram matrix equals
/// `cosines` (which must be symmetric PSD with unit diagonal), embedded in a
/// seeded random orthonormal frame.
PlantedReadout make_planted_readout(const std::vector<std::string>& names,
                                    const std::vector<std::pair<std::string, std::string>>& poles,
                                    const DenseMatrix& cosines, std::size_t d_model,
                                    std::uint64_t seed, double readout_norm = 1.0);

/// Random valid cosine matrix: Gram matrix of unit vectors drawn in `rank`
/// dimensions, optionally shrunk towards the identity so |cos| <= max_abs.
DenseMatrix random_cosine_matrix(std::size_t n, std::size_t rank, std::uint64_t seed,
                                 double max_abs = 1.0);

struct ToyModelConfig {
    Vocabulary vocab;
    std::size_t d_model = 64;
    std::size_t n_layers = 4;
    std::size_t n_heads = 4;
    std::size_t max_seq = 128;
    std::uint64_t seed = 0;
    FinalNorm final_norm = FinalNorm::rms;
    ReadoutMode readout_mode = ReadoutMode::learned;
    std::optional<PlantedReadout> planted;
};

void validate(const ToyModelConfig& config);

// --- hooks and traces ------------------------------------------------------

enum class HookMode { capture, add };
enum class ScaleRule { absolute, norm_relative };

/// Layer 0 is the embedding output; layer i is the residual stream entering
/// block i; layer n_layers is the final residual before the output norm.
struct HookSpec {
    std::size_t layer = 0;
    std::vector<std::size_t> positions;
    HookMode mode = HookMode::capture;
    std::optional<Vector> vector;
    ScaleRule scale_rule = ScaleRule::norm_relative;
    double alpha = 0.0;

    static HookSpec capture(std::size_t layer, std::vector<std::size_t> positions) {
        return {layer, std::move(positions), HookMode::capture, std::nullopt,
                ScaleRule::absolute, 0.0};
    }
    static HookSpec steer(std::size_t layer, std::vector<std::size_t> positions, Vector direction,
                          double alpha) {
        return {layer, std::move(positions), HookMode::add, std::move(direction),
                ScaleRule::norm_relative, alpha};
    }
};

struct ForwardTrace {
    DenseMatrix logits;  // seq x vocab
    // (layer, position) -> residual after any add hooks at that layer
    std::map<std::pair<std::size_t, std::size_t>, Vector> captured;
};

// --- model -----------------------------------------------------------------

struct NamedTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

/// Pre-norm decoder-only transformer: RMS-normed attention with rotary
/// positions and a 4x SiLU MLP per block. Immutable after construction.
class Model {
public:
    /// Seeded initialization; every weight is uniform in +-1/sqrt(d_model)
    /// and representable as f32. Output projections start as the transpose of
    /// the matching input projection (W_o = W_v^T, W_down = W_up^T).
    explicit Model(ToyModelConfig config);

    const ToyModelConfig& config() const noexcept { return config_; }

    ForwardTrace forward(std::span<const TokenId> tokens,
                         std::span<const HookSpec> hooks = {}) const;

    std::vector<NamedTensor> tensors() const;
    /// Replaces weights from exported tensors (names and shapes must match).
    /// Planted unembedding rows are reinstalled afterwards.
    void load_tensors(const std::vector<NamedTensor>& tensors);

    std::span<const double> embedding_row(TokenId id) const;
    std::span<const double> unembedding_row(TokenId id) const;

    friend bool operator==(const Model& a, const Model& b) {
        return a.tensors_equal(b);
    }

private:
    struct Layer {
        Vector attn_gain, mlp_gain;
        Vector wq, wk, wv, wo;  // d x d row-major
        Vector w_up;            // 4d x d
        Vector w_down;          // d x 4d
    };

    void install_planted();
    bool tensors_equal(const Model& other) const;
    void run_block(const Layer& layer, std::vector<Vector>& x) const;
    void rms_norm(std::span<const double> in, std::span<const double> gain,
                  std::span<double> out) const;

    ToyModelConfig config_;
    Vector embedding_;    // vocab x d
    Vector unembedding_;  // vocab x d
    Vector final_gain_;
    std::vector<Layer> layers_;
};

inline Model init_model(ToyModelConfig config) { return Model(std::move(config)); }

/// round(fraction * n_layers); fraction must lie in (0, 1].
std::size_t resolve_layer(double depth_fraction, std::size_t n_layers);

}  // namespace semaxis::toy
