#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semaxis/linalg.hpp"
#include "semaxis/saxd.hpp"
#include "semaxis/toy_model.hpp"

namespace semaxis {

enum class Pooling { mean_tokens, last_token };

std::string_view to_string(Pooling p) noexcept;
/// Accepts "mean", "mean_tokens", "last", "last_token".
Pooling parse_pooling(std::string_view s);

struct WordFeature {
    std::string word;
    Vector vector;
    std::size_t layer = 0;
    Pooling pooling = Pooling::mean_tokens;
    std::string source_id;
    std::string prompt_set_hash;
};

/// One bipolar scale: its poles and the antonym pairs that define it. The
/// poles themselves are the first pair.
struct AntonymPairSet {
    std::string axis_name;
    std::string pos_pole;
    std::string neg_pole;
    std::vector<std::pair<std::string, std::string>> pairs;
};

/// Checks pair count (exactly `required_pairs`, or >= 1 when it is 0),
/// duplicate pairs and that the poles are the first pair.
void validate(const AntonymPairSet& set, std::size_t required_pairs = 10);

struct SemanticAxis {
    std::string axis_name;
    std::string pos_pole;
    std::string neg_pole;
    Vector vector;       // mean of pair differences
    Vector unit_vector;  // vector / |vector|
    std::size_t pair_count = 0;
    std::string source_id;
    std::size_t layer = 0;
};

// --- prompts ---------------------------------------------------------------

/// The four elicitation templates; each contains the `{word}` slot.
const std::vector<std::string>& default_prompts();

std::string render_template(std::string_view tmpl, std::string_view word);

/// SHA-256 of the templates joined with newlines, hex encoded.
std::string prompt_set_hash(std::span<const std::string> prompts);

// --- activation sources ----------------------------------------------------

class ActivationSource {
public:
    virtual ~ActivationSource() = default;

    virtual std::string source_id() const = 0;
    virtual std::size_t dim() const = 0;
    /// Number of transformer blocks; valid layers are 0..n_layers.
    virtual std::size_t n_layers() const = 0;

    virtual WordFeature feature(const std::string& word, std::span<const std::string> prompts,
                                std::size_t layer, Pooling pooling) const = 0;
};

/// Runs the toy transformer with capture hooks on every token position.
class ToyModelSource final : public ActivationSource {
public:
    explicit ToyModelSource(const toy::Model& model, std::string id = {});

    std::string source_id() const override { return id_; }
    std::size_t dim() const override { return model_.config().d_model; }
    std::size_t n_layers() const override { return model_.config().n_layers; }

    /// Residual stream at `layer` for every token of `text` (rows = tokens).
    DenseMatrix layer_activations(std::string_view text, std::size_t layer) const;

    WordFeature feature(const std::string& word, std::span<const std::string> prompts,
                        std::size_t layer, Pooling pooling) const override;

private:
    const toy::Model& model_;
    std::string id_;
};

/// Pre-pooled features read from a SAXD dump. Layer and pooling must match
/// the dump header; the prompt templates are whatever the extractor used.
class DumpSource final : public ActivationSource {
public:
    explicit DumpSource(io::SaxdDump dump);

    std::string source_id() const override { return dump_.header.model_id; }
    std::size_t dim() const override { return dump_.header.dim; }
    std::size_t n_layers() const override;

    WordFeature feature(const std::string& word, std::span<const std::string> prompts,
                        std::size_t layer, Pooling pooling) const override;

    const io::SaxdDump& dump() const noexcept { return dump_; }

private:
    io::SaxdDump dump_;
    std::unordered_map<std::string, std::size_t> index_;
};

// --- operations ------------------------------------------------------------

/// Pools each prompt's activations (mean over all tokens, or the final
/// token), then averages the per-prompt vectors.
WordFeature build_word_feature(const ActivationSource& source, const std::string& word,
                               std::span<const std::string> prompts, std::size_t layer,
                               Pooling pooling);

/// Mean of (pos - neg) over the pairs, summed exactly so pair order cannot
/// change a bit.
SemanticAxis build_axis(const std::string& axis_name,
                        std::span<const std::pair<WordFeature, WordFeature>> pair_features);

struct BuildResult {
    std::vector<WordFeature> features;
    std::vector<SemanticAxis> axes;
};

/// Features for every word and an axis for every pair set, in input order.
/// Every failing word or pair is collected; if any failed, a single
/// aggregate error lists them all.
BuildResult build_all(const ActivationSource& source, std::span<const std::string> words,
                      std::span<const AntonymPairSet> axis_config,
                      std::span<const std::string> prompts, std::size_t layer, Pooling pooling,
                      unsigned threads = 0);

/// Collects pooled features into a dump (values narrowed to f32).
io::SaxdDump to_dump(std::span<const WordFeature> features, std::string model_id);
io::SaxdDump to_dump(std::span<const SemanticAxis> axes, std::string model_id);
/// Inverse of the axis overload; unit vectors are recomputed from the stored
/// (f32) vectors.
std::vector<SemanticAxis> axes_from_dump(const io::SaxdDump& dump);

}  // namespace semaxis
