#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semaxis/axis_builder.hpp"
#include "semaxis/toy_model.hpp"

namespace semaxis::io {

/// {"axes": [{"name", "pos_pole", "neg_pole", "pairs": [[pos, neg], ...]}]}.
/// Each set is validated with `required_pairs` (0 = any number >= 1).
std::vector<AntonymPairSet> parse_axis_config(const nlohmann::json& doc,
                                              std::size_t required_pairs = 10);
std::vector<AntonymPairSet> read_axis_config(const std::filesystem::path& path,
                                             std::size_t required_pairs = 10);
nlohmann::json axis_config_json(const std::vector<AntonymPairSet>& sets);

/// A JSON list of exactly four templates, each with a {word} slot.
std::vector<std::string> parse_prompt_set(const nlohmann::json& doc);
std::vector<std::string> read_prompt_set(const std::filesystem::path& path);

/// One word per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> read_word_list(const std::filesystem::path& path);

/// Toy model document as written by the user. The vocabulary may be left out
/// and supplied by the caller; planted axes give either an explicit cosine
/// matrix or a seed for a random one.
struct ToyModelDocument {
    toy::ToyModelConfig config;
    bool has_vocab = false;
    std::vector<std::string> planted_names;
    std::vector<std::pair<std::string, std::string>> planted_poles;
    std::optional<DenseMatrix> planted_cosines;
    std::uint64_t cosine_seed = 0;
    std::size_t cosine_rank = 3;
    double max_abs_cosine = 0.8;
    double readout_norm = 1.0;
    std::optional<std::filesystem::path> weights;  // relative to the document
};

ToyModelDocument parse_toy_config(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
ToyModelDocument read_toy_config(const std::filesystem::path& path);

/// Completes the document into a model: installs `vocab` when the document
/// has none, builds the planted readout, and loads the weights file if named.
toy::Model build_toy_model(const ToyModelDocument& doc,
                           const std::optional<toy::Vocabulary>& vocab = std::nullopt);

/// Vocabulary covering every feature prompt for `words`, every forced-choice
/// prompt for (word, axis poles), and every extra token given.
toy::Vocabulary toy_vocabulary(const std::vector<std::string>& words,
                               const std::vector<AntonymPairSet>& axes,
                               const std::vector<std::string>& prompts,
                               const std::vector<std::string>& extra = {});

void save_weights(const toy::Model& model, const std::filesystem::path& path,
                  const std::string& model_id);
void load_weights(toy::Model& model, const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline, written atomically.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace semaxis::io
