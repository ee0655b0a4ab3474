#include "semaxis/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "semaxis/error.hpp"
#include "semaxis/saxd.hpp"
#include "semaxis/steering.hpp"

namespace semaxis::io {

namespace {

using nlohmann::json;

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(ErrorKind::parse, where + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::parse, where + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
    return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        fail(ErrorKind::parse, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_json(const std::filesystem::path& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

std::vector<AntonymPairSet> parse_axis_config(const json& doc, std::size_t required_pairs) {
    require(doc.is_object() && doc.contains("axes") && doc["axes"].is_array(), ErrorKind::parse,
            "axis config must be an object with an 'axes' list");
    std::vector<AntonymPairSet> out;
    std::set<std::string> names;
    for (std::size_t i = 0; i < doc["axes"].size(); ++i) {
        const json& a = doc["axes"][i];
        const std::string where = "axis config entry " + std::to_string(i);
        require(a.is_object(), ErrorKind::parse, where + " is not an object");
        AntonymPairSet set;
        set.axis_name = field<std::string>(a, "name", where);
        set.pos_pole = field<std::string>(a, "pos_pole", where);
        set.neg_pole = field<std::string>(a, "neg_pole", where);
        for (const auto& p : field<std::vector<std::vector<std::string>>>(a, "pairs", where)) {
            require(p.size() == 2, ErrorKind::parse, where + ": every pair needs two words");
            set.pairs.emplace_back(p[0], p[1]);
        }
        validate(set, required_pairs);
        require(names.insert(set.axis_name).second, ErrorKind::duplicate_name,
                "axis '" + set.axis_name + "' defined twice");
        out.push_back(std::move(set));
    }
    require(!out.empty(), ErrorKind::invalid_input, "axis config lists no axes");
    return out;
}

std::vector<AntonymPairSet> read_axis_config(const std::filesystem::path& path,
                                             std::size_t required_pairs) {
    return parse_axis_config(read_json(path), required_pairs);
}

json axis_config_json(const std::vector<AntonymPairSet>& sets) {
    json axes = json::array();
    for (const auto& s : sets) {
        json pairs = json::array();
        for (const auto& [p, n] : s.pairs) pairs.push_back({p, n});
        axes.push_back(
            {{"name", s.axis_name}, {"pos_pole", s.pos_pole}, {"neg_pole", s.neg_pole},
             {"pairs", pairs}});
    }
    return {{"axes", axes}};
}

std::vector<std::string> parse_prompt_set(const json& doc) {
    require(doc.is_array(), ErrorKind::parse, "prompt set must be a JSON list of strings");
    std::vector<std::string> out;
    for (const auto& t : doc) {
        require(t.is_string(), ErrorKind::parse, "prompt set entries must be strings");
        out.push_back(t.get<std::string>());
        render_template(out.back(), "x");  // checks the {word} slot
    }
    require(out.size() == 4, ErrorKind::invalid_input,
            "prompt set must hold exactly 4 templates, found " + std::to_string(out.size()));
    return out;
}

std::vector<std::string> read_prompt_set(const std::filesystem::path& path) {
    return parse_prompt_set(read_json(path));
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::vector<std::string> words;
    std::set<std::string> seen;
    for (std::string line; std::getline(in, line);) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        std::string w = line.substr(b, e - b + 1);
        require(seen.insert(w).second, ErrorKind::duplicate_name,
                "word '" + w + "' listed twice in '" + path.string() + "'");
        words.push_back(std::move(w));
    }
    require(!words.empty(), ErrorKind::invalid_input, "'" + path.string() + "' lists no words");
    return words;
}

ToyModelDocument parse_toy_config(const json& doc, const std::filesystem::path& base_dir) {
    const std::string where = "toy model config";
    require(doc.is_object(), ErrorKind::parse, where + " must be a JSON object");
    ToyModelDocument out;
    auto& c = out.config;
    c.d_model = field_or<std::size_t>(doc, "d_model", c.d_model, where);
    c.n_layers = field_or<std::size_t>(doc, "n_layers", c.n_layers, where);
    c.n_heads = field_or<std::size_t>(doc, "n_heads", c.n_heads, where);
    c.max_seq = field_or<std::size_t>(doc, "max_seq", c.max_seq, where);
    c.seed = field_or<std::uint64_t>(doc, "seed", c.seed, where);

    const auto norm = field_or<std::string>(doc, "final_norm", "rms", where);
    require(norm == "rms" || norm == "identity", ErrorKind::parse,
            where + ": final_norm must be 'rms' or 'identity'");
    c.final_norm = norm == "rms" ? toy::FinalNorm::rms : toy::FinalNorm::identity;
    const auto mode = field_or<std::string>(doc, "readout_mode", "learned", where);
    require(mode == "learned" || mode == "planted", ErrorKind::parse,
            where + ": readout_mode must be 'learned' or 'planted'");
    c.readout_mode = mode == "learned" ? toy::ReadoutMode::learned : toy::ReadoutMode::planted;

    if (doc.contains("vocab")) {
        c.vocab = toy::Vocabulary(field<std::vector<std::string>>(doc, "vocab", where));
        out.has_vocab = true;
    }
    if (doc.contains("planted")) {
        const json& p = doc["planted"];
        const std::string pw = where + " (planted)";
        require(p.is_object() && p.contains("axes") && p["axes"].is_array(), ErrorKind::parse,
                pw + ": needs an 'axes' list");
        for (const auto& a : p["axes"]) {
            out.planted_names.push_back(field<std::string>(a, "name", pw));
            out.planted_poles.emplace_back(field<std::string>(a, "pos", pw),
                                           field<std::string>(a, "neg", pw));
        }
        if (p.contains("cosines"))
            out.planted_cosines =
                DenseMatrix::from_rows(field<std::vector<std::vector<double>>>(p, "cosines", pw));
        out.cosine_seed = field_or<std::uint64_t>(p, "cosine_seed", c.seed, pw);
        out.cosine_rank = field_or<std::size_t>(p, "cosine_rank", out.cosine_rank, pw);
        out.max_abs_cosine = field_or<double>(p, "max_abs_cosine", out.max_abs_cosine, pw);
        out.readout_norm = field_or<double>(p, "readout_norm", out.readout_norm, pw);
    }
    require(c.readout_mode == toy::ReadoutMode::learned || !out.planted_names.empty(),
            ErrorKind::invalid_input, where + ": planted readout mode needs planted axes");
    if (doc.contains("weights"))
        out.weights = base_dir / field<std::string>(doc, "weights", where);
    return out;
}

ToyModelDocument read_toy_config(const std::filesystem::path& path) {
    return parse_toy_config(read_json(path), path.parent_path());
}

toy::Model build_toy_model(const ToyModelDocument& doc,
                           const std::optional<toy::Vocabulary>& vocab) {
    toy::ToyModelConfig config = doc.config;
    if (!doc.has_vocab) {
        require(vocab.has_value(), ErrorKind::invalid_input,
                "toy model config has no vocab and none was derived");
        config.vocab = *vocab;
    }
    if (!doc.planted_names.empty()) {
        const std::size_t k = doc.planted_names.size();
        const DenseMatrix cos =
            doc.planted_cosines ? *doc.planted_cosines
                                : toy::random_cosine_matrix(k, doc.cosine_rank, doc.cosine_seed,
                                                            doc.max_abs_cosine);
        config.planted = toy::make_planted_readout(doc.planted_names, doc.planted_poles, cos,
                                                   config.d_model, config.seed + 1,
                                                   doc.readout_norm);
    }
    toy::Model model(std::move(config));
    if (doc.weights) load_weights(model, *doc.weights);
    return model;
}

toy::Vocabulary toy_vocabulary(const std::vector<std::string>& words,
                               const std::vector<AntonymPairSet>& axes,
                               const std::vector<std::string>& prompts,
                               const std::vector<std::string>& extra) {
    std::vector<std::string> texts;
    std::vector<std::string> all = words;
    for (const auto& a : axes)
        for (const auto& [p, n] : a.pairs) {
            all.push_back(p);
            all.push_back(n);
        }
    for (const auto& w : all)
        for (const auto& t : prompts) texts.push_back(render_template(t, w));
    const std::string probe = all.empty() ? "x" : all.front();
    for (const auto& a : axes) texts.push_back(forced_choice_text(probe, a.pos_pole, a.neg_pole));
    for (const auto& w : all) texts.push_back(w);
    for (const auto& e : extra) texts.push_back(e);
    return toy::build_vocabulary(texts);
}

void save_weights(const toy::Model& model, const std::filesystem::path& path,
                  const std::string& model_id) {
    WeightFile file;
    file.model_id = model_id;
    for (const auto& t : model.tensors())
        file.tensors.push_back({t.name, t.shape, std::vector<float>(t.values.begin(), t.values.end())});
    write_bytes(path, encode_weights(file));
}

void load_weights(toy::Model& model, const std::filesystem::path& path) {
    const WeightFile file = decode_weights(read_bytes(path));
    std::vector<toy::NamedTensor> tensors;
    for (const auto& t : file.tensors)
        tensors.push_back({t.name, t.shape, std::vector<double>(t.values.begin(), t.values.end())});
    model.load_tensors(tensors);
}

}  // namespace semaxis::io
