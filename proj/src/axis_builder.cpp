#include "semaxis/axis_builder.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <set>

#include "semaxis/digest.hpp"
#include "semaxis/error.hpp"
#include "semaxis/parallel.hpp"

namespace semaxis {

std::string_view to_string(Pooling p) noexcept {
    return p == Pooling::mean_tokens ? "mean" : "last";
}

Pooling parse_pooling(std::string_view s) {
    if (s == "mean" || s == "mean_tokens") return Pooling::mean_tokens;
    if (s == "last" || s == "last_token") return Pooling::last_token;
    fail(ErrorKind::invalid_input, "unknown pooling '" + std::string(s) + "' (use mean or last)");
}

void validate(const AntonymPairSet& set, std::size_t required_pairs) {
    const std::string where = "axis '" + set.axis_name + "': ";
    require(!set.axis_name.empty(), ErrorKind::invalid_input, "axis with empty name");
    if (required_pairs)
        require(set.pairs.size() == required_pairs, ErrorKind::invalid_input,
                where + "has " + std::to_string(set.pairs.size()) + " pairs, expected " +
                    std::to_string(required_pairs));
    else
        require(!set.pairs.empty(), ErrorKind::invalid_input, where + "has no pairs");
    require(set.pairs.front().first == set.pos_pole && set.pairs.front().second == set.neg_pole,
            ErrorKind::invalid_input, where + "the poles must be the first pair");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : set.pairs) {
        require(!p.first.empty() && !p.second.empty(), ErrorKind::invalid_input,
                where + "pair with an empty word");
        require(p.first != p.second, ErrorKind::invalid_input,
                where + "pair '" + p.first + "' is contrasted with itself");
        require(seen.insert(p).second, ErrorKind::invalid_input,
                where + "pair (" + p.first + ", " + p.second + ") repeats");
    }
}

const std::vector<std::string>& default_prompts() {
    static const std::vector<std::string> prompts = {
        "USER: Tell me about {word}.",
        "USER: Tell me your associations with the word {word}.",
        "USER: What do you think of when you hear the word {word}?",
        "USER: Define the word {word}. ASSISTANT: The word {word} means",
    };
    return prompts;
}

std::string render_template(std::string_view tmpl, std::string_view word) {
    static constexpr std::string_view slot = "{word}";
    std::string out;
    std::size_t start = 0;
    bool found = false;
    for (auto at = tmpl.find(slot); at != std::string_view::npos; at = tmpl.find(slot, start)) {
        out.append(tmpl.substr(start, at - start));
        out.append(word);
        start = at + slot.size();
        found = true;
    }
    require(found, ErrorKind::invalid_input,
            "prompt template has no {word} slot: '" + std::string(tmpl) + "'");
    out.append(tmpl.substr(start));
    return out;
}

std::string prompt_set_hash(std::span<const std::string> prompts) {
    std::string joined;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (i) joined += '\n';
        joined += prompts[i];
    }
    return sha256_hex(std::string_view(joined));
}

// --- toy model source ------------------------------------------------------

ToyModelSource::ToyModelSource(const toy::Model& model, std::string id)
    : model_(model), id_(id.empty() ? "toy-seed" + std::to_string(model.config().seed) : id) {}

DenseMatrix ToyModelSource::layer_activations(std::string_view text, std::size_t layer) const {
    require(layer <= n_layers(), ErrorKind::invalid_input,
            "layer " + std::to_string(layer) + " outside 0.." + std::to_string(n_layers()));
    const auto tokens = toy::tokenize(text, model_.config().vocab);
    std::vector<std::size_t> positions(tokens.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    const toy::HookSpec hook = toy::HookSpec::capture(layer, positions);
    const auto trace = model_.forward(tokens, std::span(&hook, 1));
    DenseMatrix out(tokens.size(), dim());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Vector& v = trace.captured.at({layer, i});
        std::copy(v.begin(), v.end(), out.row(i).begin());
    }
    return out;
}

WordFeature ToyModelSource::feature(const std::string& word, std::span<const std::string> prompts,
                                    std::size_t layer, Pooling pooling) const {
    require(!prompts.empty(), ErrorKind::invalid_input, "no prompt templates");
    Vector sum(dim(), 0.0);
    for (const auto& tmpl : prompts) {
        const DenseMatrix acts = layer_activations(render_template(tmpl, word), layer);
        if (pooling == Pooling::mean_tokens) {
            const Vector pooled = mean_pool(acts);
            for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += pooled[c];
        } else {
            const auto last = acts.row(acts.rows() - 1);
            for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += last[c];
        }
    }
    for (double& x : sum) x /= static_cast<double>(prompts.size());
    return {word, std::move(sum), layer, pooling, id_, prompt_set_hash(prompts)};
}

// --- dump source -----------------------------------------------------------

DumpSource::DumpSource(io::SaxdDump dump) : dump_(std::move(dump)) {
    for (std::size_t i = 0; i < dump_.records.size(); ++i)
        index_.emplace(dump_.records[i].name, i);
}

std::size_t DumpSource::n_layers() const { return dump_.header.layer; }

WordFeature DumpSource::feature(const std::string& word, std::span<const std::string>,
                                std::size_t layer, Pooling pooling) const {
    require(layer == dump_.header.layer, ErrorKind::invalid_input,
            "dump holds layer " + std::to_string(dump_.header.layer) + ", requested " +
                std::to_string(layer));
    require(parse_pooling(dump_.header.pooling) == pooling, ErrorKind::invalid_input,
            "dump pooling is '" + dump_.header.pooling + "', requested '" +
                std::string(to_string(pooling)) + "'");
    const auto it = index_.find(word);
    if (it == index_.end())
        fail(ErrorKind::not_found, "word '" + word + "' not in dump '" + source_id() + "'");
    const auto& values = dump_.records[it->second].values;
    WordFeature f{word, Vector(values.begin(), values.end()), layer, pooling, source_id(), {}};
    if (auto h = dump_.header.extra.find("prompt_set_hash");
        h != dump_.header.extra.end() && h->is_string())
        f.prompt_set_hash = h->get<std::string>();
    return f;
}

// --- operations ------------------------------------------------------------

WordFeature build_word_feature(const ActivationSource& source, const std::string& word,
                               std::span<const std::string> prompts, std::size_t layer,
                               Pooling pooling) {
    WordFeature f = source.feature(word, prompts, layer, pooling);
    for (double x : f.vector)
        require(std::isfinite(x), ErrorKind::invalid_input,
                "non-finite feature for word '" + word + "'");
    return f;
}

SemanticAxis build_axis(const std::string& axis_name,
                        std::span<const std::pair<WordFeature, WordFeature>> pair_features) {
    require(!pair_features.empty(), ErrorKind::invalid_input,
            "axis '" + axis_name + "' has no pairs");
    const WordFeature& ref = pair_features.front().first;
    const std::size_t d = ref.vector.size();
    for (const auto& [pos, neg] : pair_features)
        for (const WordFeature* f : {&pos, &neg})
            require(f->vector.size() == d && f->layer == ref.layer &&
                        f->source_id == ref.source_id,
                    ErrorKind::invalid_input,
                    "axis '" + axis_name + "': feature '" + f->word +
                        "' differs in dim, layer or source");

    const std::size_t n = pair_features.size();
    SemanticAxis axis;
    axis.axis_name = axis_name;
    axis.pos_pole = pair_features.front().first.word;
    axis.neg_pole = pair_features.front().second.word;
    axis.vector.resize(d);
    Vector diffs(n);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t j = 0; j < n; ++j)
            diffs[j] = pair_features[j].first.vector[c] - pair_features[j].second.vector[c];
        axis.vector[c] = canonical_sum(diffs) / static_cast<double>(n);
    }
    const double len = norm(axis.vector);
    require(len > 0.0, ErrorKind::invalid_input, "axis '" + axis_name + "' is the zero vector");
    axis.unit_vector = axis.vector;
    for (double& x : axis.unit_vector) x /= len;
    axis.pair_count = n;
    axis.source_id = ref.source_id;
    axis.layer = ref.layer;
    return axis;
}

BuildResult build_all(const ActivationSource& source, std::span<const std::string> words,
                      std::span<const AntonymPairSet> axis_config,
                      std::span<const std::string> prompts, std::size_t layer, Pooling pooling,
                      unsigned threads) {
    // every distinct word needed, first-seen order
    std::vector<std::string> needed;
    std::unordered_map<std::string, std::size_t> slot;
    auto want = [&](const std::string& w) {
        if (slot.emplace(w, needed.size()).second) needed.push_back(w);
    };
    for (const auto& w : words) want(w);
    for (const auto& set : axis_config)
        for (const auto& [p, n] : set.pairs) {
            want(p);
            want(n);
        }

    std::vector<std::optional<WordFeature>> feats(needed.size());
    std::vector<std::string> errors(needed.size());
    parallel_for(
        needed.size(),
        [&](std::size_t i) {
            try {
                feats[i] = build_word_feature(source, needed[i], prompts, layer, pooling);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        },
        threads);

    std::vector<std::string> failures;
    for (std::size_t i = 0; i < needed.size(); ++i)
        if (!feats[i]) failures.push_back("word '" + needed[i] + "': " + errors[i]);

    BuildResult out;
    for (const auto& w : words)
        if (const auto& f = feats[slot.at(w)]) out.features.push_back(*f);

    for (const auto& set : axis_config) {
        try {
            validate(set, 0);
            std::vector<std::pair<WordFeature, WordFeature>> pf;
            std::vector<std::string> missing;
            for (const auto& [p, n] : set.pairs) {
                const auto& fp = feats[slot.at(p)];
                const auto& fn = feats[slot.at(n)];
                if (!fp || !fn) {
                    missing.push_back("(" + p + ", " + n + ")");
                    continue;
                }
                pf.emplace_back(*fp, *fn);
            }
            if (!missing.empty()) {
                std::string list;
                for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
                fail(ErrorKind::not_found, "pairs without features: " + list);
            }
            out.axes.push_back(build_axis(set.axis_name, pf));
            out.axes.back().pos_pole = set.pos_pole;
            out.axes.back().neg_pole = set.neg_pole;
        } catch (const Error& e) {
            failures.push_back("axis '" + set.axis_name + "': " + e.what());
        }
    }

    if (!failures.empty()) {
        std::string msg = std::to_string(failures.size()) + " build failure(s):";
        for (const auto& f : failures) msg += "\n  " + f;
        fail(ErrorKind::aggregate, msg);
    }
    return out;
}

io::SaxdDump to_dump(std::span<const WordFeature> features, std::string model_id) {
    require(!features.empty(), ErrorKind::invalid_input, "no features to dump");
    io::SaxdDump dump;
    dump.header.model_id = std::move(model_id);
    dump.header.layer = features.front().layer;
    dump.header.dim = features.front().vector.size();
    dump.header.pooling = std::string(to_string(features.front().pooling));
    dump.header.extra["prompt_set_hash"] = features.front().prompt_set_hash;
    for (const auto& f : features) {
        require(f.layer == dump.header.layer && f.pooling == features.front().pooling,
                ErrorKind::invalid_input, "features differ in layer or pooling");
        dump.records.push_back({f.word, std::vector<float>(f.vector.begin(), f.vector.end())});
    }
    return dump;
}

io::SaxdDump to_dump(std::span<const SemanticAxis> axes, std::string model_id) {
    require(!axes.empty(), ErrorKind::invalid_input, "no axes to dump");
    io::SaxdDump dump;
    dump.header.model_id = std::move(model_id);
    dump.header.layer = axes.front().layer;
    dump.header.dim = axes.front().vector.size();
    dump.header.pooling = "axis";
    auto meta = nlohmann::json::array();
    for (const auto& a : axes) {
        meta.push_back({{"name", a.axis_name},
                        {"pos_pole", a.pos_pole},
                        {"neg_pole", a.neg_pole},
                        {"pair_count", a.pair_count},
                        {"source_id", a.source_id}});
        dump.records.push_back(
            {a.axis_name, std::vector<float>(a.vector.begin(), a.vector.end())});
    }
    dump.header.extra["axes"] = meta;
    return dump;
}

std::vector<SemanticAxis> axes_from_dump(const io::SaxdDump& dump) {
    const auto meta = dump.header.extra.find("axes");
    require(meta != dump.header.extra.end() && meta->is_array() &&
                meta->size() == dump.records.size(),
            ErrorKind::parse, "axis dump header lacks per-axis metadata");
    std::vector<SemanticAxis> axes;
    for (std::size_t i = 0; i < dump.records.size(); ++i) {
        const auto& m = (*meta)[i];
        SemanticAxis a;
        try {
            a.axis_name = m.at("name").get<std::string>();
            a.pos_pole = m.at("pos_pole").get<std::string>();
            a.neg_pole = m.at("neg_pole").get<std::string>();
            a.pair_count = m.at("pair_count").get<std::size_t>();
            a.source_id = m.at("source_id").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::parse, std::string("bad axis metadata: ") + e.what());
        }
        require(a.axis_name == dump.records[i].name, ErrorKind::parse,
                "axis metadata out of order at '" + dump.records[i].name + "'");
        a.vector.assign(dump.records[i].values.begin(), dump.records[i].values.end());
        a.layer = dump.header.layer;
        const double len = norm(a.vector);
        require(len > 0.0, ErrorKind::invalid_input, "axis '" + a.axis_name + "' is zero");
        a.unit_vector = a.vector;
        for (double& x : a.unit_vector) x /= len;
        axes.push_back(std::move(a));
    }
    return axes;
}

}  // namespace semaxis
