#include "semaxis/steering.hpp"

#include <cmath>
#include <optional>

#include "semaxis/error.hpp"
#include "semaxis/parallel.hpp"

namespace semaxis {

std::string forced_choice_text(std::string_view word, std::string_view pos,
                               std::string_view neg) {
    std::string s = "USER: Do you associate '";
    s.append(word).append("' more with ").append(pos).append(" or ").append(neg);
    s.append("? Just print your assessment with no formatting.\nASSISTANT: I find ");
    s.append(word).append(" to be more");
    return s;
}

ForcedChoicePrompt render_prompt(const toy::Vocabulary& vocab, const std::string& word,
                                 const std::string& pos, const std::string& neg) {
    require(pos != neg, ErrorKind::invalid_input,
            "antonyms must differ, got '" + pos + "' twice");
    ForcedChoicePrompt p;
    p.word = word;
    p.pos_antonym = pos;
    p.neg_antonym = neg;
    p.text = forced_choice_text(word, pos, neg);
    p.tokens = toy::tokenize(p.text, vocab);

    const auto word_ids = toy::tokenize(word, vocab);
    require(!word_ids.empty(), ErrorKind::invalid_input, "word '" + word + "' has no tokens");
    p.word_positions = toy::find_word_positions(p.tokens, word_ids);
    const std::size_t occurrences = p.word_positions.size() / word_ids.size();
    require(occurrences == 2, ErrorKind::not_found,
            "word '" + word + "' occurs " + std::to_string(occurrences) +
                " times in its prompt, expected 2");
    p.answer_position = p.tokens.size() - 1;

    // first token of each antonym decides the choice
    const auto pos_ids = toy::tokenize(pos, vocab);
    const auto neg_ids = toy::tokenize(neg, vocab);
    require(!pos_ids.empty() && !neg_ids.empty(), ErrorKind::invalid_input,
            "empty antonym token sequence");
    p.pos_token_id = pos_ids.front();
    p.neg_token_id = neg_ids.front();
    require(p.pos_token_id != p.neg_token_id, ErrorKind::invalid_input,
            "antonyms '" + pos + "' and '" + neg + "' share their first token");
    return p;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

ChoiceOutcome forced_choice(const toy::Model& model, const ForcedChoicePrompt& prompt,
                            std::span<const toy::HookSpec> hooks, ReadoutSite site) {
    const auto trace = model.forward(prompt.tokens, hooks);
    const std::size_t at =
        site == ReadoutSite::final_token ? prompt.answer_position : prompt.word_positions.back();
    ChoiceOutcome c;
    c.logit_pos = trace.logits(at, prompt.pos_token_id);
    c.logit_neg = trace.logits(at, prompt.neg_token_id);
    c.logit_diff = c.logit_pos - c.logit_neg;
    c.p_pos = sigmoid(c.logit_diff);
    c.p_neg = 1.0 - c.p_pos;
    return c;
}

std::string_view to_string(Units units) noexcept {
    return units == Units::probability ? "prob" : "logodds";
}

Units parse_units(std::string_view s) {
    if (s == "prob" || s == "probability") return Units::probability;
    if (s == "logodds" || s == "log_odds") return Units::log_odds;
    fail(ErrorKind::invalid_input, "unknown units '" + std::string(s) + "' (use prob or logodds)");
}

namespace {

double signed_delta(const TrialResult& t, Units units) {
    const double delta = units == Units::probability ? t.p_steered - t.p_base
                                                     : t.logit_diff_steered - t.logit_diff_base;
    return t.direction < 0 ? -delta : delta;
}

}  // namespace

double aggregate_cell(std::span<const TrialResult> trials, Units units) {
    if (trials.empty()) return 0.0;
    Vector deltas;
    deltas.reserve(trials.size());
    for (const auto& t : trials) deltas.push_back(signed_delta(t, units));
    return canonical_sum(deltas) / static_cast<double>(deltas.size());
}

SpilloverRun run_spillover(const toy::Model& model, std::span<const std::string> words,
                           std::span<const SemanticAxis> axes, const SpilloverOptions& options) {
    require(!axes.empty(), ErrorKind::invalid_input, "run_spillover: no axes");
    require(options.alpha >= 0.0 && std::isfinite(options.alpha), ErrorKind::invalid_input,
            "run_spillover: alpha must be finite and >= 0");
    require(options.layer <= model.config().n_layers, ErrorKind::invalid_input,
            "run_spillover: layer " + std::to_string(options.layer) + " > n_layers");
    const std::size_t m = axes.size();
    for (const auto& a : axes)
        require(a.unit_vector.size() == model.config().d_model, ErrorKind::invalid_input,
                "axis '" + a.axis_name + "' does not match the model width");

    struct Group {
        std::vector<TrialResult> trials;
        std::optional<TrialFailure> failure;
    };
    std::vector<Group> groups(words.size() * m);
    parallel_for(
        groups.size(),
        [&](std::size_t g) {
            const std::string& word = words[g / m];
            const SemanticAxis& measured = axes[g % m];
            try {
                const auto prompt =
                    render_prompt(model.config().vocab, word, measured.pos_pole, measured.neg_pole);
                const ChoiceOutcome base = forced_choice(model, prompt, {}, options.site);
                auto& out = groups[g].trials;
                for (const auto& target : axes)
                    for (int dir : {1, -1}) {
                        Vector v = target.unit_vector;
                        if (dir < 0)
                            for (double& x : v) x = -x;
                        const toy::HookSpec hook = toy::HookSpec::steer(
                            options.layer, prompt.word_positions, std::move(v), options.alpha);
                        const ChoiceOutcome s =
                            forced_choice(model, prompt, std::span(&hook, 1), options.site);
                        out.push_back({word, target.axis_name, dir, measured.axis_name,
                                       base.p_pos, s.p_pos, base.logit_diff, s.logit_diff});
                    }
            } catch (const Error& e) {
                groups[g].failure = TrialFailure{word, measured.axis_name, e.what()};
                groups[g].trials.clear();
            }
        },
        options.threads);

    SpilloverRun run;
    // cell buckets, keyed by (target, measured)
    std::vector<std::vector<TrialResult>> cells(m * m);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].failure) run.failures.push_back(*groups[g].failure);
        const std::size_t measured = g % m;
        for (std::size_t i = 0; i < groups[g].trials.size(); ++i) {
            const std::size_t target = i / 2;
            cells[target * m + measured].push_back(groups[g].trials[i]);
            run.trials.push_back(groups[g].trials[i]);
        }
    }

    auto& mat = run.matrix;
    for (const auto& a : axes) mat.labels.push_back(a.axis_name);
    mat.probability = DenseMatrix(m, m);
    mat.log_odds = DenseMatrix(m, m);
    mat.counts.assign(m * m, 0);
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t j = 0; j < m; ++j) {
            const auto& cell = cells[t * m + j];
            mat.counts[t * m + j] = cell.size();
            mat.probability(t, j) = aggregate_cell(cell, Units::probability);
            mat.log_odds(t, j) = aggregate_cell(cell, Units::log_odds);
        }
    return run;
}

SpilloverScatter spillover_vs_cosine(const SpilloverMatrix& matrix,
                                     const PairwiseMatrix& cosines, Units units) {
    const std::size_t m = matrix.labels.size();
    bool same = cosines.labels.size() == m;
    for (std::size_t i = 0; same && i < m; ++i)
        same = normalize_label(cosines.labels[i]) == normalize_label(matrix.labels[i]);
    require(same, ErrorKind::label_mismatch,
            "spillover_vs_cosine: spillover and cosine labels differ");
    SpilloverScatter out;
    Vector x, y;
    const DenseMatrix& v = matrix.values(units);
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t j = 0; j < m; ++j) {
            if (t == j || matrix.count(t, j) == 0) continue;
            out.points.push_back({matrix.labels[t], matrix.labels[j], cosines.values(t, j), v(t, j)});
            x.push_back(cosines.values(t, j));
            y.push_back(v(t, j));
        }
    out.r = pearson(x, y);
    return out;
}

std::vector<TargetSummary> on_off_target_summary(const SpilloverMatrix& matrix, Units units) {
    const std::size_t m = matrix.labels.size();
    require(m >= 1, ErrorKind::invalid_input, "on_off_target_summary: empty matrix");
    const DenseMatrix& v = matrix.values(units);
    std::vector<TargetSummary> out;
    for (std::size_t j = 0; j < m; ++j) {
        TargetSummary s;
        s.axis = matrix.labels[j];
        s.on_target = v(j, j);
        for (std::size_t t = 0; t < m; ++t) {
            if (t == j || matrix.count(t, j) == 0) continue;
            if (s.max_off_target_axis.empty() || std::abs(v(t, j)) > s.max_off_target) {
                s.max_off_target = std::abs(v(t, j));
                s.max_off_target_axis = matrix.labels[t];
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace semaxis
