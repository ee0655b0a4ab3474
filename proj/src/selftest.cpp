#include "semaxis/selftest.hpp"

#include <algorithm>
#include <cmath>

#include "semaxis/error.hpp"

namespace semaxis {

PlantedSteeringWorld make_planted_steering_world(const PlantedSteeringSpec& spec) {
    const std::size_t k = spec.n_axes;
    std::vector<std::string> names, texts;
    std::vector<std::pair<std::string, std::string>> poles;
    for (std::size_t i = 0; i < k; ++i) {
        poles.emplace_back("p" + std::to_string(i), "n" + std::to_string(i));
        names.push_back(poles.back().first + "-" + poles.back().second);
    }
    std::vector<std::string> words;
    for (std::size_t i = 0; i < spec.n_words; ++i) words.push_back("w" + std::to_string(i));
    for (const auto& w : words)
        for (const auto& [p, n] : poles) texts.push_back(forced_choice_text(w, p, n));
    if (words.empty())
        for (const auto& [p, n] : poles) texts.push_back(forced_choice_text("x", p, n));

    toy::ToyModelConfig config;
    config.vocab = toy::build_vocabulary(texts);
    config.d_model = spec.d_model;
    config.n_layers = spec.n_layers;
    config.n_heads = spec.n_heads;
    config.seed = spec.seed;
    config.final_norm = spec.final_norm;
    config.readout_mode = toy::ReadoutMode::planted;
    const DenseMatrix target =
        spec.cosines ? *spec.cosines
                     : toy::random_cosine_matrix(k, spec.cosine_rank, spec.seed ^ 0x9e3779b9ULL,
                                                 spec.max_abs_cosine);
    config.planted = toy::make_planted_readout(names, poles, target, spec.d_model,
                                               spec.seed + 1, spec.readout_norm);

    std::vector<SemanticAxis> axes;
    for (const auto& a : config.planted->axes) {
        SemanticAxis s;
        s.axis_name = a.name;
        s.pos_pole = a.pos_token;
        s.neg_pole = a.neg_token;
        s.vector = a.direction;
        s.unit_vector = a.direction;
        s.pair_count = 1;
        s.source_id = "planted-seed" + std::to_string(spec.seed);
        axes.push_back(std::move(s));
    }
    DenseMatrix cos = DenseMatrix::identity(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            cos(i, j) = cos(j, i) = cosine_similarity(axes[i].unit_vector, axes[j].unit_vector);
    return {toy::Model(std::move(config)), std::move(words), std::move(axes), std::move(cos)};
}

std::vector<LawCheck> linear_readout_selftest(std::size_t seeds, std::uint64_t first_seed,
                                              double alpha) {
    LawCheck displacement{"displacement |w'-w| = alpha*|w|", true, 0.0, 1e-10};
    LawCheck logodds{"log-odds spillover = 2*alpha*|w|*cos*|readout|", true, 0.0, 1e-6};
    LawCheck correlation{"spillover-vs-cosine r = 1 (log-odds)", true, 0.0, 1e-6};
    LawCheck antisymmetry{"direction antisymmetry of log-odds deltas", true, 0.0, 1e-8};
    LawCheck zero_alpha{"alpha = 0 leaves p bit-identical", true, 0.0, 0.0};

    auto note = [](LawCheck& law, double dev) {
        law.worst = std::max(law.worst, dev);
        if (!(dev <= law.tolerance)) law.pass = false;
    };

    for (std::size_t s = 0; s < seeds; ++s) {
        PlantedSteeringSpec spec;
        spec.seed = first_seed + s;
        spec.readout_norm = 0.5 + static_cast<double>(s % 4) * 0.5;
        const auto world = make_planted_steering_world(spec);
        const auto& model = world.model;
        const auto& vocab = model.config().vocab;

        // per-word residual norm at the readout position
        std::vector<double> wnorm;
        for (const auto& w : world.words) {
            const auto prompt = render_prompt(vocab, w, world.axes[0].pos_pole,
                                              world.axes[0].neg_pole);
            const std::size_t at = prompt.word_positions.back();
            wnorm.push_back(norm(model.embedding_row(prompt.tokens[at])));

            const toy::HookSpec hooks[] = {
                toy::HookSpec::steer(0, prompt.word_positions, world.axes[1].unit_vector, alpha),
                toy::HookSpec::capture(0, {at})};
            const auto trace = model.forward(prompt.tokens, hooks);
            const Vector& after = trace.captured.at({0, at});
            const auto before = model.embedding_row(prompt.tokens[at]);
            double ss = 0.0;
            for (std::size_t c = 0; c < after.size(); ++c)
                ss += (after[c] - before[c]) * (after[c] - before[c]);
            note(displacement, std::abs(std::sqrt(ss) - alpha * wnorm.back()));
        }

        SpilloverOptions opts;
        opts.alpha = alpha;
        opts.layer = 0;
        opts.site = ReadoutSite::last_word_token;
        opts.threads = 1;
        const auto run = run_spillover(model, world.words, world.axes, opts);
        if (!run.failures.empty()) fail(ErrorKind::invalid_input, "selftest: trials failed");

        const std::size_t k = world.axes.size();
        double mean_norm = 0.0;
        for (double x : wnorm) mean_norm += x;
        mean_norm /= static_cast<double>(wnorm.size());
        for (std::size_t t = 0; t < k; ++t)
            for (std::size_t m = 0; m < k; ++m) {
                const double expect =
                    2.0 * alpha * mean_norm * world.cosines(t, m) * spec.readout_norm;
                note(logodds, std::abs(run.matrix.log_odds(t, m) - expect));
            }
        PairwiseMatrix cos{run.matrix.labels, world.cosines, PairwiseKind::axis_cosine};
        note(correlation, std::abs(spillover_vs_cosine(run.matrix, cos, Units::log_odds).r - 1.0));

        for (std::size_t i = 0; i + 1 < run.trials.size(); i += 2) {
            const auto& plus = run.trials[i];
            const auto& minus = run.trials[i + 1];
            const double dp = plus.logit_diff_steered - plus.logit_diff_base;
            const double dm = minus.logit_diff_steered - minus.logit_diff_base;
            note(antisymmetry, std::abs(dp + dm));
        }

        opts.alpha = 0.0;
        const auto still = run_spillover(model, world.words, world.axes, opts);
        for (const auto& t : still.trials) note(zero_alpha, t.p_steered == t.p_base ? 0.0 : 1.0);
    }
    return {displacement, logodds, correlation, antisymmetry, zero_alpha};
}

}  // namespace semaxis
