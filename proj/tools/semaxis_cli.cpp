// semaxis: command-line driver for the semantic-axis toolkit.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semaxis/axis_builder.hpp"
#include "semaxis/config_io.hpp"
#include "semaxis/digest.hpp"
#include "semaxis/error.hpp"
#include "semaxis/geometry.hpp"
#include "semaxis/kernels.hpp"
#include "semaxis/parallel.hpp"
#include "semaxis/report.hpp"
#include "semaxis/saxd.hpp"
#include "semaxis/selftest.hpp"
#include "semaxis/steering.hpp"
#include "semaxis/survey.hpp"
#include "semaxis/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semaxis;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    std::string source, axes, prompts, survey, words, out, from;
    std::optional<std::size_t> layer;
    std::optional<double> depth;
    std::string pooling;  // empty: the dump's own pooling, or mean for a toy model
    double alpha = 0.33;
    std::uint64_t seed = 7;
    std::string units = "prob";
    std::string llm_subspace = "raw_axes";
    std::size_t required_pairs = 10;
    std::string steer_with = "built";
    std::string readout = "final";
    bool strict_survey = false;

    // synth-world
    std::size_t n_words = 360, n_axes = 32, n_factors = 3, dim = 64, pairs = 10;
    double noise = 0.2;
    bool no_whiten = false;

    // selftest
    std::size_t seeds = 20;
};

// Records inputs, parameters and output digests; no timestamps, so a rerun
// with the same inputs writes the same manifest.
class Run {
public:
    Run(std::string subcommand, const Options& o) : sub_(std::move(subcommand)), opts_(o) {
        doc_["toolkit"] = "semaxis";
        doc_["version"] = kVersion;
        doc_["subcommand"] = sub_;
        doc_["inputs"] = json::object();
        doc_["outputs"] = json::object();
        doc_["params"] = json::object();
    }

    void input(const std::string& flag, const std::string& path) {
        if (path.empty()) return;
        doc_["inputs"][flag] = {{"file", fs::path(path).filename().string()},
                                {"sha256", sha256_file(path)}};
    }

    template <typename T>
    void param(const std::string& key, const T& value) {
        doc_["params"][key] = value;
    }

    fs::path out_dir() const {
        require(!opts_.out.empty(), ErrorKind::invalid_input, "--out is required");
        return opts_.out;
    }

    void write(const std::string& name, const std::string& text) {
        ensure_out();
        io::write_text(out_dir() / name, text);
        doc_["outputs"][name] = sha256_hex(std::string_view(text));
    }

    void write_bytes(const std::string& name, const std::vector<std::uint8_t>& bytes) {
        ensure_out();
        io::write_bytes(out_dir() / name, bytes);
        doc_["outputs"][name] = sha256_hex(bytes);
    }

    void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

    void warn(const std::string& msg) {
        std::cerr << "warning: " << msg << "\n";
        doc_["warnings"].push_back(msg);
    }

    void finish() {
        ensure_out();
        io::write_json(out_dir() / ("manifest-" + sub_ + ".json"), doc_);
    }

private:
    void ensure_out() {
        std::error_code ec;
        fs::create_directories(out_dir(), ec);
        require(!ec, ErrorKind::io, "cannot create '" + opts_.out + "': " + ec.message());
    }

    std::string sub_;
    const Options& opts_;
    json doc_;
};

bool is_saxd(const std::string& path) {
    const auto bytes = io::read_bytes(path);
    return bytes.size() >= 4 && std::memcmp(bytes.data(), "SAXD", 4) == 0;
}

std::vector<std::string> load_prompts(const Options& o, Run& run) {
    if (o.prompts.empty()) return default_prompts();
    run.input("prompts", o.prompts);
    return io::read_prompt_set(o.prompts);
}

std::optional<SurveyTable> load_survey(const Options& o, Run& run) {
    if (o.survey.empty()) return std::nullopt;
    run.input("survey", o.survey);
    SurveyIngest ingest = read_survey_csv(o.survey);
    if (!ingest.rejected.empty()) {
        std::string csv = "line,word,reason\n";
        for (const auto& r : ingest.rejected)
            csv += std::to_string(r.line) + "," + r.word + "," + r.reason + "\n";
        run.write("survey_rejections.csv", csv);
        if (o.strict_survey) return require_complete(std::move(ingest));
        run.warn(std::to_string(ingest.rejected.size()) +
                 " survey row(s) rejected; see survey_rejections.csv");
    }
    return std::move(ingest.table);
}

std::vector<std::string> load_words(const Options& o, Run& run,
                                    const std::optional<SurveyTable>& survey, bool required) {
    if (!o.words.empty()) {
        run.input("words", o.words);
        return io::read_word_list(o.words);
    }
    if (survey) return survey->words;
    require(!required, ErrorKind::invalid_input, "no word list: pass --words or --survey");
    return {};
}

// The activation source plus the layer and pooling it is read at.
struct Source {
    std::unique_ptr<toy::Model> model;
    std::unique_ptr<ActivationSource> source;
    std::size_t layer = 0;
    Pooling pooling = Pooling::mean_tokens;
};

Source load_source(const Options& o, Run& run, const std::vector<std::string>& words,
                   const std::vector<AntonymPairSet>& axis_config,
                   const std::vector<std::string>& prompts) {
    require(!o.source.empty(), ErrorKind::invalid_input, "--source is required");
    run.input("source", o.source);
    Source s;
    if (is_saxd(o.source)) {
        auto dump = io::read_saxd(o.source);
        s.layer = o.layer.value_or(dump.header.layer);
        require(!o.depth, ErrorKind::invalid_input,
                "--depth applies to a toy model; a dump already fixes its layer");
        s.pooling = o.pooling.empty() ? parse_pooling(dump.header.pooling) : parse_pooling(o.pooling);
        s.source = std::make_unique<DumpSource>(std::move(dump));
    } else {
        const auto doc = io::read_toy_config(o.source);
        if (doc.weights) run.input("weights", doc.weights->string());
        std::vector<std::string> extra;
        for (const auto& [p, n] : doc.planted_poles) {
            extra.push_back(p);
            extra.push_back(n);
        }
        s.model = std::make_unique<toy::Model>(io::build_toy_model(
            doc, io::toy_vocabulary(words, axis_config, prompts, extra)));
        const std::size_t n_layers = s.model->config().n_layers;
        require(o.layer || o.depth, ErrorKind::invalid_input,
                "a toy model source needs --layer or --depth");
        s.layer = o.layer ? *o.layer : toy::resolve_layer(*o.depth, n_layers);
        require(s.layer <= n_layers, ErrorKind::invalid_input,
                "--layer " + std::to_string(s.layer) + " exceeds the model's " +
                    std::to_string(n_layers) + " layers");
        s.pooling = parse_pooling(o.pooling.empty() ? "mean" : o.pooling);
        s.source = std::make_unique<ToyModelSource>(*s.model);
    }
    run.param("layer", s.layer);
    run.param("pooling", std::string(to_string(s.pooling)));
    return s;
}

struct Built {
    std::vector<std::string> words;
    std::vector<AntonymPairSet> axis_config;
    std::vector<WordFeature> features;
    std::vector<SemanticAxis> axes;
    Source source;
};

// Features for the word list and axes, either built from an axis config or
// read from a prebuilt axis dump.
Built build_inputs(const Options& o, Run& run, const std::optional<SurveyTable>& survey,
                   bool need_words) {
    Built b;
    b.words = load_words(o, run, survey, need_words);
    require(!o.axes.empty(), ErrorKind::invalid_input, "--axes is required");
    run.input("axes", o.axes);
    const bool axis_dump = is_saxd(o.axes);
    if (!axis_dump) b.axis_config = io::read_axis_config(o.axes, o.required_pairs);
    const auto prompts = load_prompts(o, run);
    b.source = load_source(o, run, b.words, b.axis_config, prompts);
    run.param("prompt_set_hash", prompt_set_hash(prompts));
    auto result = build_all(*b.source.source, b.words, b.axis_config, prompts, b.source.layer,
                            b.source.pooling);
    b.features = std::move(result.features);
    if (axis_dump) {
        b.axes = axes_from_dump(io::read_saxd(o.axes));
        if (!b.features.empty())
            for (const auto& a : b.axes)
                require(a.vector.size() == b.features.front().vector.size(),
                        ErrorKind::dim_inconsistency,
                        "axis '" + a.axis_name + "' does not match the feature dimension");
    } else {
        b.axes = std::move(result.axes);
    }
    return b;
}

std::string axes_table_csv(const std::vector<SemanticAxis>& axes) {
    std::string out = "axis,pos_pole,neg_pole,pair_count,norm\n";
    for (const auto& a : axes)
        out += a.axis_name + "," + a.pos_pole + "," + a.neg_pole + "," +
               std::to_string(a.pair_count) + "," + report::format_double(norm(a.vector)) + "\n";
    return out;
}

// --- subcommands -------------------------------------------------------------

int cmd_extract(const Options& o) {
    Run run("extract", o);
    const auto survey = load_survey(o, run);
    auto words = load_words(o, run, survey, false);
    std::vector<AntonymPairSet> axis_config;
    if (!o.axes.empty()) {
        run.input("axes", o.axes);
        axis_config = io::read_axis_config(o.axes, o.required_pairs);
    }
    const auto prompts = load_prompts(o, run);
    const Source src = load_source(o, run, words, axis_config, prompts);
    // every word plus every antonym, first-seen order
    std::vector<std::string> all = words;
    std::set<std::string> seen(all.begin(), all.end());
    for (const auto& a : axis_config)
        for (const auto& [p, n] : a.pairs)
            for (const auto* w : {&p, &n})
                if (seen.insert(*w).second) all.push_back(*w);
    require(!all.empty(), ErrorKind::invalid_input, "nothing to extract: give --words or --axes");
    const auto built = build_all(*src.source, all, {}, prompts, src.layer, src.pooling);
    run.write_bytes("features.saxd",
                    io::encode_saxd(to_dump(built.features, src.source->source_id())));
    run.finish();
    std::cout << "extracted " << built.features.size() << " features at layer " << src.layer
              << "\n";
    return 0;
}

int cmd_build_axes(const Options& o) {
    Run run("build-axes", o);
    run.param("required_pairs", o.required_pairs);
    const auto survey = load_survey(o, run);
    Built b = build_inputs(o, run, survey, false);
    run.write_bytes("axes.saxd", io::encode_saxd(to_dump(b.axes, b.source.source->source_id())));
    run.write("axes.csv", axes_table_csv(b.axes));
    run.finish();
    std::cout << "built " << b.axes.size() << " axes\n";
    return 0;
}

int cmd_project(const Options& o) {
    Run run("project", o);
    const auto survey = load_survey(o, run);
    Built b = build_inputs(o, run, survey, true);
    run.write("projections.csv", report::projection_csv(project(b.features, b.axes)));
    run.finish();
    std::cout << "projected " << b.features.size() << " words on " << b.axes.size() << " axes\n";
    return 0;
}

int cmd_geometry(const Options& o) {
    Run run("geometry", o);
    const auto survey = load_survey(o, run);
    require(survey.has_value(), ErrorKind::invalid_input, "geometry needs --survey");
    Built b = build_inputs(o, run, survey, true);
    const ProjectionTable proj = project(b.features, b.axes);
    const Vector r = projection_survey_correlations(proj, *survey);
    const PairwiseSet pw = pairwise_matrices(proj, *survey, b.axes);
    const StructureAlignment cos_vs_survey = structure_alignment(pw.survey, pw.cosine);
    const StructureAlignment proj_vs_survey = structure_alignment(pw.survey, pw.projection);

    run.write("projections.csv", report::projection_csv(proj));
    run.write("projection_survey_r.csv", report::axis_values_csv(proj.axes, r, "r"));
    run.write("pairwise_survey.csv", report::matrix_csv(proj.axes, proj.axes, pw.survey.values));
    run.write("pairwise_projection.csv",
              report::matrix_csv(proj.axes, proj.axes, pw.projection.values));
    run.write("pairwise_cosine.csv", report::matrix_csv(proj.axes, proj.axes, pw.cosine.values));
    run.write("alignment_cosine_vs_survey.csv",
              report::pairs_csv(cos_vs_survey, "survey_r", "axis_cosine"));
    run.write("alignment_projection_vs_survey.csv",
              report::pairs_csv(proj_vs_survey, "survey_r", "projection_r"));
    json doc = {{"axes", proj.axes},
                {"projection_survey_r", r},
                {"alignment_cosine_vs_survey", report::to_json(cos_vs_survey)},
                {"alignment_projection_vs_survey", report::to_json(proj_vs_survey)}};
    run.write_json("geometry.json", doc);
    run.finish();

    double lo = 1.0;
    for (double x : r) lo = std::min(lo, x);
    std::printf("projection-survey r: min %.4f over %zu axes\n", lo, r.size());
    std::printf("axis cosine vs survey correlation: r = %.4f\n", cos_vs_survey.r);
    std::printf("projection vs survey correlation: r = %.4f\n", proj_vs_survey.r);
    return 0;
}

int cmd_subspace(const Options& o) {
    Run run("subspace", o);
    run.param("llm_subspace", o.llm_subspace);
    const auto survey = load_survey(o, run);
    require(survey.has_value(), ErrorKind::invalid_input, "subspace needs --survey");
    require(o.llm_subspace == "raw_axes" || o.llm_subspace == "projections",
            ErrorKind::invalid_input, "--llm-subspace must be raw_axes or projections");
    Built b = build_inputs(o, run, survey, true);
    const ProjectionTable proj = project(b.features, b.axes);
    const SubspaceReport rep = subspace_analysis(
        proj, *survey, b.axes,
        o.llm_subspace == "raw_axes" ? LlmSubspace::raw_axes : LlmSubspace::projections);
    run.write("scree.csv", report::scree_csv(rep));
    run.write("loadings.csv", report::loadings_csv(rep));
    run.write_json("subspace.json", report::to_json(rep));
    run.finish();

    auto top3 = [](const Vector& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(3, v.size()); ++i) s += v[i];
        return s;
    };
    std::printf("top-3 explained variance: survey %.4f, projections %.4f, raw axes %.4f\n",
                top3(rep.scree_survey), top3(rep.scree_projections), top3(rep.scree_raw_axes));
    std::printf("CCA correlations:");
    for (double c : rep.cca.correlations) std::printf(" %.4f", c);
    std::printf("\n");
    return 0;
}

int cmd_steer(const Options& o) {
    Run run("steer", o);
    run.param("alpha", o.alpha);
    run.param("units", o.units);
    run.param("steer_with", o.steer_with);
    run.param("readout", o.readout);
    const Units units = parse_units(o.units);
    require(o.steer_with == "built" || o.steer_with == "planted", ErrorKind::invalid_input,
            "--steer-with must be built or planted");
    require(o.readout == "final" || o.readout == "last-word", ErrorKind::invalid_input,
            "--readout must be final or last-word");
    require(!o.source.empty() && !is_saxd(o.source), ErrorKind::invalid_input,
            "steer needs a toy model config as --source (a dump cannot be run)");

    const auto survey = load_survey(o, run);
    Built b = build_inputs(o, run, survey, true);
    std::vector<SemanticAxis> axes = b.axes;
    if (o.steer_with == "planted") {
        const auto& planted = b.source.model->config().planted;
        require(planted.has_value(), ErrorKind::invalid_input,
                "--steer-with planted needs a planted toy model");
        axes.clear();
        for (const auto& p : planted->axes) {
            SemanticAxis a;
            a.axis_name = p.name;
            a.pos_pole = p.pos_token;
            a.neg_pole = p.neg_token;
            a.vector = a.unit_vector = p.direction;
            a.pair_count = 1;
            axes.push_back(std::move(a));
        }
    }

    SpilloverOptions opts;
    opts.alpha = o.alpha;
    opts.layer = b.source.layer;
    opts.site = o.readout == "final" ? ReadoutSite::final_token : ReadoutSite::last_word_token;
    const SpilloverRun result = run_spillover(*b.source.model, b.words, axes, opts);

    std::vector<std::string> labels;
    for (const auto& a : axes) labels.push_back(a.axis_name);
    DenseMatrix cos = DenseMatrix::identity(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i)
        for (std::size_t j = i + 1; j < axes.size(); ++j)
            cos(i, j) = cos(j, i) = cosine_similarity(axes[i].vector, axes[j].vector);
    const PairwiseMatrix cosines{labels, cos, PairwiseKind::axis_cosine};

    run.write("trials.csv", report::trials_csv(result.trials));
    run.write("failures.csv", report::failures_csv(result.failures));
    run.write("spillover_prob.csv", report::spillover_csv(result.matrix, Units::probability));
    run.write("spillover_logodds.csv", report::spillover_csv(result.matrix, Units::log_odds));
    run.write("pairwise_cosine.csv", report::matrix_csv(labels, labels, cos));

    json doc = {{"alpha", o.alpha}, {"layer", b.source.layer}, {"units", o.units},
                {"failures", result.failures.size()}, {"trials", result.trials.size()}};
    for (Units u : {Units::probability, Units::log_odds}) {
        const std::string key = std::string(to_string(u));
        try {
            const SpilloverScatter sc = spillover_vs_cosine(result.matrix, cosines, u);
            doc["spillover_vs_cosine"][key] = report::to_json(sc);
            if (u == units) run.write("spillover_vs_cosine.csv", report::scatter_csv(sc));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::undefined_correlation) throw;
            run.warn("spillover-vs-cosine (" + key + "): " + e.what());
            doc["spillover_vs_cosine"][key] = nullptr;
        }
    }
    const auto summary = on_off_target_summary(result.matrix, units);
    run.write("on_off_target.csv", report::summary_csv(summary));
    doc["on_off_target"] = report::to_json(summary);
    run.write_json("steer.json", doc);
    run.finish();

    if (!result.failures.empty())
        run.warn(std::to_string(result.failures.size()) +
                 " (word, axis) prompt(s) failed; see failures.csv");
    for (const char* key : {"prob", "logodds"}) {
        const auto& v = doc["spillover_vs_cosine"][key];
        if (!v.is_null()) std::printf("spillover vs cosine (%s): r = %.4f\n", key, v["r"].get<double>());
    }
    return 0;
}

int cmd_report(const Options& o) {
    Run run("report", o);
    const fs::path from = o.from.empty() ? fs::path(o.out) : fs::path(o.from);
    std::size_t emitted = 0;
    auto emit = [&](const std::string& name, const report::Svg& svg) {
        for (const auto& w : svg.warnings) run.warn(name + ": " + w);
        run.write(name, svg.text);
        ++emitted;
    };
    auto pairs_to_points = [](const json& pairs, int xi, int yi) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : pairs) pts.emplace_back(p[xi].get<double>(), p[yi].get<double>());
        return pts;
    };

    if (fs::exists(from / "geometry.json")) {
        run.input("geometry", (from / "geometry.json").string());
        const json g = io::read_json(from / "geometry.json");
        emit("fig_projection_survey_r.svg",
             report::bar_svg("Projection vs survey correlation per axis", "Pearson r",
                             g["axes"].get<std::vector<std::string>>(),
                             g["projection_survey_r"].get<Vector>()));
        const json& a = g["alignment_cosine_vs_survey"];
        emit("fig_structure_cosine.svg",
             report::scatter_svg({"Axis cosine vs survey correlation", "survey correlation",
                                  "axis cosine", pairs_to_points(a["pairs"], 2, 3),
                                  a["r"].get<double>()}));
        const json& p = g["alignment_projection_vs_survey"];
        emit("fig_structure_projection.svg",
             report::scatter_svg({"Projection correlation vs survey correlation",
                                  "survey correlation", "projection correlation",
                                  pairs_to_points(p["pairs"], 2, 3), p["r"].get<double>()}));
    }
    if (fs::exists(from / "subspace.json")) {
        run.input("subspace", (from / "subspace.json").string());
        const json s = io::read_json(from / "subspace.json");
        emit("fig_scree.svg",
             report::scree_svg("Explained variance by component",
                               {{"survey", s["scree_survey"].get<Vector>()},
                                {"projections", s["scree_projections"].get<Vector>()},
                                {"raw axes", s["scree_raw_axes"].get<Vector>()}}));
        const auto xs = s["cca_survey_scores"].get<std::vector<Vector>>();
        const auto ys = s["cca_llm_scores"].get<std::vector<Vector>>();
        const auto corr = s["cca_correlations"].get<Vector>();
        for (std::size_t k = 0; k < corr.size(); ++k) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i][k], ys[i][k]);
            emit("fig_cca_" + std::to_string(k + 1) + ".svg",
                 report::scatter_svg({"Canonical variate " + std::to_string(k + 1),
                                      "survey loading", "model loading", pts, corr[k]}));
        }
    }
    if (fs::exists(from / "steer.json")) {
        run.input("steer", (from / "steer.json").string());
        const json s = io::read_json(from / "steer.json");
        for (const char* key : {"prob", "logodds"}) {
            const json& sc = s["spillover_vs_cosine"][key];
            if (sc.is_null()) continue;
            emit(std::string("fig_spillover_") + key + ".svg",
                 report::scatter_svg({std::string("Spillover vs axis cosine (") + key + ")",
                                      "axis cosine", "mean spillover",
                                      pairs_to_points(sc["points"], 2, 3),
                                      sc["r"].get<double>()}));
        }
        std::vector<std::pair<double, double>> pts;
        for (const auto& t : s["on_off_target"])
            pts.emplace_back(t["max_off_target"].get<double>(), t["on_target"].get<double>());
        emit("fig_on_off_target.svg",
             report::scatter_svg({"On-target vs largest off-target shift",
                                  "max |off-target| shift", "on-target shift", pts, {}}));
    }
    if (emitted == 0)
        run.warn("no geometry.json, subspace.json or steer.json under '" + from.string() + "'");
    run.finish();
    std::cout << "wrote " << emitted << " plot(s)\n";
    return 0;
}

int cmd_synth_world(const Options& o) {
    Run run("synth-world", o);
    SyntheticWorldSpec spec;
    spec.n_words = o.n_words;
    spec.n_axes = o.n_axes;
    spec.n_factors = o.n_factors;
    spec.dim = o.dim;
    spec.pairs_per_axis = o.pairs;
    spec.noise_sigma = o.noise;
    spec.whiten_scores = !o.no_whiten;
    spec.seed = o.seed;
    run.param("seed", spec.seed);
    run.param("n_words", spec.n_words);
    run.param("n_axes", spec.n_axes);
    run.param("n_factors", spec.n_factors);
    run.param("dim", spec.dim);
    run.param("pairs_per_axis", spec.pairs_per_axis);
    run.param("noise_sigma", spec.noise_sigma);
    run.param("whiten_scores", spec.whiten_scores);

    const SyntheticWorld w = generate_synthetic_world(spec);
    std::vector<WordFeature> all = w.word_features;
    all.insert(all.end(), w.pair_features.begin(), w.pair_features.end());
    run.write_bytes("features.saxd",
                    io::encode_saxd(to_dump(all, "synthetic-seed" + std::to_string(spec.seed))));
    run.write_json("axes.json", io::axis_config_json(w.axis_config));
    run.write("survey.csv", format_survey_csv(w.survey));
    std::string words;
    for (const auto& x : w.survey.words) words += x + "\n";
    run.write("words.txt", words);
    run.write_json("truth.json", {{"loadings", report::to_json(w.truth.loadings)},
                                  {"planted_cosines", report::to_json(w.truth.planted_cosines)},
                                  {"common_share", w.truth.common_share},
                                  {"axes", w.survey.scales}});
    run.finish();
    std::cout << "synthetic world: " << spec.n_words << " words, " << spec.n_axes << " axes, dim "
              << spec.dim << "\n";
    return 0;
}

int cmd_selftest(const Options& o) {
    std::printf("kernels: %s\n", std::string(kernels::to_string(kernels::active().isa)).c_str());
    const auto laws = linear_readout_selftest(o.seeds, o.seed, o.alpha);
    bool ok = true;
    for (const auto& law : laws) {
        std::printf("%s  %s (worst %.3g, tol %.3g, %zu seeds)\n", law.pass ? "PASS" : "FAIL",
                    law.name.c_str(), law.worst, law.tolerance, o.seeds);
        ok = ok && law.pass;
    }
    return ok ? 0 : 2;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::io:
        case ErrorKind::convergence:
        case ErrorKind::undefined_correlation:
        case ErrorKind::rank_deficient: return 2;
        default: return 1;
    }
}

std::string hint(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::out_of_vocabulary:
            return "drop the toy config's explicit vocab so it is derived from the inputs";
        case ErrorKind::label_mismatch:
            return "word and scale labels must match the survey (case and spaces ignored)";
        case ErrorKind::bad_magic:
        case ErrorKind::version_mismatch:
        case ErrorKind::truncated:
        case ErrorKind::dim_inconsistency: return "regenerate the dump with the extractor";
        case ErrorKind::parse: return "check the file against the formats described in README.md";
        case ErrorKind::aggregate: return "every failed item is listed above";
        case ErrorKind::io: return "check the path and permissions";
        default: return "run with --help for usage";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semaxis: semantic axes, geometry and steering on toy and dumped activations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options o;

    auto add_out = [&](CLI::App* s) { s->add_option("--out", o.out, "Output directory")->required(); };
    auto add_source = [&](CLI::App* s) {
        s->add_option("--source", o.source, "Toy model config (JSON) or SAXD feature dump");
        s->add_option("--prompts", o.prompts, "Prompt set JSON (four templates with {word})");
        auto* layer = s->add_option("--layer", o.layer, "Residual-stream layer");
        s->add_option("--depth", o.depth, "Layer as a fraction of depth, in (0, 1]")
            ->excludes(layer);
        s->add_option("--pooling", o.pooling, "Token pooling: mean or last");
    };
    auto add_axes = [&](CLI::App* s) {
        s->add_option("--axes", o.axes, "Axis config JSON, or an axis dump from build-axes");
        s->add_option("--pairs-per-axis", o.required_pairs,
                      "Required antonym pairs per axis (0 = any)");
    };
    auto add_words = [&](CLI::App* s) {
        s->add_option("--words", o.words, "Word list, one per line (default: survey words)");
        s->add_option("--survey", o.survey, "Survey CSV: word, then one column per scale");
        s->add_flag("--strict-survey", o.strict_survey, "Fail on any rejected survey row");
    };

    auto* extract = app.add_subcommand("extract", "Pool word features into a SAXD dump");
    add_source(extract);
    add_axes(extract);
    add_words(extract);
    add_out(extract);

    auto* build = app.add_subcommand("build-axes", "Build semantic axes from antonym pairs");
    add_source(build);
    add_axes(build);
    add_words(build);
    add_out(build);

    auto* proj = app.add_subcommand("project", "Project word features on the axes");
    add_source(proj);
    add_axes(proj);
    add_words(proj);
    add_out(proj);

    auto* geom = app.add_subcommand("geometry", "Projection-survey and pairwise comparisons");
    add_source(geom);
    add_axes(geom);
    add_words(geom);
    add_out(geom);

    auto* sub = app.add_subcommand("subspace", "PCA of survey, projections and axes; CCA");
    add_source(sub);
    add_axes(sub);
    add_words(sub);
    add_out(sub);
    sub->add_option("--llm-subspace", o.llm_subspace, "raw_axes or projections");

    auto* steer = app.add_subcommand("steer", "Spillover experiment on a toy model");
    add_source(steer);
    add_axes(steer);
    add_words(steer);
    add_out(steer);
    steer->add_option("--alpha", o.alpha, "Norm-relative steering strength")->capture_default_str();
    steer->add_option("--units", o.units, "Units for the headline scatter: prob or logodds");
    steer->add_option("--steer-with", o.steer_with, "built (feature axes) or planted");
    steer->add_option("--readout", o.readout, "final or last-word");

    auto* rep = app.add_subcommand("report", "Render SVG plots from analysis JSON");
    add_out(rep);
    rep->add_option("--from", o.from, "Directory holding the analysis JSON (default: --out)");

    auto* synth = app.add_subcommand("synth-world", "Generate a planted shared-factor world");
    add_out(synth);
    synth->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
    synth->add_option("--n-words", o.n_words, "Words")->capture_default_str();
    synth->add_option("--n-axes", o.n_axes, "Axes and survey scales")->capture_default_str();
    synth->add_option("--factors", o.n_factors, "Latent factors")->capture_default_str();
    synth->add_option("--dim", o.dim, "Feature dimension")->capture_default_str();
    synth->add_option("--pairs", o.pairs, "Antonym pairs per axis")->capture_default_str();
    synth->add_option("--noise", o.noise, "Noise sigma")->capture_default_str();
    synth->add_flag("--no-whiten", o.no_whiten, "Keep raw factor scores");

    auto* self = app.add_subcommand("selftest", "Check the linear-readout steering laws");
    self->add_option("--seeds", o.seeds, "Planted worlds to test")->capture_default_str();
    self->add_option("--seed", o.seed, "First seed")->capture_default_str();
    self->add_option("--alpha", o.alpha, "Steering strength")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*extract) return cmd_extract(o);
        if (*build) return cmd_build_axes(o);
        if (*proj) return cmd_project(o);
        if (*geom) return cmd_geometry(o);
        if (*sub) return cmd_subspace(o);
        if (*steer) return cmd_steer(o);
        if (*rep) return cmd_report(o);
        if (*synth) return cmd_synth_world(o);
        if (*self) return cmd_selftest(o);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n"
                  << "hint: " << hint(e.kind()) << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
