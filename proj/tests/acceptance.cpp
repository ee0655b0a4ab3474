// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "semaxis/axis_builder.hpp"
#include "semaxis/error.hpp"
#include "semaxis/geometry.hpp"
#include "semaxis/linalg.hpp"
#include "semaxis/random.hpp"
#include "semaxis/saxd.hpp"
#include "semaxis/selftest.hpp"
#include "semaxis/steering.hpp"
#include "semaxis/synthetic.hpp"

namespace fs = std::filesystem;
using namespace semaxis;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string id;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    DenseMatrix m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

// --- 1 ---------------------------------------------------------------------

Outcome axis_oracle() {
    Rng rng(101);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t d = 1 + rng.below(256);
        std::vector<std::pair<WordFeature, WordFeature>> pairs(10);
        for (auto& [p, n] : pairs) {
            p.vector.resize(d);
            n.vector.resize(d);
            for (std::size_t i = 0; i < d; ++i) p.vector[i] = rng.normal(), n.vector[i] = rng.normal();
            p.word = "p", n.word = "n";
        }
        const auto axis = build_axis("x", pairs);
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (const auto& [p, n] : pairs) acc += p.vector[i] - n.vector[i];
            worst = std::max(worst, std::abs(axis.vector[i] - acc / 10.0));
        }
    }
    return {worst <= 1e-12, "100 instances, max |diff| " + fmt("%.3g", worst)};
}

// --- 2 ---------------------------------------------------------------------

Outcome pca_orthogonal() {
    Rng rng(202);
    const auto m = random_matrix(10000, 32, rng);
    const auto p = pca(m, 32, Preprocessing::center);
    const auto [lo, hi] = std::minmax_element(p.explained_ratio.begin(), p.explained_ratio.end());
    const bool ok = *lo >= 1.0 / 32 - 0.005 && *hi <= 1.0 / 32 + 0.005;
    return {ok, "per-component share in [" + fmt("%.4f", *lo) + ", " + fmt("%.4f", *hi) +
                    "], target 0.0312 +- 0.005"};
}

// --- 3 ---------------------------------------------------------------------

Outcome pca_cca_oracles() {
    Rng rng(303);
    // 2x2: sample eigenvalues against the characteristic polynomial
    double eig_worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const double a = rng.uniform(0.5, 3), c = rng.uniform(-0.9, 0.9), b = rng.uniform(0.5, 3);
        const std::size_t n = 500;
        DenseMatrix m(n, 2);
        for (std::size_t r = 0; r < n; ++r) {
            const double z1 = rng.normal(), z2 = rng.normal();
            m(r, 0) = a * z1;
            m(r, 1) = b * (c * z1 + std::sqrt(1 - c * c) * z2);
        }
        const auto p = pca(m, 2, Preprocessing::center);
        double mx = 0, my = 0;
        for (std::size_t r = 0; r < n; ++r) mx += m(r, 0), my += m(r, 1);
        mx /= n, my /= n;
        double sxx = 0, syy = 0, sxy = 0;
        for (std::size_t r = 0; r < n; ++r) {
            sxx += (m(r, 0) - mx) * (m(r, 0) - mx);
            syy += (m(r, 1) - my) * (m(r, 1) - my);
            sxy += (m(r, 0) - mx) * (m(r, 1) - my);
        }
        sxx /= n - 1, syy /= n - 1, sxy /= n - 1;
        const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
        const double disc = std::sqrt(tr * tr - 4 * det);
        eig_worst = std::max({eig_worst, std::abs(p.eigenvalues[0] - (tr + disc) / 2),
                              std::abs(p.eigenvalues[1] - (tr - disc) / 2)});
    }

    double inv_worst = 0.0, ident_worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto x = random_matrix(60, 3, rng);
        auto y = random_matrix(60, 3, rng);
        for (std::size_t r = 0; r < 60; ++r) y(r, 0) += x(r, 2), y(r, 1) -= 0.4 * x(r, 0);
        const auto base = cca(x, y, 3);
        const auto moved = cca(matmul(x, random_matrix(3, 3, rng)), matmul(y, random_matrix(3, 3, rng)), 3);
        for (std::size_t i = 0; i < 3; ++i)
            inv_worst = std::max(inv_worst, std::abs(moved.correlations[i] - base.correlations[i]));
        for (double c : cca(x, x, 3).correlations) ident_worst = std::max(ident_worst, std::abs(c - 1));
        for (double c : cca(x, matmul(x, random_matrix(3, 3, rng)), 3).correlations)
            ident_worst = std::max(ident_worst, std::abs(c - 1));
    }
    const bool ok = eig_worst <= 1e-6 && inv_worst <= 1e-6 && ident_worst <= 1e-6;
    return {ok, "2x2 eig " + fmt("%.2g", eig_worst) + ", recombination " + fmt("%.2g", inv_worst) +
                    ", identical subspace " + fmt("%.2g", ident_worst)};
}

// --- 4 ---------------------------------------------------------------------

Outcome planted_pipeline() {
    SyntheticWorldSpec spec;
    spec.seed = 404;
    const auto world = generate_synthetic_world(spec);

    // through the on-disk format and the dump-backed source, as the CLI does
    std::vector<WordFeature> all = world.word_features;
    all.insert(all.end(), world.pair_features.begin(), world.pair_features.end());
    const DumpSource src(io::decode_saxd(io::encode_saxd(to_dump(all, "synthetic"))));
    const auto built = build_all(src, world.survey.words, world.axis_config, default_prompts(),
                                 spec.layer, Pooling::mean_tokens);
    const auto proj = project(built.features, built.axes);
    const auto r = projection_survey_correlations(proj, world.survey);
    const auto pw = pairwise_matrices(proj, world.survey, built.axes);
    const double align = structure_alignment(pw.cosine, pw.survey).r;
    const auto sub = subspace_analysis(proj, world.survey, built.axes);
    const double top3 = sub.scree_raw_axes[0] + sub.scree_raw_axes[1] + sub.scree_raw_axes[2];
    const double min_r = *std::min_element(r.begin(), r.end());
    const double min_cca = *std::min_element(sub.cca.correlations.begin(), sub.cca.correlations.end());

    const bool a = r.size() == 32 && min_r > 0.8;
    const bool b = align > 0.9;
    const bool c = std::abs(top3 - world.truth.common_share) <= 0.05;
    const bool d = min_cca >= 0.95;
    return {a && b && c && d,
            std::string("(a) min r ") + fmt("%.4f", min_r) + (a ? "" : " FAIL") +
                "; (b) alignment " + fmt("%.4f", align) + (b ? "" : " FAIL") + "; (c) top-3 " +
                fmt("%.4f", top3) + " vs planted " + fmt("%.4f", world.truth.common_share) +
                (c ? "" : " FAIL") + "; (d) min CCA " + fmt("%.4f", min_cca) + (d ? "" : " FAIL")};
}

// --- 5 ---------------------------------------------------------------------

Outcome steering_exactness() {
    const auto laws = linear_readout_selftest(20, 1, 0.33);
    bool ok = true;
    std::string detail = "20 seeds;";
    for (const auto& l : laws) {
        ok = ok && l.pass;
        detail += " " + l.name + " worst " + fmt("%.2g", l.worst) + (l.pass ? ";" : " FAIL;");
    }
    return {ok, detail};
}

// --- 6 ---------------------------------------------------------------------

Outcome nonlinear_sanity() {
    std::vector<double> rs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PlantedSteeringSpec spec;
        spec.seed = seed;
        spec.n_axes = 8;
        spec.n_words = 10;
        spec.d_model = 64;
        spec.n_layers = 4;
        spec.n_heads = 4;
        spec.final_norm = toy::FinalNorm::rms;
        spec.readout_norm = 4.0;
        const auto w = make_planted_steering_world(spec);
        SpilloverOptions o;
        o.layer = toy::resolve_layer(0.3, spec.n_layers);
        o.site = ReadoutSite::final_token;
        const auto run = run_spillover(w.model, w.words, w.axes, o);
        std::vector<std::string> labels;
        for (const auto& a : w.axes) labels.push_back(a.axis_name);
        const PairwiseMatrix cos{labels, w.cosines, PairwiseKind::axis_cosine};
        rs.push_back(spillover_vs_cosine(run.matrix, cos, Units::log_odds).r);
    }
    const double lo = *std::min_element(rs.begin(), rs.end());
    double mean = 0.0;
    for (double r : rs) mean += r / static_cast<double>(rs.size());
    std::string per;
    for (double r : rs) per += fmt(" %.3f", r);
    return {lo > 0.5, "10 seeds, layer 1 of 4, log-odds r min " + fmt("%.3f", lo) + " mean " +
                          fmt("%.3f", mean) + " [" + per + " ]"};
}

// --- 7 ---------------------------------------------------------------------

Outcome on_off_target() {
    std::size_t axes_checked = 0, violations = 0;
    double tightest = 1e300;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        PlantedSteeringSpec spec;
        spec.seed = seed;
        spec.n_axes = 8;
        spec.max_abs_cosine = 0.8;
        const auto w = make_planted_steering_world(spec);
        SpilloverOptions o;
        o.layer = 0;
        o.site = ReadoutSite::last_word_token;
        const auto run = run_spillover(w.model, w.words, w.axes, o);
        for (const auto& s : on_off_target_summary(run.matrix, Units::probability)) {
            ++axes_checked;
            if (!(s.on_target > s.max_off_target)) ++violations;
            tightest = std::min(tightest, s.on_target - s.max_off_target);
        }
    }
    return {violations == 0, std::to_string(axes_checked) + " axes over 20 seeds, " +
                                 std::to_string(violations) + " violations, smallest margin " +
                                 fmt("%.4f", tightest) + " prob"};
}

// --- 8 ---------------------------------------------------------------------

Outcome saxd_round_trip() {
    Rng rng(808);
    std::size_t mismatches = 0;
    std::map<std::size_t, std::size_t> special;
    for (int t = 0; t < 1000; ++t) {
        std::size_t dim;
        switch (t % 10) {
            case 0: dim = 64; break;
            case 1: dim = 3072; break;
            case 2: dim = 8192; break;
            default: dim = 1 + rng.below(1024);
        }
        if (dim == 64 || dim == 3072 || dim == 8192) ++special[dim];
        io::SaxdDump d;
        d.header.model_id = "m" + std::to_string(t);
        d.header.layer = rng.below(80);
        d.header.dim = dim;
        d.header.pooling = t % 2 ? "mean" : "last";
        if (t % 7 == 0) d.header.extra["note"] = "extra-" + std::to_string(t);
        const std::size_t count = rng.below(dim >= 3072 ? 6 : 20);
        for (std::size_t i = 0; i < count; ++i) {
            io::SaxdRecord r;
            r.name = "w" + std::to_string(i) + (i % 3 == 0 ? "\xC3\xA9" : "");
            r.values.resize(dim);
            for (float& v : r.values) v = static_cast<float>(rng.normal() * 10);
            d.records.push_back(std::move(r));
        }
        const auto bytes = io::encode_saxd(d);
        const auto back = io::decode_saxd(bytes);
        if (back.records != d.records || io::encode_saxd(back) != bytes) ++mismatches;
    }
    return {mismatches == 0, "1000 dumps (dim 64: " + std::to_string(special[64]) + ", 3072: " +
                                 std::to_string(special[3072]) + ", 8192: " +
                                 std::to_string(special[8192]) + "), " +
                                 std::to_string(mismatches) + " mismatches"};
}

// --- 9 ---------------------------------------------------------------------

int sh(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool pipeline(const fs::path& root, std::string& why) {
    const std::string cli = SEMAXIS_CLI_PATH;
    const fs::path configs = SEMAXIS_CONFIG_DIR;
    const auto world = root / "world";
    const auto out = root / "out";
    const std::string log = " >> " + (root.parent_path() / (root.filename().string() + ".log")).string() + " 2>&1";
    const std::string data = " --source " + (world / "features.saxd").string() + " --axes " +
                             (world / "axes.json").string() + " --survey " +
                             (world / "survey.csv").string() + " --out " + out.string();
    const std::vector<std::string> steps = {
        "synth-world --seed 7 --out " + world.string(),
        "build-axes" + data,
        "project" + data,
        "geometry" + data,
        "subspace" + data,
        "steer --source " + (configs / "toy_planted.json").string() + " --axes " +
            (configs / "demo_axes.json").string() + " --words " +
            (configs / "demo_words.txt").string() + " --depth 0.3 --steer-with planted --out " +
            out.string(),
        "report --out " + out.string(),
    };
    for (const auto& s : steps)
        if (sh(cli + " " + s + log) != 0) {
            why = "step failed: " + s.substr(0, s.find(' '));
            return false;
        }
    return true;
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "semaxis_acceptance_determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    std::string why;
    if (!pipeline(base / "a", why) || !pipeline(base / "b", why)) return {false, why};

    std::map<std::string, std::string> a, b;
    for (auto* tree : {&a, &b}) {
        const auto dir = base / (tree == &a ? "a" : "b");
        for (const auto& e : fs::recursive_directory_iterator(dir))
            if (e.is_regular_file()) (*tree)[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    std::size_t differing = 0;
    std::string first;
    for (const auto& [name, bytes] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes) {
            if (!differing++) first = name;
        }
    }
    if (a.size() != b.size() && !differing++) first = "(file sets differ)";
    const bool ok = differing == 0 && a.size() > 20;
    if (ok) fs::remove_all(base);
    return {ok, std::to_string(a.size()) + " files per tree, " + std::to_string(differing) +
                    " differ" + (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"axis-mean-of-differences-oracle", 1, axis_oracle},
        {"pca-orthogonal-baseline", 5, pca_orthogonal},
        {"pca-cca-oracles", 5, pca_cca_oracles},
        {"planted-world-pipeline", 30, planted_pipeline},
        {"steering-exactness-linear", 60, steering_exactness},
        {"nonlinear-spillover-sanity", 300, nonlinear_sanity},
        {"on-off-target-summary", 60, on_off_target},
        {"saxd-round-trip", 10, saxd_round_trip},
        {"pipeline-determinism", 600, determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = out.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s  [%zu] %s: %s (%.2f s of %.0f s%s)\n", pass ? "PASS" : "FAIL", i + 1,
                    c.id.c_str(), out.detail.c_str(), secs, c.budget_s,
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
