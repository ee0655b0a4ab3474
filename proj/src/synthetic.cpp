#include "semaxis/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "semaxis/error.hpp"
#include "semaxis/random.hpp"

namespace semaxis {

namespace {

std::string numbered(const char* prefix, std::size_t i, std::size_t count) {
    const int width = count > 1000 ? static_cast<int>(std::to_string(count - 1).size())
                      : count > 100 ? 3
                                    : 2;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
    return buf;
}

double round_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

DenseMatrix orthonormal_rows(Rng& rng, std::size_t k, std::size_t dim) {
    DenseMatrix q(k, dim);
    for (std::size_t i = 0; i < k; ++i) {
        for (;;) {
            Vector v(dim);
            for (double& x : v) x = rng.normal();
            for (std::size_t pass = 0; pass < 2; ++pass)
                for (std::size_t j = 0; j < i; ++j) {
                    double d = 0.0;
                    for (std::size_t c = 0; c < dim; ++c) d += v[c] * q(j, c);
                    for (std::size_t c = 0; c < dim; ++c) v[c] -= d * q(j, c);
                }
            const double len = norm(v);
            if (len < 1e-6) continue;
            for (std::size_t c = 0; c < dim; ++c) q(i, c) = v[c] / len;
            break;
        }
    }
    return q;
}

// Centers the columns and rescales so the sample covariance is exactly I
// (up to rounding).
void whiten_columns(DenseMatrix& s) {
    const std::size_t n = s.rows(), f = s.cols();
    const Vector mean = mean_pool(s);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) s(i, j) -= mean[j];
    DenseMatrix cov(f, f);
    for (std::size_t a = 0; a < f; ++a)
        for (std::size_t b = 0; b < f; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += s(i, a) * s(i, b);
            cov(a, b) = acc / static_cast<double>(n - 1);
        }
    const SymmetricEigen eig = eigen_symmetric(cov);
    DenseMatrix scaled = eig.vectors;
    for (std::size_t j = 0; j < f; ++j) {
        require(eig.values[j] > 1e-12, ErrorKind::rank_deficient,
                "synthetic factor scores are degenerate");
        for (std::size_t r = 0; r < f; ++r) scaled(r, j) /= std::sqrt(eig.values[j]);
    }
    s = matmul(s, matmul(scaled, eig.vectors.transpose()));
}

WordFeature make_feature(std::string word, const Vector& v, const SyntheticWorldSpec& spec) {
    Vector r(v.size());
    for (std::size_t c = 0; c < v.size(); ++c) r[c] = round_f32(v[c]);
    return {std::move(word), std::move(r), spec.layer, Pooling::mean_tokens,
            "synthetic-seed" + std::to_string(spec.seed), ""};
}

}  // namespace

void validate(const SyntheticWorldSpec& spec) {
    require(spec.n_factors >= 1, ErrorKind::invalid_input, "synthetic world needs >= 1 factor");
    require(spec.dim >= spec.n_factors, ErrorKind::invalid_input,
            "synthetic dim must be >= n_factors");
    require(spec.n_words > spec.n_factors + 1, ErrorKind::invalid_input,
            "synthetic world needs more words than factors + 1");
    require(spec.n_axes >= 2, ErrorKind::invalid_input, "synthetic world needs >= 2 axes");
    require(spec.pairs_per_axis >= 1, ErrorKind::invalid_input, "need >= 1 pair per axis");
    require(spec.noise_sigma >= 0.0 && std::isfinite(spec.noise_sigma),
            ErrorKind::invalid_input, "noise_sigma must be finite and >= 0");
}

SyntheticWorld generate_synthetic_world(const SyntheticWorldSpec& spec) {
    validate(spec);
    const std::size_t n = spec.n_words, m = spec.n_axes, f = spec.n_factors, d = spec.dim;
    const double sigma = spec.noise_sigma;
    Rng rng(spec.seed);
    SyntheticWorld world;
    auto& truth = world.truth;

    truth.loadings = DenseMatrix(m, f);
    for (std::size_t j = 0; j < m; ++j) {
        Vector row(f);
        double len = 0.0;
        while (len < 1e-6) {
            for (double& x : row) x = rng.normal();
            len = norm(row);
        }
        for (std::size_t k = 0; k < f; ++k) truth.loadings(j, k) = row[k] / len;
    }
    truth.factor_directions = orthonormal_rows(rng, f, d);
    truth.planted_cosines = matmul(truth.loadings, truth.loadings.transpose());
    for (std::size_t i = 0; i < m; ++i) {
        truth.planted_cosines(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) truth.planted_cosines(i, j) = truth.planted_cosines(j, i);
    }
    truth.common_share = 1.0 / (1.0 + sigma * sigma);

    truth.axis_vectors = matmul(truth.loadings, truth.factor_directions);
    const double axis_noise = sigma / std::sqrt(static_cast<double>(d));
    for (double& x : truth.axis_vectors.data()) x += axis_noise * rng.normal();

    truth.word_scores = DenseMatrix(n, f);
    for (double& x : truth.word_scores.data()) x = rng.normal();
    if (spec.whiten_scores) whiten_columns(truth.word_scores);

    // a shared offset, like the large common component of real activations
    Vector offset(d);
    for (double& x : offset) x = 2.0 * rng.normal() / std::sqrt(static_cast<double>(d));

    // survey
    world.survey.ratings = DenseMatrix(n, m);
    for (std::size_t j = 0; j < m; ++j)
        world.survey.scales.push_back(numbered("p", j, m) + "-" + numbered("n", j, m));
    for (std::size_t i = 0; i < n; ++i) {
        world.survey.words.push_back(numbered("w", i, n));
        for (std::size_t j = 0; j < m; ++j) {
            double r = 4.0;
            for (std::size_t k = 0; k < f; ++k) r += truth.word_scores(i, k) * truth.loadings(j, k);
            world.survey.ratings(i, j) = r + sigma * rng.normal();
        }
    }

    // word features
    for (std::size_t i = 0; i < n; ++i) {
        Vector v = offset;
        for (std::size_t k = 0; k < f; ++k)
            for (std::size_t c = 0; c < d; ++c)
                v[c] += truth.word_scores(i, k) * truth.factor_directions(k, c);
        for (double& x : v) x += sigma * rng.normal();
        world.word_features.push_back(make_feature(world.survey.words[i], v, spec));
    }

    // antonym pairs: pos - neg = a_j + delta_k with the deltas summing to zero
    const std::size_t p = spec.pairs_per_axis;
    for (std::size_t j = 0; j < m; ++j) {
        AntonymPairSet set;
        set.axis_name = world.survey.scales[j];
        set.pos_pole = numbered("p", j, m);
        set.neg_pole = numbered("n", j, m);
        std::vector<Vector> delta(p, Vector(d, 0.0));
        if (p > 1) {
            Vector mean(d, 0.0);
            for (auto& dk : delta)
                for (std::size_t c = 0; c < d; ++c) {
                    dk[c] = axis_noise * rng.normal();
                    mean[c] += dk[c] / static_cast<double>(p);
                }
            for (auto& dk : delta)
                for (std::size_t c = 0; c < d; ++c) dk[c] -= mean[c];
        }
        for (std::size_t k = 0; k < p; ++k) {
            const std::string suffix = k == 0 ? "" : "_" + std::to_string(k);
            const std::string pos = set.pos_pole + suffix, neg = set.neg_pole + suffix;
            set.pairs.emplace_back(pos, neg);
            Vector mid = offset;
            for (double& x : mid) x += rng.normal() / std::sqrt(static_cast<double>(d));
            Vector vp(d), vn(d);
            for (std::size_t c = 0; c < d; ++c) {
                const double half = 0.5 * (truth.axis_vectors(j, c) + delta[k][c]);
                vp[c] = mid[c] + half;
                vn[c] = mid[c] - half;
            }
            world.pair_features.push_back(make_feature(pos, vp, spec));
            world.pair_features.push_back(make_feature(neg, vn, spec));
        }
        world.axis_config.push_back(std::move(set));

        SemanticAxis axis;
        axis.axis_name = world.survey.scales[j];
        axis.pos_pole = numbered("p", j, m);
        axis.neg_pole = numbered("n", j, m);
        const auto row = truth.axis_vectors.row(j);
        axis.vector.assign(row.begin(), row.end());
        axis.unit_vector = axis.vector;
        const double len = norm(axis.vector);
        for (double& x : axis.unit_vector) x /= len;
        axis.pair_count = p;
        axis.source_id = "synthetic-seed" + std::to_string(spec.seed);
        axis.layer = spec.layer;
        world.axes.push_back(std::move(axis));
    }
    return world;
}

}  // namespace semaxis
