#include "semaxis/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "semaxis/error.hpp"
#include "semaxis/kernels.hpp"
#include "semaxis/random.hpp"

namespace semaxis::toy {

namespace {

constexpr double kRmsEps = 1e-6;
constexpr double kRopeBase = 10000.0;
constexpr std::size_t kMlpExpansion = 4;

Vector uniform_f32(Rng& rng, std::size_t n, double bound) {
    Vector out(n);
    for (double& v : out) v = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
    return out;
}

Vector transposed(const Vector& m, std::size_t rows, std::size_t cols) {
    Vector out(m.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = m[r * cols + c];
    return out;
}

void check_symmetric_unit_diagonal(const DenseMatrix& c) {
    require(c.rows() == c.cols(), ErrorKind::invalid_input, "cosine matrix must be square");
    for (std::size_t i = 0; i < c.rows(); ++i) {
        require(std::abs(c(i, i) - 1.0) <= 1e-12, ErrorKind::invalid_input,
                "cosine matrix diagonal must be 1");
        for (std::size_t j = i + 1; j < c.cols(); ++j)
            require(std::abs(c(i, j) - c(j, i)) <= 1e-12, ErrorKind::invalid_input,
                    "cosine matrix must be symmetric");
    }
}

}  // namespace

std::size_t resolve_layer(double depth_fraction, std::size_t n_layers) {
    require(depth_fraction > 0.0 && depth_fraction <= 1.0, ErrorKind::invalid_input,
            "depth fraction must lie in (0, 1]");
    return static_cast<std::size_t>(std::llround(depth_fraction * static_cast<double>(n_layers)));
}

DenseMatrix random_cosine_matrix(std::size_t n, std::size_t rank, std::uint64_t seed,
                                 double max_abs) {
    require(n >= 1 && rank >= 1, ErrorKind::invalid_input, "random_cosine_matrix: empty");
    require(max_abs > 0.0 && max_abs <= 1.0, ErrorKind::invalid_input,
            "random_cosine_matrix: max_abs must lie in (0, 1]");
    Rng rng(seed);
    std::vector<Vector> g(n, Vector(rank));
    for (auto& v : g) {
        double nn = 0.0;
        while (!(nn > 1e-6)) {
            for (double& x : v) x = rng.normal();
            nn = norm(v);
        }
        for (double& x : v) x /= nn;
    }
    DenseMatrix c = DenseMatrix::identity(n);
    double largest = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < rank; ++k) d += g[i][k] * g[j][k];
            c(i, j) = c(j, i) = d;
            largest = std::max(largest, std::abs(d));
        }
    if (largest > max_abs) {
        const double shrink = max_abs / largest;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) c(i, j) *= shrink;
    }
    return c;
}

PlantedReadout make_planted_readout(const std::vector<std::string>& names,
                                    const std::vector<std::pair<std::string, std::string>>& poles,
                                    const DenseMatrix& cosines, std::size_t d_model,
                                    std::uint64_t seed, double readout_norm) {
    const std::size_t k = names.size();
    require(k >= 1, ErrorKind::invalid_input, "planted readout needs at least one axis");
    require(poles.size() == k, ErrorKind::invalid_input, "one pole pair per planted axis");
    require(cosines.rows() == k, ErrorKind::invalid_input, "cosine matrix size != axis count");
    require(k <= d_model, ErrorKind::invalid_input, "more planted axes than d_model dimensions");
    require(readout_norm > 0.0, ErrorKind::invalid_input, "readout_norm must be positive");
    check_symmetric_unit_diagonal(cosines);

    // symmetric square root of the Gram matrix: rows of b have Gram = cosines
    DenseMatrix sym = cosines;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) sym(i, j) = sym(j, i);
    const SymmetricEigen eig = eigen_symmetric(sym);
    require(eig.values.back() >= -1e-12, ErrorKind::invalid_input,
            "cosine matrix is not positive semidefinite");
    DenseMatrix b(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            b(i, j) = eig.vectors(i, j) * std::sqrt(std::max(eig.values[j], 0.0));

    // random orthonormal frame, Gram-Schmidt with re-orthogonalization
    Rng rng(seed);
    std::vector<Vector> frame;
    while (frame.size() < k) {
        Vector v(d_model);
        for (double& x : v) x = rng.normal();
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& f : frame) kernels::axpy(-kernels::dot(v, f), f, v);
        const double nv = norm(v);
        if (nv < 1e-8) continue;
        for (double& x : v) x /= nv;
        frame.push_back(std::move(v));
    }

    PlantedReadout out;
    out.pairwise_cosines = sym;
    out.readout_norm = readout_norm;
    for (std::size_t i = 0; i < k; ++i) {
        Vector dir(d_model, 0.0);
        for (std::size_t j = 0; j < k; ++j) kernels::axpy(b(i, j), frame[j], dir);
        const double nd = norm(dir);
        for (double& x : dir) x /= nd;
        out.axes.push_back({names[i], poles[i].first, poles[i].second, std::move(dir)});
    }
    return out;
}

void validate(const ToyModelConfig& config) {
    require(config.vocab.size() >= 1, ErrorKind::invalid_input, "toy model: empty vocabulary");
    require(config.d_model >= 2, ErrorKind::invalid_input, "toy model: d_model must be >= 2");
    require(config.n_heads >= 1 && config.d_model % config.n_heads == 0,
            ErrorKind::invalid_input, "toy model: d_model must be divisible by n_heads");
    require((config.d_model / config.n_heads) % 2 == 0, ErrorKind::invalid_input,
            "toy model: head dimension must be even for rotary positions");
    require(config.max_seq >= 1, ErrorKind::invalid_input, "toy model: max_seq must be >= 1");
    if (config.readout_mode == ReadoutMode::planted) {
        require(config.planted.has_value(), ErrorKind::invalid_input,
                "toy model: planted readout mode requires a planted readout");
        std::set<std::string> poles;
        for (const auto& axis : config.planted->axes) {
            require(axis.direction.size() == config.d_model, ErrorKind::invalid_input,
                    "planted axis '" + axis.name + "' has wrong dimension");
            require(std::abs(norm(axis.direction) - 1.0) <= 1e-10, ErrorKind::invalid_input,
                    "planted axis '" + axis.name + "' is not unit norm");
            for (const auto* tok : {&axis.pos_token, &axis.neg_token}) {
                config.vocab.id(*tok);
                require(poles.insert(*tok).second, ErrorKind::invalid_input,
                        "pole token '" + *tok + "' used by more than one planted axis");
            }
        }
    }
}

Model::Model(ToyModelConfig config) : config_(std::move(config)) {
    validate(config_);
    const std::size_t d = config_.d_model;
    const std::size_t v = config_.vocab.size();
    const std::size_t hidden = kMlpExpansion * d;
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rng(config_.seed);

    embedding_ = uniform_f32(rng, v * d, bound);
    layers_.resize(config_.n_layers);
    for (auto& layer : layers_) {
        layer.attn_gain.assign(d, 1.0);
        layer.mlp_gain.assign(d, 1.0);
        layer.wq = uniform_f32(rng, d * d, bound);
        layer.wk = uniform_f32(rng, d * d, bound);
        layer.wv = uniform_f32(rng, d * d, bound);
        layer.wo = transposed(layer.wv, d, d);
        layer.w_up = uniform_f32(rng, hidden * d, bound);
        layer.w_down = transposed(layer.w_up, hidden, d);
    }
    unembedding_ = uniform_f32(rng, v * d, bound);
    final_gain_.assign(d, 1.0);
    install_planted();
}

void Model::install_planted() {
    if (config_.readout_mode != ReadoutMode::planted) return;
    const std::size_t d = config_.d_model;
    const double scale = config_.planted->readout_norm;
    for (const auto& axis : config_.planted->axes) {
        const TokenId pos = config_.vocab.id(axis.pos_token);
        const TokenId neg = config_.vocab.id(axis.neg_token);
        for (std::size_t i = 0; i < d; ++i) {
            unembedding_[pos * d + i] = scale * axis.direction[i];
            unembedding_[neg * d + i] = -scale * axis.direction[i];
        }
    }
}

std::span<const double> Model::embedding_row(TokenId id) const {
    require(id < config_.vocab.size(), ErrorKind::invalid_input, "token id out of range");
    return {embedding_.data() + id * config_.d_model, config_.d_model};
}

std::span<const double> Model::unembedding_row(TokenId id) const {
    require(id < config_.vocab.size(), ErrorKind::invalid_input, "token id out of range");
    return {unembedding_.data() + id * config_.d_model, config_.d_model};
}

void Model::rms_norm(std::span<const double> in, std::span<const double> gain,
                     std::span<double> out) const {
    const double ms = kernels::sum_squares(in) / static_cast<double>(in.size());
    const double inv = 1.0 / std::sqrt(ms + kRmsEps);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * inv * gain[i];
}

void Model::run_block(const Layer& layer, std::vector<Vector>& x) const {
    const std::size_t seq = x.size();
    const std::size_t d = config_.d_model;
    const std::size_t heads = config_.n_heads;
    const std::size_t hd = d / heads;
    const std::size_t hidden = kMlpExpansion * d;
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

    std::vector<Vector> q(seq, Vector(d)), k(seq, Vector(d)), v(seq, Vector(d));
    Vector h(d);
    for (std::size_t t = 0; t < seq; ++t) {
        rms_norm(x[t], layer.attn_gain, h);
        kernels::gemv(layer.wq, d, d, h, q[t]);
        kernels::gemv(layer.wk, d, d, h, k[t]);
        kernels::gemv(layer.wv, d, d, h, v[t]);
        // rotary positions, pairs (2i, 2i+1) inside each head
        for (std::size_t head = 0; head < heads; ++head)
            for (std::size_t i = 0; i < hd / 2; ++i) {
                const double freq =
                    std::pow(kRopeBase, -2.0 * static_cast<double>(i) / static_cast<double>(hd));
                const double angle = static_cast<double>(t) * freq;
                const double c = std::cos(angle);
                const double s = std::sin(angle);
                const std::size_t a = head * hd + 2 * i;
                for (auto* vec : {&q[t], &k[t]}) {
                    const double x0 = (*vec)[a];
                    const double x1 = (*vec)[a + 1];
                    (*vec)[a] = x0 * c - x1 * s;
                    (*vec)[a + 1] = x0 * s + x1 * c;
                }
            }
    }

    Vector attn(d), proj(d), scores(seq), up(hidden), down(d);
    for (std::size_t t = 0; t < seq; ++t) {
        std::fill(attn.begin(), attn.end(), 0.0);
        for (std::size_t head = 0; head < heads; ++head) {
            const std::size_t off = head * hd;
            double mx = -INFINITY;
            for (std::size_t j = 0; j <= t; ++j) {
                scores[j] = kernels::dot(std::span<const double>(q[t]).subspan(off, hd),
                                         std::span<const double>(k[j]).subspan(off, hd)) *
                            inv_sqrt_hd;
                mx = std::max(mx, scores[j]);
            }
            double z = 0.0;
            for (std::size_t j = 0; j <= t; ++j) {
                scores[j] = std::exp(scores[j] - mx);
                z += scores[j];
            }
            std::span<double> out(attn.data() + off, hd);
            for (std::size_t j = 0; j <= t; ++j)
                kernels::axpy(scores[j] / z, std::span<const double>(v[j]).subspan(off, hd), out);
        }
        kernels::gemv(layer.wo, d, d, attn, proj);
        // x[t] is only read for position t in this loop, and k/v are frozen above
        kernels::axpy(1.0, proj, x[t]);

        rms_norm(x[t], layer.mlp_gain, h);
        kernels::gemv(layer.w_up, hidden, d, h, up);
        for (double& u : up) u = u / (1.0 + std::exp(-u));
        kernels::gemv(layer.w_down, d, hidden, up, down);
        kernels::axpy(1.0, down, x[t]);
    }
}

ForwardTrace Model::forward(std::span<const TokenId> tokens,
                            std::span<const HookSpec> hooks) const {
    const std::size_t seq = tokens.size();
    const std::size_t d = config_.d_model;
    require(seq >= 1, ErrorKind::invalid_input, "forward: empty token sequence");
    require(seq <= config_.max_seq, ErrorKind::invalid_input,
            "forward: sequence length " + std::to_string(seq) + " exceeds max_seq " +
                std::to_string(config_.max_seq));

    // validate hooks and precompute unit steering directions
    std::vector<Vector> directions(hooks.size());
    for (std::size_t h = 0; h < hooks.size(); ++h) {
        const HookSpec& hook = hooks[h];
        require(hook.layer <= config_.n_layers, ErrorKind::invalid_input,
                "hook layer " + std::to_string(hook.layer) + " > n_layers");
        for (std::size_t p : hook.positions)
            require(p < seq, ErrorKind::invalid_input,
                    "hook position " + std::to_string(p) + " outside sequence of length " +
                        std::to_string(seq));
        if (hook.mode != HookMode::add) continue;
        require(hook.vector.has_value() && hook.vector->size() == d, ErrorKind::invalid_input,
                "add hook needs a d_model vector");
        if (hook.scale_rule == ScaleRule::norm_relative) {
            require(hook.alpha >= 0.0, ErrorKind::invalid_input,
                    "norm-relative hook needs alpha >= 0");
            const double nv = norm(*hook.vector);
            require(nv > 0.0, ErrorKind::invalid_input, "steering vector is zero");
            directions[h] = *hook.vector;
            for (double& x : directions[h]) x /= nv;
        }
    }

    std::vector<Vector> x(seq);
    for (std::size_t t = 0; t < seq; ++t) {
        require(tokens[t] < config_.vocab.size(), ErrorKind::invalid_input,
                "forward: token id out of range");
        const auto row = embedding_row(tokens[t]);
        x[t].assign(row.begin(), row.end());
    }

    ForwardTrace trace;
    auto apply_hooks = [&](std::size_t layer) {
        for (std::size_t h = 0; h < hooks.size(); ++h) {
            const HookSpec& hook = hooks[h];
            if (hook.layer != layer || hook.mode != HookMode::add) continue;
            for (std::size_t p : hook.positions) {
                if (hook.scale_rule == ScaleRule::norm_relative) {
                    const double local = norm(x[p]);
                    kernels::axpy(hook.alpha * local, directions[h], x[p]);
                } else {
                    kernels::axpy(hook.alpha, *hook.vector, x[p]);
                }
            }
        }
        for (const HookSpec& hook : hooks) {
            if (hook.layer != layer || hook.mode != HookMode::capture) continue;
            for (std::size_t p : hook.positions) trace.captured[{layer, p}] = x[p];
        }
    };

    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        apply_hooks(l);
        run_block(layers_[l], x);
    }
    apply_hooks(config_.n_layers);

    const std::size_t vocab = config_.vocab.size();
    trace.logits = DenseMatrix(seq, vocab);
    Vector y(d);
    for (std::size_t t = 0; t < seq; ++t) {
        if (config_.final_norm == FinalNorm::rms)
            rms_norm(x[t], final_gain_, y);
        else
            y = x[t];
        kernels::gemv(unembedding_, vocab, d, y, trace.logits.row(t));
    }
    return trace;
}

std::vector<NamedTensor> Model::tensors() const {
    const std::size_t d = config_.d_model;
    const std::size_t v = config_.vocab.size();
    const std::size_t hidden = kMlpExpansion * d;
    std::vector<NamedTensor> out;
    out.push_back({"embedding", {v, d}, embedding_});
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto p = "layers." + std::to_string(l) + ".";
        const Layer& layer = layers_[l];
        out.push_back({p + "attn_gain", {d}, layer.attn_gain});
        out.push_back({p + "wq", {d, d}, layer.wq});
        out.push_back({p + "wk", {d, d}, layer.wk});
        out.push_back({p + "wv", {d, d}, layer.wv});
        out.push_back({p + "wo", {d, d}, layer.wo});
        out.push_back({p + "mlp_gain", {d}, layer.mlp_gain});
        out.push_back({p + "w_up", {hidden, d}, layer.w_up});
        out.push_back({p + "w_down", {d, hidden}, layer.w_down});
    }
    out.push_back({"final_gain", {d}, final_gain_});
    out.push_back({"unembedding", {v, d}, unembedding_});
    return out;
}

void Model::load_tensors(const std::vector<NamedTensor>& tensors) {
    const auto expected = this->tensors();
    require(tensors.size() == expected.size(), ErrorKind::invalid_input,
            "load_tensors: expected " + std::to_string(expected.size()) + " tensors, got " +
                std::to_string(tensors.size()));
    std::vector<Vector*> slots{&embedding_};
    for (auto& layer : layers_)
        for (auto* s : {&layer.attn_gain, &layer.wq, &layer.wk, &layer.wv, &layer.wo,
                        &layer.mlp_gain, &layer.w_up, &layer.w_down})
            slots.push_back(s);
    slots.push_back(&final_gain_);
    slots.push_back(&unembedding_);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        require(tensors[i].name == expected[i].name && tensors[i].shape == expected[i].shape,
                ErrorKind::invalid_input,
                "load_tensors: tensor " + std::to_string(i) + " is '" + tensors[i].name +
                    "', expected '" + expected[i].name + "' with matching shape");
        require(tensors[i].values.size() == slots[i]->size(), ErrorKind::invalid_input,
                "load_tensors: size mismatch for '" + tensors[i].name + "'");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) *slots[i] = tensors[i].values;
    install_planted();
}

bool Model::tensors_equal(const Model& other) const {
    if (!(config_.vocab == other.config_.vocab)) return false;
    const auto a = tensors();
    const auto b = other.tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].name != b[i].name || a[i].values != b[i].values) return false;
    return true;
}

}  // namespace semaxis::toy
