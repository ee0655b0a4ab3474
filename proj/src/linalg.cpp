#include "semaxis/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "semaxis/error.hpp"
#include "semaxis/kernels.hpp"

namespace semaxis {

// --- DenseMatrix -----------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    require(std::isfinite(fill), ErrorKind::invalid_input, "matrix fill value must be finite");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows * cols, ErrorKind::invalid_input,
            "matrix data length " + std::to_string(data_.size()) + " != " +
                std::to_string(rows) + " x " + std::to_string(cols));
    for (double v : data_)
        require(std::isfinite(v), ErrorKind::invalid_input, "matrix entries must be finite");
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        require(r.size() == cols, ErrorKind::invalid_input, "ragged rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return DenseMatrix(rows.size(), cols, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector DenseMatrix::column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

DenseMatrix DenseMatrix::select_columns(std::size_t first, std::size_t count) const {
    require(first + count <= cols_, ErrorKind::invalid_input, "column range out of bounds");
    DenseMatrix out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, first + c);
    return out;
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> order) const {
    DenseMatrix out(order.size(), cols_);
    for (std::size_t i = 0; i < order.size(); ++i) {
        require(order[i] < rows_, ErrorKind::invalid_input, "row index out of bounds");
        std::copy_n(row(order[i]).begin(), cols_, out.row(i).begin());
    }
    return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), ErrorKind::invalid_input,
            "matmul shape mismatch: " + std::to_string(a.cols()) + " vs " +
                std::to_string(b.rows()));
    const DenseMatrix bt = b.transpose();
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        kernels::gemv(bt.data(), bt.rows(), bt.cols(), a.row(r), out.row(r));
    return out;
}

// --- vector statistics -----------------------------------------------------

double norm(std::span<const double> v) { return std::sqrt(kernels::sum_squares(v)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::invalid_input,
            "cosine_similarity: length mismatch " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
    require(!a.empty(), ErrorKind::invalid_input, "cosine_similarity: empty vectors");
    const double na = norm(a);
    const double nb = norm(b);
    require(na > 0.0 && nb > 0.0, ErrorKind::invalid_input, "cosine_similarity: zero vector");
    const double c = kernels::dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), ErrorKind::invalid_input,
            "pearson: length mismatch " + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()));
    require(x.size() >= 3, ErrorKind::invalid_input, "pearson: need at least 3 observations");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        fail(ErrorKind::undefined_correlation, "pearson: series has zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Vector mean_pool(const DenseMatrix& rows) {
    require(rows.rows() >= 1, ErrorKind::invalid_input, "mean_pool: empty input");
    Vector out(rows.cols(), 0.0);
    for (std::size_t r = 0; r < rows.rows(); ++r)
        for (std::size_t c = 0; c < rows.cols(); ++c) out[c] += rows(r, c);
    const auto n = static_cast<double>(rows.rows());
    for (double& v : out) v /= n;
    return out;
}

double canonical_sum(std::span<const double> values) {
    // Shewchuk partials, as in Python's math.fsum: the result is the exact sum
    // rounded once, so it cannot depend on the order or the sign convention.
    std::vector<double> partials;
    for (double x : values) {
        std::size_t kept = 0;
        for (std::size_t j = 0; j < partials.size(); ++j) {
            double y = partials[j];
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[kept++] = lo;
            x = hi;
        }
        partials.resize(kept);
        partials.push_back(x);
    }
    std::size_t n = partials.size();
    if (n == 0) return 0.0;
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) break;
    }
    // round-half-even correction when the remaining partials push past a tie
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

// --- eigen / svd -----------------------------------------------------------

namespace {

constexpr double kJacobiTolerance = 1e-12;
constexpr int kMaxSweeps = 100;

void fix_sign(DenseMatrix& vectors, std::size_t col, DenseMatrix* partner = nullptr) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t r = 0; r < vectors.rows(); ++r) {
        const double a = std::abs(vectors(r, col));
        if (a > best_abs) {
            best_abs = a;
            best = r;
        }
    }
    if (vectors(best, col) < 0.0) {
        for (std::size_t r = 0; r < vectors.rows(); ++r) vectors(r, col) = -vectors(r, col);
        if (partner)
            for (std::size_t r = 0; r < partner->rows(); ++r)
                (*partner)(r, col) = -(*partner)(r, col);
    }
}

double off_diagonal_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

DenseMatrix covariance(const DenseMatrix& centered) {
    const DenseMatrix cols = centered.transpose();
    const std::size_t p = cols.rows();
    const auto denom = static_cast<double>(centered.rows() - 1);
    DenseMatrix cov(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            const double v = kernels::dot(cols.row(i), cols.row(j)) / denom;
            cov(i, j) = v;
            cov(j, i) = v;
        }
    return cov;
}

DenseMatrix center_columns(const DenseMatrix& m, Vector* means_out = nullptr) {
    const Vector means = mean_pool(m);
    DenseMatrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) -= means[c];
    if (means_out) *means_out = means;
    return out;
}

// Unit vector orthogonal to the first `filled` columns of `u`.
Vector orthogonal_completion(const DenseMatrix& u, std::size_t filled) {
    const std::size_t m = u.rows();
    Vector best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < m; ++e) {
        Vector cand(m, 0.0);
        cand[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < filled; ++j) {
                double proj = 0.0;
                for (std::size_t r = 0; r < m; ++r) proj += cand[r] * u(r, j);
                for (std::size_t r = 0; r < m; ++r) cand[r] -= proj * u(r, j);
            }
        const double nrm = norm(cand);
        if (nrm > best_norm + 1e-12) {
            best_norm = nrm;
            best = cand;
        }
    }
    for (double& v : best) v /= best_norm;
    return best;
}

}  // namespace

SymmetricEigen eigen_symmetric(const DenseMatrix& input) {
    const std::size_t n = input.rows();
    require(n == input.cols(), ErrorKind::invalid_input, "eigen_symmetric: matrix not square");
    require(n >= 1, ErrorKind::invalid_input, "eigen_symmetric: empty matrix");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            require(input(i, j) == input(j, i), ErrorKind::invalid_input,
                    "eigen_symmetric: matrix not symmetric");

    DenseMatrix a = input;
    DenseMatrix v = DenseMatrix::identity(n);
    const double fro = norm(input.data());
    const double target = kJacobiTolerance * fro;

    int sweeps = 0;
    while (off_diagonal_norm(a) > target) {
        if (sweeps == kMaxSweeps)
            fail(ErrorKind::convergence, "eigen_symmetric: Jacobi did not converge in 100 sweeps");
        ++sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = arp - s * (arq + tau * arp);
                    a(r, q) = arq + s * (arp - tau * arq);
                    a(p, r) = a(r, p);
                    a(q, r) = a(r, q);
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.sweeps = sweeps;
    out.values.resize(n);
    out.vectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
        fix_sign(out.vectors, k);
    }
    return out;
}

ThinSvd svd(const DenseMatrix& a) {
    if (a.rows() < a.cols()) {
        ThinSvd t = svd(a.transpose());
        return {std::move(t.v), std::move(t.s), std::move(t.u)};
    }
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    // work on columns stored contiguously
    DenseMatrix u = a.transpose();  // n x m, row j is column j of a
    DenseMatrix v = DenseMatrix::identity(n);

    for (int sweep = 0;; ++sweep) {
        if (sweep == kMaxSweeps)
            fail(ErrorKind::convergence, "svd: one-sided Jacobi did not converge");
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = kernels::sum_squares(u.row(p));
                const double beta = kernels::sum_squares(u.row(q));
                const double gamma = kernels::dot(u.row(p), u.row(q));
                if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                double t = 1.0 / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                if (zeta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t r = 0; r < m; ++r) {
                    const double up = u(p, r);
                    const double uq = u(q, r);
                    u(p, r) = c * up - s * uq;
                    u(q, r) = s * up + c * uq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vp = v(r, p);
                    const double vq = v(r, q);
                    v(r, p) = c * vp - s * vq;
                    v(r, q) = s * vp + c * vq;
                }
            }
        if (!rotated) break;
    }

    Vector sv(n);
    for (std::size_t j = 0; j < n; ++j) sv[j] = norm(u.row(j));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sv[i] > sv[j]; });

    ThinSvd out;
    out.s.resize(n);
    out.u = DenseMatrix(m, n);
    out.v = DenseMatrix(n, n);
    const double smax = n ? sv[order[0]] : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.s[k] = sv[j];
        for (std::size_t r = 0; r < n; ++r) out.v(r, k) = v(r, j);
        if (sv[j] > 1e-14 * smax && sv[j] > 0.0) {
            for (std::size_t r = 0; r < m; ++r) out.u(r, k) = u(j, r) / sv[j];
        } else {
            out.s[k] = 0.0;
            const Vector fill = orthogonal_completion(out.u, k);
            for (std::size_t r = 0; r < m; ++r) out.u(r, k) = fill[r];
        }
    }
    return out;
}

// --- PCA -------------------------------------------------------------------

PcaResult pca(const DenseMatrix& m, std::size_t k, Preprocessing preprocessing) {
    const std::size_t n = m.rows();
    const std::size_t p = m.cols();
    require(p >= 2, ErrorKind::invalid_input, "pca: need at least 2 variables");
    require(n >= 2, ErrorKind::invalid_input, "pca: need at least 2 observations");
    require(k >= 1 && k <= std::min(n - 1, p), ErrorKind::invalid_input,
            "pca: k=" + std::to_string(k) + " outside [1, " + std::to_string(std::min(n - 1, p)) +
                "]");

    PcaResult out;
    out.preprocessing = preprocessing;
    DenseMatrix x = center_columns(m, &out.means);
    out.scales.assign(p, 1.0);
    if (preprocessing == Preprocessing::standardize) {
        for (std::size_t c = 0; c < p; ++c) {
            double ss = 0.0, scale = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                ss += x(r, c) * x(r, c);
                scale = std::max(scale, std::abs(m(r, c)));
            }
            const double sd = std::sqrt(ss / static_cast<double>(n - 1));
            if (!(sd > 1e-12 * std::max(1.0, scale)))
                fail(ErrorKind::invalid_input,
                     "pca: column " + std::to_string(c) + " is constant; cannot standardize");
            out.scales[c] = sd;
            for (std::size_t r = 0; r < n; ++r) x(r, c) /= sd;
        }
    }

    const SymmetricEigen eig = eigen_symmetric(covariance(x));
    out.eigenvalues = eig.values;
    double total = 0.0;
    for (double l : eig.values) total += std::max(l, 0.0);
    require(total > 0.0, ErrorKind::invalid_input, "pca: data has zero total variance");

    out.explained_ratio.resize(k);
    for (std::size_t i = 0; i < k; ++i)
        out.explained_ratio[i] = std::max(eig.values[i], 0.0) / total;
    out.loadings = eig.vectors.select_columns(0, k);
    out.scores = matmul(x, out.loadings);
    return out;
}

// --- CCA -------------------------------------------------------------------

namespace {

struct WhitenedSide {
    DenseMatrix centered;
    DenseMatrix inv_sqrt;  // C^(-1/2) with eigenvalues floored at the ridge
};

WhitenedSide whiten(const DenseMatrix& m, std::size_t k, const char* side) {
    WhitenedSide out;
    out.centered = center_columns(m);
    const DenseMatrix cov = covariance(out.centered);
    const std::size_t p = cov.rows();
    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i) trace += cov(i, i);
    if (!(trace > 0.0))
        fail(ErrorKind::rank_deficient,
             std::string("cca: ") + side + " side has zero variance in every column");

    const SymmetricEigen eig = eigen_symmetric(cov);
    const double lmax = eig.values.front();
    std::size_t rank = 0;
    for (double l : eig.values)
        if (l > 1e-10 * lmax) ++rank;
    if (rank < k)
        fail(ErrorKind::rank_deficient,
             std::string("cca: ") + side + " side has numerical rank " + std::to_string(rank) +
                 " < k=" + std::to_string(k) + "; ridge cannot repair it");

    const double ridge = 1e-8 * trace / static_cast<double>(p);
    DenseMatrix scaled = eig.vectors;
    for (std::size_t j = 0; j < p; ++j) {
        const double f = 1.0 / std::sqrt(std::max(eig.values[j], ridge));
        for (std::size_t r = 0; r < p; ++r) scaled(r, j) *= f;
    }
    out.inv_sqrt = matmul(scaled, eig.vectors.transpose());
    return out;
}

}  // namespace

CcaResult cca(const DenseMatrix& x, const DenseMatrix& y, std::size_t k) {
    require(x.rows() == y.rows(), ErrorKind::invalid_input,
            "cca: observation counts differ (" + std::to_string(x.rows()) + " vs " +
                std::to_string(y.rows()) + ")");
    require(x.rows() >= 2, ErrorKind::invalid_input, "cca: need at least 2 observations");
    require(k >= 1 && k <= std::min(x.cols(), y.cols()), ErrorKind::invalid_input,
            "cca: k out of range");

    const WhitenedSide wx = whiten(x, k, "x");
    const WhitenedSide wy = whiten(y, k, "y");

    // cross covariance
    const DenseMatrix xt = wx.centered.transpose();
    const DenseMatrix yt = wy.centered.transpose();
    const auto denom = static_cast<double>(x.rows() - 1);
    DenseMatrix cxy(x.cols(), y.cols());
    for (std::size_t i = 0; i < x.cols(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j)
            cxy(i, j) = kernels::dot(xt.row(i), yt.row(j)) / denom;

    const DenseMatrix m = matmul(matmul(wx.inv_sqrt, cxy), wy.inv_sqrt);
    const ThinSvd dec = svd(m);

    CcaResult out;
    out.x_variates = matmul(wx.inv_sqrt, dec.u.select_columns(0, k));
    out.y_variates = matmul(wy.inv_sqrt, dec.v.select_columns(0, k));
    out.correlations.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.correlations[i] = std::clamp(dec.s[i], 0.0, 1.0);
        fix_sign(out.x_variates, i, &out.y_variates);
    }
    out.x_scores = matmul(wx.centered, out.x_variates);
    out.y_scores = matmul(wy.centered, out.y_variates);
    return out;
}

}  // namespace semaxis
