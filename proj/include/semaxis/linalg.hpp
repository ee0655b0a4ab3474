#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semaxis {

using Vector = std::vector<double>;

/// Dense row-major matrix of finite doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Takes ownership of `data`; throws invalid-input if the length is not
    /// rows * cols or any entry is non-finite.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    Vector column(std::size_t c) const;

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    DenseMatrix transpose() const;
    DenseMatrix select_columns(std::size_t first, std::size_t count) const;
    DenseMatrix select_rows(std::span<const std::size_t> order) const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

double norm(std::span<const double> v);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Product-moment correlation. Throws undefined-correlation when either series
/// has zero variance rather than returning 0.
double pearson(std::span<const double> x, std::span<const double> y);

/// Column means of a matrix with at least one row.
Vector mean_pool(const DenseMatrix& rows);

/// Correctly rounded sum of `values`. Because the exact sum is rounded once,
/// any permutation (or negation) of the input gives a bit-identical
/// (or exactly negated) result.
double canonical_sum(std::span<const double> values);

/// Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
/// Values are sorted descending (ties keep the original diagonal order) and
/// each eigenvector column has its largest-magnitude entry nonnegative.
struct SymmetricEigen {
    Vector values;
    DenseMatrix vectors;  // column i pairs with values[i]
    int sweeps = 0;
};

SymmetricEigen eigen_symmetric(const DenseMatrix& a);

/// Thin SVD, a = u * diag(s) * v^T, by one-sided Jacobi. Singular values are
/// sorted descending.
struct ThinSvd {
    DenseMatrix u;  // rows x min(rows, cols)
    Vector s;
    DenseMatrix v;  // cols x min(rows, cols)
};

ThinSvd svd(const DenseMatrix& a);

enum class Preprocessing { center, standardize };

struct PcaResult {
    DenseMatrix loadings;      // variables x k, orthonormal columns
    Vector explained_ratio;    // k leading fractions of total variance
    DenseMatrix scores;        // observations x k
    Preprocessing preprocessing = Preprocessing::center;
    Vector eigenvalues;        // every covariance eigenvalue, descending
    Vector means;              // per variable
    Vector scales;             // per variable; all 1 for center-only
};

/// Principal components of the covariance (center) or correlation
/// (standardize) matrix of `m`, whose rows are observations.
/// Requires cols >= 2 and 1 <= k <= min(rows - 1, cols).
PcaResult pca(const DenseMatrix& m, std::size_t k, Preprocessing preprocessing);

struct CcaResult {
    Vector correlations;     // k canonical correlations, descending, in [0, 1]
    DenseMatrix x_variates;  // x.cols x k
    DenseMatrix y_variates;  // y.cols x k
    DenseMatrix x_scores;    // observations x k
    DenseMatrix y_scores;
};

/// Canonical correlation analysis. Within-set covariance eigenvalues are
/// floored at 1e-8 * trace / cols; directions above the floor are untouched,
/// so the result is invariant to well-conditioned recombination of columns. Throws rank-deficient, naming the side, when a
/// side has fewer than k numerically independent directions.
CcaResult cca(const DenseMatrix& x, const DenseMatrix& y, std::size_t k);

}  // namespace semaxis
