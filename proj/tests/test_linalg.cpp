#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "semaxis/error.hpp"
#include "semaxis/kernels.hpp"
#include "semaxis/linalg.hpp"
#include "semaxis/random.hpp"

using namespace semaxis;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    DenseMatrix m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::aggregate;
}

}  // namespace

TEST(Kernels, EveryIsaAgreesWithScalar) {
    Rng rng(3);
    const auto& ref = kernels::scalar_table();
    for (auto isa : kernels::available()) {
        const auto& t = kernels::table(isa);
        for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1000u}) {
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = rng.normal(), b[i] = rng.normal();
            const double scale = std::sqrt(ref.sum_squares(a.data(), n) *
                                           ref.sum_squares(b.data(), n)) + 1.0;
            EXPECT_NEAR(t.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n),
                        1e-13 * scale)
                << kernels::to_string(isa) << " n=" << n;
            EXPECT_NEAR(t.sum_squares(a.data(), n), ref.sum_squares(a.data(), n),
                        1e-13 * (ref.sum_squares(a.data(), n) + 1.0));

            std::vector<double> y1 = b, y2 = b;
            ref.axpy(0.7, a.data(), y1.data(), n);
            t.axpy(0.7, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15);
        }
        for (std::size_t rows : {1u, 5u, 64u}) {
            for (std::size_t cols : {1u, 6u, 64u, 257u}) {
                std::vector<double> w(rows * cols), x(cols), y1(rows), y2(rows);
                for (double& v : w) v = rng.normal();
                for (double& v : x) v = rng.normal();
                ref.gemv(w.data(), rows, cols, x.data(), y1.data());
                t.gemv(w.data(), rows, cols, x.data(), y2.data());
                for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-11);
            }
        }
    }
}

TEST(Cosine, Examples) {
    const double a[] = {1, 0}, b[] = {0, 1};
    EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
    const double c[] = {1, 2, 3}, d[] = {2, 4, 6};
    EXPECT_NEAR(cosine_similarity(c, d), 1.0, 1e-15);
    const double e[] = {1, 1}, f[] = {1, 0};
    EXPECT_NEAR(cosine_similarity(e, f), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Cosine, SelfAndNegation) {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        Vector a(1 + rng.below(40));
        for (double& v : a) v = rng.normal();
        Vector neg = a;
        for (double& v : neg) v = -v;
        EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-14);
        EXPECT_NEAR(cosine_similarity(a, neg), -1.0, 1e-14);
    }
}

TEST(Cosine, ZeroVectorRejected) {
    const double a[] = {0, 0}, b[] = {1, 0};
    EXPECT_EQ(kind_of([&] { cosine_similarity(a, b); }), ErrorKind::invalid_input);
}

TEST(Pearson, Examples) {
    const double x[] = {1, 2, 3};
    const double up[] = {2, 4, 6}, down[] = {3, 2, 1}, mixed[] = {1, 3, 2};
    EXPECT_NEAR(pearson(x, up), 1.0, 1e-15);
    EXPECT_NEAR(pearson(x, down), -1.0, 1e-15);
    EXPECT_NEAR(pearson(x, mixed), 0.5, 1e-15);
}

TEST(Pearson, ZeroVarianceIsAnError) {
    const double x[] = {1, 2, 3}, flat[] = {4, 4, 4};
    EXPECT_EQ(kind_of([&] { pearson(x, flat); }), ErrorKind::undefined_correlation);
}

TEST(Pearson, AffineInvariance) {
    Rng rng(8);
    Vector x(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) x[i] = rng.normal(), y[i] = x[i] + rng.normal();
    const double r = pearson(x, y);
    Vector x2 = x, y2 = y;
    for (double& v : x2) v = 3.5 * v - 10.0;
    for (double& v : y2) v = 0.01 * v + 7.0;
    EXPECT_NEAR(pearson(x2, y2), r, 1e-12);
}

TEST(MeanPool, Examples) {
    const auto one = DenseMatrix::from_rows({{1.5, -2.0, 3.0}});
    EXPECT_EQ(mean_pool(one), (Vector{1.5, -2.0, 3.0}));
    const auto four = DenseMatrix::from_rows({{1, 2}, {1, 2}, {1, 2}, {1, 2}});
    EXPECT_EQ(mean_pool(four), (Vector{1, 2}));

    Rng rng(2);
    const auto m = random_matrix(5, 3, rng);
    const Vector got = mean_pool(m);
    for (std::size_t c = 0; c < 3; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < 5; ++r) s += m(r, c);
        EXPECT_NEAR(got[c], s / 5.0, 1e-15);
    }
    EXPECT_EQ(kind_of([] { mean_pool(DenseMatrix(0, 3)); }), ErrorKind::invalid_input);
}

TEST(CanonicalSum, PermutationAndNegation) {
    Rng rng(11);
    std::vector<double> v(200);
    for (double& x : v) x = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    const double s = canonical_sum(v);
    for (int t = 0; t < 20; ++t) {
        rng.shuffle(v);
        EXPECT_EQ(canonical_sum(v), s);
    }
    for (double& x : v) x = -x;
    EXPECT_EQ(canonical_sum(v), -s);
}

TEST(CanonicalSum, Cancellation) {
    const double v[] = {1e100, 1.0, -1e100};
    EXPECT_EQ(canonical_sum(v), 1.0);
    const double w[] = {0.1, 0.2, 0.3};
    EXPECT_EQ(canonical_sum(w), 0.6);  // the exact sum rounds to the double nearest 0.6
}

TEST(Eigen, TwoByTwoClosedForm) {
    Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        const double a = rng.normal(), b = rng.normal(), d = rng.normal();
        const auto m = DenseMatrix::from_rows({{a, b}, {b, d}});
        const double mid = 0.5 * (a + d);
        const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
        const auto eig = eigen_symmetric(m);
        EXPECT_NEAR(eig.values[0], mid + rad, 1e-12);
        EXPECT_NEAR(eig.values[1], mid - rad, 1e-12);
    }
}

TEST(Eigen, ReconstructsAndIsOrthonormal) {
    Rng rng(17);
    const auto g = random_matrix(12, 12, rng);
    const auto s = matmul(g, g.transpose());
    const auto eig = eigen_symmetric(s);
    for (std::size_t i = 1; i < eig.values.size(); ++i)
        EXPECT_GE(eig.values[i - 1], eig.values[i]);
    const auto vtv = matmul(eig.vectors.transpose(), eig.vectors);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-12);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 12; ++k)
                acc += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
            EXPECT_NEAR(acc, s(i, j), 1e-10);
        }
}

TEST(Eigen, RejectsAsymmetric) {
    const auto m = DenseMatrix::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(kind_of([&] { eigen_symmetric(m); }), ErrorKind::invalid_input);
}

TEST(Svd, Reconstructs) {
    Rng rng(19);
    for (auto [r, c] : {std::pair{7, 4}, std::pair{4, 7}, std::pair{10, 10}}) {
        const auto a = random_matrix(r, c, rng);
        const auto f = svd(a);
        for (std::size_t i = 1; i < f.s.size(); ++i) EXPECT_GE(f.s[i - 1], f.s[i]);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < f.s.size(); ++k) acc += f.u(i, k) * f.s[k] * f.v(j, k);
                EXPECT_NEAR(acc, a(i, j), 1e-11);
            }
    }
}

TEST(Pca, SingleNonconstantColumn) {
    Rng rng(23);
    DenseMatrix m(20, 3, 1.0);
    for (std::size_t r = 0; r < 20; ++r) m(r, 1) = rng.normal();
    const auto p = pca(m, 1, Preprocessing::center);
    EXPECT_NEAR(p.explained_ratio[0], 1.0, 1e-12);
}

TEST(Pca, TwoVariableKnownCovariance) {
    // draw with covariance [[4, 1.2], [1.2, 1]] and compare the sample eigenvalues
    // against the characteristic polynomial of the sample covariance
    Rng rng(29);
    const std::size_t n = 2000;
    DenseMatrix m(n, 2);
    for (std::size_t r = 0; r < n; ++r) {
        const double z1 = rng.normal(), z2 = rng.normal();
        m(r, 0) = 2.0 * z1;
        m(r, 1) = 0.6 * z1 + 0.8 * z2;
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
    const double l1 = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
    const double l2 = 0.5 * (tr - std::sqrt(tr * tr - 4 * det));
    EXPECT_NEAR(p.eigenvalues[0], l1, 1e-6);
    EXPECT_NEAR(p.eigenvalues[1], l2, 1e-6);
    EXPECT_NEAR(p.explained_ratio[0], l1 / (l1 + l2), 1e-9);
}

TEST(Pca, FullRankReconstruction) {
    Rng rng(31);
    const auto m = random_matrix(25, 6, rng);
    for (auto pre : {Preprocessing::center, Preprocessing::standardize}) {
        const auto p = pca(m, 6, pre);
        for (std::size_t r = 0; r < 25; ++r)
            for (std::size_t c = 0; c < 6; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 6; ++k) acc += p.scores(r, k) * p.loadings(c, k);
                EXPECT_NEAR(acc * p.scales[c] + p.means[c], m(r, c), 1e-8);
            }
    }
}

TEST(Pca, SignConvention) {
    Rng rng(37);
    const auto m = random_matrix(40, 8, rng);
    const auto p = pca(m, 8, Preprocessing::center);
    for (std::size_t k = 0; k < 8; ++k) {
        double best = 0.0;
        for (std::size_t c = 0; c < 8; ++c)
            if (std::abs(p.loadings(c, k)) > std::abs(best)) best = p.loadings(c, k);
        EXPECT_GE(best, 0.0);
    }
}

TEST(Pca, Errors) {
    Rng rng(41);
    const auto m = random_matrix(5, 3, rng);
    EXPECT_EQ(kind_of([&] { pca(m, 0, Preprocessing::center); }), ErrorKind::invalid_input);
    EXPECT_EQ(kind_of([&] { pca(m, 5, Preprocessing::center); }), ErrorKind::invalid_input);
    DenseMatrix flat = m;
    for (std::size_t r = 0; r < 5; ++r) flat(r, 2) = 1.0;
    EXPECT_EQ(kind_of([&] { pca(flat, 2, Preprocessing::standardize); }),
              ErrorKind::invalid_input);
}

TEST(Pca, OrthogonalVariablesAreFlat) {
    Rng rng(43);
    const auto m = random_matrix(10000, 32, rng);
    const auto p = pca(m, 32, Preprocessing::center);
    for (double r : p.explained_ratio) EXPECT_NEAR(r, 1.0 / 32.0, 0.005);
}

TEST(Cca, RecombinationGivesOnes) {
    Rng rng(47);
    const auto x = random_matrix(40, 3, rng);
    const auto a = random_matrix(3, 3, rng);
    const auto c = cca(x, matmul(x, a), 3);
    for (double r : c.correlations) EXPECT_NEAR(r, 1.0, 1e-6);
    const auto same = cca(x, x, 3);
    for (double r : same.correlations) EXPECT_NEAR(r, 1.0, 1e-6);
}

TEST(Cca, InvariantUnderInvertibleMaps) {
    Rng rng(53);
    for (int t = 0; t < 10; ++t) {
        const auto x = random_matrix(50, 3, rng);
        auto y = random_matrix(50, 3, rng);
        for (std::size_t r = 0; r < 50; ++r) y(r, 0) += x(r, 1), y(r, 2) += 0.5 * x(r, 0);
        const auto base = cca(x, y, 3);
        const auto ax = random_matrix(3, 3, rng);
        const auto ay = random_matrix(3, 3, rng);
        const auto moved = cca(matmul(x, ax), matmul(y, ay), 3);
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_NEAR(moved.correlations[i], base.correlations[i], 1e-6);
    }
}

TEST(Cca, IndependentDataMatchesPermutationNull) {
    Rng rng(59);
    const auto x = random_matrix(32, 3, rng);
    const auto y = random_matrix(32, 3, rng);
    const double observed = cca(x, y, 3).correlations[0];
    std::vector<std::size_t> order(32);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> null;
    for (int t = 0; t < 1000; ++t) {
        rng.shuffle(order);
        null.push_back(cca(x, y.select_rows(order), 3).correlations[0]);
    }
    const auto below = std::count_if(null.begin(), null.end(), [&](double v) { return v < observed; });
    const double quantile = static_cast<double>(below) / 1000.0;
    EXPECT_GT(quantile, 0.005);
    EXPECT_LT(quantile, 0.995);
}

TEST(Cca, RankDeficientSideIsNamed) {
    Rng rng(61);
    auto x = random_matrix(30, 3, rng);
    for (std::size_t r = 0; r < 30; ++r) x(r, 2) = x(r, 0) - x(r, 1);
    const auto y = random_matrix(30, 3, rng);
    try {
        cca(x, y, 3);
        FAIL() << "expected rank-deficient";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::rank_deficient);
        EXPECT_NE(std::string(e.what()).find("x side"), std::string::npos);
    }
}
