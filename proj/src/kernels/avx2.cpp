#include "semaxis/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// AVX2 + FMA kernels. Only these functions carry the target attribute, so the
// rest of the translation unit stays baseline x86-64 and dispatch decides at
// runtime whether they may be called.

#define SEMAXIS_AVX2 __attribute__((target("avx2,fma")))

namespace semaxis::kernels {
namespace {

SEMAXIS_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

SEMAXIS_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

SEMAXIS_AVX2 double sum_squares_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(a + i);
        const __m256d x1 = _mm256_loadu_pd(a + i + 4);
        acc0 = _mm256_fmadd_pd(x0, x0, acc0);
        acc1 = _mm256_fmadd_pd(x1, x1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = _mm256_loadu_pd(a + i);
        acc0 = _mm256_fmadd_pd(x0, x0, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

SEMAXIS_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // mul then add (no fma) so results match the scalar reference bit for bit
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

SEMAXIS_AVX2 void gemv_avx2(const double* w, std::size_t rows, std::size_t cols,
                            const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(w + r * cols, x, cols);
}

}  // namespace

const KernelTable& avx2_table() noexcept {
    static const KernelTable t{Isa::avx2, dot_avx2, sum_squares_avx2, axpy_avx2, gemv_avx2};
    return t;
}

}  // namespace semaxis::kernels

#endif
