#include "semaxis/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

// Advanced SIMD is mandatory on AArch64, so no target attribute is needed.

namespace semaxis::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* w, std::size_t rows, std::size_t cols, const double* x,
               double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(w + r * cols, x, cols);
}

}  // namespace

const KernelTable& neon_table() noexcept {
    static const KernelTable t{Isa::neon, dot_neon, sum_squares_neon, axpy_neon, gemv_neon};
    return t;
}

}  // namespace semaxis::kernels

#endif
