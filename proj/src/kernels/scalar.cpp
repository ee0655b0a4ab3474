#include "semaxis/kernels.hpp"

// Reference kernels: strictly sequential accumulation, one element at a time.
// Every SIMD variant is tested against these.

namespace semaxis::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(w + r * cols, x, cols);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static const KernelTable t{Isa::scalar, dot_scalar, sum_squares_scalar, axpy_scalar,
                               gemv_scalar};
    return t;
}

}  // namespace semaxis::kernels
