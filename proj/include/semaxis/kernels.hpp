#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace semaxis::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

// Raw kernel entry points for one instruction set. Pointers may alias only
// where noted; lengths are element counts.
struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum_squares)(const double* a, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = W x, W is rows x cols row-major; y must not alias W or x.
    void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 double* y);
};

const KernelTable& scalar_table() noexcept;
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(__aarch64__)
const KernelTable& neon_table() noexcept;
#endif

// Instruction sets this build can run on the current CPU, scalar first.
std::vector<Isa> available();

const KernelTable& table(Isa isa);

// The table used by the rest of the library. Chosen once on first use: the
// SEMAXIS_KERNEL environment variable (scalar|avx2|neon|auto) wins, otherwise
// the widest ISA the CPU supports.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
    return active().sum_squares(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
    active().gemv(w.data(), rows, cols, x.data(), y.data());
}

}  // namespace semaxis::kernels
