#include <cstdlib>
#include <string>

#include "semaxis/error.hpp"
#include "semaxis/kernels.hpp"

namespace semaxis::kernels {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& select() {
    const char* env = std::getenv("SEMAXIS_KERNEL");
    const std::string choice = env ? env : "auto";
    if (choice == "scalar") return scalar_table();
    if (choice == "avx2" && cpu_supports(Isa::avx2)) return table(Isa::avx2);
    if (choice == "neon" && cpu_supports(Isa::neon)) return table(Isa::neon);
    // auto, or a request the CPU cannot honor
    const auto isas = available();
    return table(isas.back());
}

}  // namespace

std::vector<Isa> available() {
    std::vector<Isa> out{Isa::scalar};
    if (cpu_supports(Isa::avx2)) out.push_back(Isa::avx2);
    if (cpu_supports(Isa::neon)) out.push_back(Isa::neon);
    return out;
}

const KernelTable& table(Isa isa) {
    require(cpu_supports(isa), ErrorKind::invalid_input,
            "kernel ISA not supported on this CPU: " + std::string(to_string(isa)));
    switch (isa) {
        case Isa::scalar: return scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2_table();
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon_table();
#endif
        default: break;
    }
    fail(ErrorKind::invalid_input, "kernel ISA not compiled in");
}

const KernelTable& active() noexcept {
    static const KernelTable& t = select();
    return t;
}

}  // namespace semaxis::kernels
