#include "poi/simd/distance.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "poi/errors.hpp"

namespace poi::simd {

const char* kernel_name(Kernel k) {
    switch (k) {
        case Kernel::scalar: return "scalar";
        case Kernel::avx2: return "avx2";
        case Kernel::neon: return "neon";
    }
    return "?";
}

bool kernel_supported(Kernel k) {
    switch (k) {
        case Kernel::scalar:
            return true;
        case Kernel::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Kernel::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

namespace {

Kernel pick_best() {
    if (kernel_supported(Kernel::avx2)) return Kernel::avx2;
    if (kernel_supported(Kernel::neon)) return Kernel::neon;
    return Kernel::scalar;
}

Kernel pick_initial() {
    if (const char* env = std::getenv("POIKIT_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Kernel::scalar;
        if (want == "avx2" && kernel_supported(Kernel::avx2)) return Kernel::avx2;
        if (want == "neon" && kernel_supported(Kernel::neon)) return Kernel::neon;
        // "auto" or an unsupported request falls through to detection.
    }
    return pick_best();
}

std::atomic<Kernel>& selected() {
    static std::atomic<Kernel> k{pick_initial()};
    return k;
}

}  // namespace

Kernel active_kernel() { return selected().load(std::memory_order_relaxed); }

void force_kernel(Kernel k) {
    if (!kernel_supported(k)) {
        throw ValidationError(std::string("simd kernel not supported on this machine: ") +
                              kernel_name(k));
    }
    selected().store(k, std::memory_order_relaxed);
}

L2SqFn kernel_fn(Kernel k) {
    if (!kernel_supported(k)) {
        throw ValidationError(std::string("simd kernel not supported on this machine: ") +
                              kernel_name(k));
    }
    switch (k) {
        case Kernel::scalar:
            return &l2sq_scalar;
        case Kernel::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return &l2sq_avx2;
#else
            break;
#endif
        case Kernel::neon:
#if defined(__aarch64__)
            return &l2sq_neon;
#else
            break;
#endif
    }
    return &l2sq_scalar;
}

}  // namespace poi::simd
