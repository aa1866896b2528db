#pragma once

#include <cstddef>
#include <string>

namespace poi::simd {

/// Squared Euclidean distance between two float vectors of length n.
///
/// All variants subtract in float and accumulate the squared differences in
/// double; at dim 768 that keeps every variant within ~1e-7 relative of a
/// pure-double evaluation, so variants are interchangeable under the 1e-6
/// equivalence contract of the scoring path.
using L2SqFn = double (*)(const float* a, const float* b, std::size_t n);

enum class Kernel { scalar, avx2, neon };

const char* kernel_name(Kernel k);

/// Scalar reference kernel. Always available.
double l2sq_scalar(const float* a, const float* b, std::size_t n);

#if defined(__x86_64__) || defined(__i386__)
/// AVX2+FMA kernel, compiled in a TU with -mavx2 -mfma. Call only when
/// kernel_supported(Kernel::avx2).
double l2sq_avx2(const float* a, const float* b, std::size_t n);
#endif

#if defined(__aarch64__)
/// NEON kernel. Baseline on aarch64.
double l2sq_neon(const float* a, const float* b, std::size_t n);
#endif

/// True when this machine can run the given variant.
bool kernel_supported(Kernel k);

/// Kernel selected at startup: the POIKIT_SIMD env var ("scalar", "avx2",
/// "neon", "auto") when set and supported, otherwise the best supported one.
Kernel active_kernel();

/// Function pointer for a supported kernel. Throws ValidationError otherwise.
L2SqFn kernel_fn(Kernel k);

inline L2SqFn active_kernel_fn() { return kernel_fn(active_kernel()); }

/// Test hook: override the dispatch decision for the rest of the process.
void force_kernel(Kernel k);

}  // namespace poi::simd
