#include "poi/simd/distance.hpp"

namespace poi::simd {

double l2sq_scalar(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const float d = a[i] - b[i];
        acc += static_cast<double>(d) * static_cast<double>(d);
    }
    return acc;
}

}  // namespace poi::simd
