// NEON variants for aarch64. float64x2 is baseline on aarch64, so no extra
// compile flags or runtime probing are needed there.

#include "radar/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace radar::kernels::detail {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void matvec_neon(const double* mat, std::size_t rows, std::size_t dim, const double* vec,
                 double* out) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = dot_neon(mat + r * dim, vec, dim);
}

}  // namespace radar::kernels::detail

#endif
