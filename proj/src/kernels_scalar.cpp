#include "radar/kernels.hpp"

namespace radar::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void matvec_scalar(const double* mat, std::size_t rows, std::size_t dim, const double* vec,
                   double* out) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = dot_scalar(mat + r * dim, vec, dim);
}

}  // namespace radar::kernels::detail
