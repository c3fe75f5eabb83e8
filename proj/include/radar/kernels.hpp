#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops behind the scorers: dense dot products and
// batched row-vs-vector scoring over the item matrices. A scalar reference
// implementation always exists; an AVX2/FMA (x86) or NEON (aarch64) variant
// is selected once at startup when the CPU supports it. Variants are
// equivalence-tested against the scalar kernels.

namespace radar::kernels {

enum class Backend { Scalar, Avx2, Neon };

Backend active();
const char* backend_name();
bool supported(Backend b);

// Forces a specific backend (tests use this to compare variants).
// Throws if the backend is not available on this machine.
void force(Backend b);

double dot(const double* a, const double* b, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size());
}

// out[r] = dot(mat[r*dim .. r*dim+dim), vec) for r in [0, rows)
void matvec(const double* mat, std::size_t rows, std::size_t dim, const double* vec, double* out);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void matvec_scalar(const double* mat, std::size_t rows, std::size_t dim, const double* vec,
                   double* out);
#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
void matvec_avx2(const double* mat, std::size_t rows, std::size_t dim, const double* vec,
                 double* out);
#endif
#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n);
void matvec_neon(const double* mat, std::size_t rows, std::size_t dim, const double* vec,
                 double* out);
#endif
}  // namespace detail

}  // namespace radar::kernels
