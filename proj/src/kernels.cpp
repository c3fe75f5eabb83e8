#include "radar/kernels.hpp"

#include <stdexcept>

namespace radar::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using MatvecFn = void (*)(const double*, std::size_t, std::size_t, const double*, double*);

struct Dispatch {
    Backend backend;
    DotFn dot;
    MatvecFn matvec;
};

Dispatch pick_default() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return {Backend::Avx2, detail::dot_avx2, detail::matvec_avx2};
#endif
#if defined(__aarch64__)
    return {Backend::Neon, detail::dot_neon, detail::matvec_neon};
#endif
    return {Backend::Scalar, detail::dot_scalar, detail::matvec_scalar};
}

Dispatch& dispatch() {
    static Dispatch d = pick_default();
    return d;
}

}  // namespace

bool supported(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

void force(Backend b) {
    if (!supported(b)) throw std::runtime_error("kernel backend not supported on this CPU");
    switch (b) {
        case Backend::Scalar:
            dispatch() = {Backend::Scalar, detail::dot_scalar, detail::matvec_scalar};
            break;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            dispatch() = {Backend::Avx2, detail::dot_avx2, detail::matvec_avx2};
#endif
            break;
        case Backend::Neon:
#if defined(__aarch64__)
            dispatch() = {Backend::Neon, detail::dot_neon, detail::matvec_neon};
#endif
            break;
    }
}

Backend active() { return dispatch().backend; }

const char* backend_name() {
    switch (active()) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "?";
}

double dot(const double* a, const double* b, std::size_t n) { return dispatch().dot(a, b, n); }

void matvec(const double* mat, std::size_t rows, std::size_t dim, const double* vec, double* out) {
    dispatch().matvec(mat, rows, dim, vec, out);
}

}  // namespace radar::kernels
