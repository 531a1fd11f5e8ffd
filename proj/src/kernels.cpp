#include "pmelab/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmelab::kernels {

namespace {
Backend g_backend = Backend::parallel;

// Chunked deterministic reduction: partial sums per fixed-size chunk, combined
// serially in chunk order. Identical arithmetic on both backends.
template <typename Fn>
double chunked_sum(std::size_t n, bool parallel, Fn&& chunk_sum) {
    const std::size_t nchunks = (n + reduce_chunk - 1) / reduce_chunk;
    std::vector<double> partial(nchunks, 0.0);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nchunks); ++c) {
            const std::size_t lo = static_cast<std::size_t>(c) * reduce_chunk;
            const std::size_t hi = std::min(n, lo + reduce_chunk);
            partial[static_cast<std::size_t>(c)] = chunk_sum(lo, hi);
        }
    } else {
        for (std::size_t c = 0; c < nchunks; ++c) {
            const std::size_t lo = c * reduce_chunk;
            const std::size_t hi = std::min(n, lo + reduce_chunk);
            partial[c] = chunk_sum(lo, hi);
        }
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}
}  // namespace

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

namespace serial {

double dot(const double* a, const double* b, std::size_t n) {
    return chunked_sum(n, false, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        return s;
    });
}

double max_abs(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(x[i]));
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay(const double* x, double alpha, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void csr_apply(const Csr& A, const double* x, double* y) {
    for (std::size_t r = 0; r < A.n; ++r) {
        double s = 0.0;
        for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) s += A.val[k] * x[A.col[k]];
        y[r] = s;
    }
}

void scale(const double* x, const double* d, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

void power_clamped(const double* x, double lo, double hi, double p, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double c = std::min(hi, std::max(lo, x[i]));
        y[i] = std::pow(c, p);
    }
}

void accumulate_scaled(double w, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += w * x[i];
}

}  // namespace serial

namespace par {

double dot(const double* a, const double* b, std::size_t n) {
    return chunked_sum(n, true, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        return s;
    });
}

double max_abs(const double* x, std::size_t n) {
    // max is exact and order-free, so a plain reduction stays deterministic
    double s = 0.0;
#pragma omp parallel for schedule(static) reduction(max : s)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        s = std::max(s, std::abs(x[i]));
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] += alpha * x[i];
}

void xpay(const double* x, double alpha, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = x[i] + alpha * y[i];
}

void csr_apply(const Csr& A, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(A.n); ++r) {
        double s = 0.0;
        for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) s += A.val[k] * x[A.col[k]];
        y[r] = s;
    }
}

void scale(const double* x, const double* d, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = d[i] * x[i];
}

void power_clamped(const double* x, double lo, double hi, double p, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        double c = std::min(hi, std::max(lo, x[i]));
        y[i] = std::pow(c, p);
    }
}

void accumulate_scaled(double w, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] += w * x[i];
}

}  // namespace par

double dot(const double* a, const double* b, std::size_t n) {
    return g_backend == Backend::parallel ? par::dot(a, b, n) : serial::dot(a, b, n);
}
double max_abs(const double* x, std::size_t n) {
    return g_backend == Backend::parallel ? par::max_abs(x, n) : serial::max_abs(x, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    g_backend == Backend::parallel ? par::axpy(alpha, x, y, n) : serial::axpy(alpha, x, y, n);
}
void xpay(const double* x, double alpha, double* y, std::size_t n) {
    g_backend == Backend::parallel ? par::xpay(x, alpha, y, n) : serial::xpay(x, alpha, y, n);
}
void csr_apply(const Csr& A, const double* x, double* y) {
    g_backend == Backend::parallel ? par::csr_apply(A, x, y) : serial::csr_apply(A, x, y);
}
void scale(const double* x, const double* d, double* y, std::size_t n) {
    g_backend == Backend::parallel ? par::scale(x, d, y, n) : serial::scale(x, d, y, n);
}
void power_clamped(const double* x, double lo, double hi, double p, double* y, std::size_t n) {
    g_backend == Backend::parallel ? par::power_clamped(x, lo, hi, p, y, n)
                                   : serial::power_clamped(x, lo, hi, p, y, n);
}
void accumulate_scaled(double w, const double* x, double* y, std::size_t n) {
    g_backend == Backend::parallel ? par::accumulate_scaled(w, x, y, n)
                                   : serial::accumulate_scaled(w, x, y, n);
}

}  // namespace pmelab::kernels
