#pragma once

#include <cstddef>
#include <vector>

// Data-parallel kernels with two backends: a serial reference and an OpenMP
// path. Both use the same fixed chunking for reductions (partial sums combined
// in chunk order), so results are bit-identical across backends and thread
// counts.
namespace pmelab::kernels {

enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);
int max_threads();
void set_threads(int n);  // n <= 0 leaves the OpenMP default

inline constexpr std::size_t reduce_chunk = 1024;

// CSR matrix, square, row-major.
struct Csr {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // size n+1
    std::vector<std::size_t> col;
    std::vector<double> val;
};

namespace serial {
double dot(const double* a, const double* b, std::size_t n);
double max_abs(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);           // y += alpha*x
void xpay(const double* x, double alpha, double* y, std::size_t n);           // y = x + alpha*y
void csr_apply(const Csr& A, const double* x, double* y);                     // y = A*x
void scale(const double* x, const double* d, double* y, std::size_t n);       // y = d.*x
void power_clamped(const double* x, double lo, double hi, double p, double* y, std::size_t n);
// y[i] += w * x[i] for a time-frame accumulation.
void accumulate_scaled(double w, const double* x, double* y, std::size_t n);

inline double max_abs(const std::vector<double>& x) { return max_abs(x.data(), x.size()); }
}  // namespace serial

namespace par {
double dot(const double* a, const double* b, std::size_t n);
double max_abs(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void xpay(const double* x, double alpha, double* y, std::size_t n);
void csr_apply(const Csr& A, const double* x, double* y);
void scale(const double* x, const double* d, double* y, std::size_t n);
void power_clamped(const double* x, double lo, double hi, double p, double* y, std::size_t n);
void accumulate_scaled(double w, const double* x, double* y, std::size_t n);
}  // namespace par

// Backend-dispatching front ends used by the solvers.
double dot(const double* a, const double* b, std::size_t n);
double max_abs(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void xpay(const double* x, double alpha, double* y, std::size_t n);
void csr_apply(const Csr& A, const double* x, double* y);
void scale(const double* x, const double* d, double* y, std::size_t n);
void power_clamped(const double* x, double lo, double hi, double p, double* y, std::size_t n);
void accumulate_scaled(double w, const double* x, double* y, std::size_t n);

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return dot(a.data(), b.data(), a.size());
}
inline double max_abs(const std::vector<double>& x) { return max_abs(x.data(), x.size()); }

}  // namespace pmelab::kernels
