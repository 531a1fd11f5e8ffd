#include "pmelab/linsolve.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>

namespace pmelab {

namespace {

Eigen::SparseMatrix<double> to_eigen(const kernels::Csr& A) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.val.size());
    for (std::size_t r = 0; r < A.n; ++r)
        for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
            trip.emplace_back(static_cast<int>(r), static_cast<int>(A.col[k]), A.val[k]);
    Eigen::SparseMatrix<double> M(static_cast<int>(A.n), static_cast<int>(A.n));
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

std::vector<double> cg_jacobi(const kernels::Csr& A, const std::vector<double>& b, double rel_tol,
                              LinearSolveReport* report) {
    const std::size_t n = A.n;
    std::vector<double> x(n, 0.0), r(b), z(n), p(n), Ap(n), dinv(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (A.col[k] == i) d = A.val[k];
        if (d == 0.0) throw std::runtime_error("CG: zero diagonal entry");
        dinv[i] = 1.0 / d;
    }
    const double bnorm = std::sqrt(kernels::dot(b.data(), b.data(), n));
    if (bnorm == 0.0) {
        if (report) *report = {false, 0, 0.0};
        return x;
    }
    const std::size_t max_iter = static_cast<std::size_t>(50.0 * std::sqrt(double(n))) + 10;
    kernels::scale(r.data(), dinv.data(), z.data(), n);
    p = z;
    double rz = kernels::dot(r.data(), z.data(), n);
    std::size_t it = 0;
    double rel = 1.0;
    for (; it < max_iter; ++it) {
        rel = std::sqrt(kernels::dot(r.data(), r.data(), n)) / bnorm;
        if (rel <= rel_tol) break;
        kernels::csr_apply(A, p.data(), Ap.data());
        const double pAp = kernels::dot(p.data(), Ap.data(), n);
        if (pAp <= 0.0) throw std::runtime_error("CG: matrix not positive definite");
        const double alpha = rz / pAp;
        kernels::axpy(alpha, p.data(), x.data(), n);
        kernels::axpy(-alpha, Ap.data(), r.data(), n);
        kernels::scale(r.data(), dinv.data(), z.data(), n);
        const double rz_new = kernels::dot(r.data(), z.data(), n);
        kernels::xpay(z.data(), rz_new / rz, p.data(), n);
        rz = rz_new;
    }
    if (rel > rel_tol)
        throw std::runtime_error("CG did not reach tolerance " + std::to_string(rel_tol) + " in " +
                                 std::to_string(max_iter) + " iterations (residual " + std::to_string(rel) + ")");
    if (report) *report = {false, it, rel};
    return x;
}

}  // namespace

std::vector<double> solve_spd(const kernels::Csr& A, const std::vector<double>& b,
                              const LinearSolveOptions& opts, LinearSolveReport* report) {
    const bool direct = !opts.force_iterative && (opts.force_direct || A.n < opts.direct_cutoff);
    if (!direct) return cg_jacobi(A, b, opts.rel_tol, report);

    SpdFactor f(A);
    auto x = f.solve(b);
    if (report) {
        std::vector<double> Ax(A.n);
        kernels::csr_apply(A, x.data(), Ax.data());
        kernels::axpy(-1.0, b.data(), Ax.data(), A.n);
        const double bn = std::sqrt(kernels::dot(b.data(), b.data(), A.n));
        const double rn = std::sqrt(kernels::dot(Ax.data(), Ax.data(), A.n));
        *report = {true, 0, bn > 0 ? rn / bn : 0.0};
    }
    return x;
}

struct SpdFactor::Impl {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

SpdFactor::SpdFactor(const kernels::Csr& A) : impl_(new Impl) {
    impl_->ldlt.compute(to_eigen(A));
    if (impl_->ldlt.info() != Eigen::Success) throw std::runtime_error("sparse LDLT factorization failed");
}
SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

std::vector<double> SpdFactor::solve(const std::vector<double>& b) const {
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
    Eigen::VectorXd x = impl_->ldlt.solve(rhs);
    return std::vector<double>(x.data(), x.data() + x.size());
}

struct LuFactor::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analyzed = false;
};

LuFactor::LuFactor() : impl_(new Impl) {}
LuFactor::~LuFactor() = default;

void LuFactor::factor(const kernels::Csr& A) {
    auto M = to_eigen(A);
    if (!impl_->analyzed) {
        impl_->lu.analyzePattern(M);
        impl_->analyzed = true;
    }
    impl_->lu.factorize(M);
    if (impl_->lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
}

std::vector<double> LuFactor::solve(const std::vector<double>& b) const {
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace pmelab
