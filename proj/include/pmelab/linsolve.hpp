#pragma once

#include <memory>
#include <vector>

#include "pmelab/kernels.hpp"

namespace pmelab {

struct LinearSolveOptions {
    double rel_tol = 1e-10;
    std::size_t direct_cutoff = 20000;  // unknown count below which a sparse factorization is used
    bool force_iterative = false;
    bool force_direct = false;
};

struct LinearSolveReport {
    bool used_direct = false;
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

// SPD solve: direct sparse LDLT below the cutoff, Jacobi-preconditioned CG
// (max 50*sqrt(n) iterations, deterministic reductions) above it.
std::vector<double> solve_spd(const kernels::Csr& A, const std::vector<double>& b,
                              const LinearSolveOptions& opts = {}, LinearSolveReport* report = nullptr);

// Reusable SPD factorization (one factor, many right-hand sides).
class SpdFactor {
  public:
    explicit SpdFactor(const kernels::Csr& A);
    ~SpdFactor();
    SpdFactor(SpdFactor&&) noexcept;
    SpdFactor& operator=(SpdFactor&&) noexcept;
    std::vector<double> solve(const std::vector<double>& b) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// General sparse LU for the (nonsymmetric) Newton systems.
class LuFactor {
  public:
    LuFactor();
    ~LuFactor();
    void factor(const kernels::Csr& A);  // reuses the symbolic analysis across calls
    std::vector<double> solve(const std::vector<double>& b) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace pmelab
