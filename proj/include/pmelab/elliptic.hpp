#pragma once

#include <string>
#include <vector>

#include "pmelab/linsolve.hpp"
#include "pmelab/stencil.hpp"

namespace pmelab {

// div(gamma grad V) = rhs in the interior, V = g on the boundary.
struct EllipticProblem {
    const Grid* grid = nullptr;
    ScalarField gamma;  // positive, nodal
    ScalarField rhs;    // divergence values (signed as written above)
    BoundaryField g;
};

struct EllipticResult {
    ScalarField V;  // boundary values filled with g
    LinearSolveReport solve;
};

EllipticResult solve_dirichlet(const EllipticProblem& p, const LinearSolveOptions& opts = {});
EllipticResult solve_dirichlet(const DivOperator& op, const ScalarField& rhs, const BoundaryField& g,
                               const LinearSolveOptions& opts = {});
// With a cached factorization of op.interior_matrix().
ScalarField solve_dirichlet(const DivOperator& op, const SpdFactor& factor, const ScalarField& rhs,
                            const BoundaryField& g);

// Weak (mass-lumped) Neumann trace gamma dV/dnu given the field and the
// interior equation values rhs = div(gamma grad V).
BoundaryField neumann_trace(const DivOperator& op, const ScalarField& V, const ScalarField& rhs);

// gamma-harmonic lifts of the given boundary traces.
std::vector<ScalarField> harmonic_family(const DivOperator& op, const std::vector<BoundaryField>& traces,
                                         const LinearSolveOptions& opts = {});

// Dirichlet-to-Neumann matrix M_ij = <trace of lift(g_i), g_j> over the surface
// quadrature; optionally exported as CSV.
std::vector<std::vector<double>> dn_matrix(const DivOperator& op, const std::vector<BoundaryField>& basis,
                                           const LinearSolveOptions& opts = {});
void write_dn_matrix_csv(const std::string& path, const std::vector<std::vector<double>>& M);

}  // namespace pmelab
