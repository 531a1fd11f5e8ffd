#pragma once

#include <vector>

#include "pmelab/grid.hpp"
#include "pmelab/kernels.hpp"

namespace pmelab {

// Divergence-form operator div(gamma grad .) on the grid with harmonic
// averaging of gamma at cell faces. Away from the boundary the nodal value is
// the standard 2d+1-point second-order stencil. The finite-volume scaling
// (node volume weights) makes discrete integration by parts exact:
//   bilinear(u,w) = -sum_i w_i * (L u)_i * vol_i  for w vanishing on the
// boundary, and the weak trace satisfies the discrete divergence theorem
// against the surface quadrature with no consistency error.
class DivOperator {
  public:
    struct Face {
        std::size_t i, j;  // neighboring nodes, i < j, along some axis
        double w;          // gamma_face * face_volume / dx^2
    };

    DivOperator(const Grid& grid, const ScalarField& gamma);

    const Grid& grid() const { return *grid_; }
    const std::vector<Face>& faces() const { return faces_; }
    const std::vector<std::size_t>& interior() const { return interior_; }
    std::ptrdiff_t interior_index(std::size_t node) const { return node_to_interior_[node]; }

    // Nodal operator value at every node: (L u)_i = sum_faces w (u_j - u_i) / vol_i.
    ScalarField apply_nodal(const ScalarField& u) const;

    // Energy bilinear form a(u,w) = sum_f w_f (u_i - u_j)(w_i - w_j)  (= integral gamma grad u . grad w).
    double bilinear(const ScalarField& u, const ScalarField& w) const;

    // Weak Neumann trace of V given the interior equation values rhs = L V:
    // trace_b = (a(V, hat_b) + vol_b * rhs_b) / surf_b.
    BoundaryField weak_trace(const ScalarField& V, const ScalarField& rhs) const;

    // SPD matrix over interior unknowns (Dirichlet columns folded to the right
    // hand side): matrix(u_int) = -vol .* (L u)_int for u with zero boundary.
    const kernels::Csr& interior_matrix() const { return csr_; }
    // b such that interior_matrix * V_int = b for L V = rhs, V|bdry = g.
    std::vector<double> interior_rhs(const ScalarField& rhs, const BoundaryField& g) const;

    std::vector<double> gather_interior(const ScalarField& u) const;
    ScalarField scatter_interior(const std::vector<double>& u_int, const BoundaryField& g) const;

  private:
    const Grid* grid_;
    std::vector<Face> faces_;
    std::vector<std::size_t> interior_;
    std::vector<std::ptrdiff_t> node_to_interior_;
    kernels::Csr csr_;
    // faces grouped by boundary endpoint for the weak trace
};

double harmonic_mean(double a, double b);

}  // namespace pmelab
