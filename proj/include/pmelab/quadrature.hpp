#pragma once

#include "pmelab/grid.hpp"

namespace pmelab {

// Trapezoid volume quadrature over the grid.
double integrate(const ScalarField& f);
double integrate_product(const ScalarField& a, const ScalarField& b);
double integrate_triple(const ScalarField& a, const ScalarField& b, const ScalarField& c);

// Surface quadrature pairing over the boundary (weights halve at edges and
// corners; a corner accumulates the weight of every face it lies on).
double boundary_pair(const BoundaryField& a, const BoundaryField& b);

double linf(const ScalarField& f);
double linf(const BoundaryField& f);
double l2(const ScalarField& f);            // sqrt(integral f^2)
double boundary_l2(const BoundaryField& f); // sqrt(surface integral f^2)

}  // namespace pmelab
