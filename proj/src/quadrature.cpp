#include "pmelab/quadrature.hpp"

#include <cmath>

#include "pmelab/kernels.hpp"

namespace pmelab {

double integrate(const ScalarField& f) {
    return kernels::dot(f.v.data(), f.grid->node_weight.data(), f.size());
}

double integrate_product(const ScalarField& a, const ScalarField& b) {
    const Grid& g = *a.grid;
    std::vector<double> tmp(g.num_nodes);
    kernels::scale(a.v.data(), b.v.data(), tmp.data(), g.num_nodes);
    return kernels::dot(tmp.data(), g.node_weight.data(), g.num_nodes);
}

double integrate_triple(const ScalarField& a, const ScalarField& b, const ScalarField& c) {
    const Grid& g = *a.grid;
    std::vector<double> tmp(g.num_nodes);
    kernels::scale(a.v.data(), b.v.data(), tmp.data(), g.num_nodes);
    kernels::scale(tmp.data(), c.v.data(), tmp.data(), g.num_nodes);
    return kernels::dot(tmp.data(), g.node_weight.data(), g.num_nodes);
}

double boundary_pair(const BoundaryField& a, const BoundaryField& b) {
    const Grid& g = *a.grid;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += g.boundary[i].surf_weight * a[i] * b[i];
    return s;
}

double linf(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double linf(const BoundaryField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double l2(const ScalarField& f) { return std::sqrt(integrate_product(f, f)); }

double boundary_l2(const BoundaryField& f) { return std::sqrt(boundary_pair(f, f)); }

}  // namespace pmelab
