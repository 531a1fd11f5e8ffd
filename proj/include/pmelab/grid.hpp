#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmelab {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Tensor-product grid on [0,extent_a] per axis. Node linear index is row-major
// over (i1,...,id) with the last axis fastest. Volume weights are trapezoid
// weights (halved at extremal indices); surface weights likewise per boundary
// face, summed when a node lies on several faces. The outward normal of a
// corner/edge node is assigned to the lowest-index axis on which the node is
// extremal.
struct Grid {
    int dim = 0;
    std::array<int, 3> counts{1, 1, 1};
    std::array<double, 3> extents{0.0, 0.0, 0.0};
    std::array<double, 3> dx{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> stride{0, 0, 0};
    std::size_t num_nodes = 0;

    struct BoundaryNode {
        std::size_t node;    // linear node index
        int axis;            // normal axis (lowest extremal axis)
        int side;            // -1 low face, +1 high face
        double surf_weight;  // total surface quadrature weight
    };
    std::vector<BoundaryNode> boundary;          // ascending node index
    std::vector<std::ptrdiff_t> boundary_index;  // per node: index into boundary, -1 interior
    std::vector<double> node_weight;             // volume quadrature weight per node

    std::array<int, 3> multi(std::size_t node) const {
        std::array<int, 3> ix{0, 0, 0};
        for (int a = dim - 1; a >= 0; --a) {
            ix[a] = static_cast<int>(node % static_cast<std::size_t>(counts[a]));
            node /= static_cast<std::size_t>(counts[a]);
        }
        return ix;
    }
    std::size_t linear(const std::array<int, 3>& ix) const {
        std::size_t n = 0;
        for (int a = 0; a < dim; ++a) n = n * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(ix[a]);
        return n;
    }
    std::array<double, 3> coords(std::size_t node) const {
        auto ix = multi(node);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) x[a] = dx[a] * ix[a];
        return x;
    }
    bool is_boundary(std::size_t node) const { return boundary_index[node] >= 0; }
    std::size_t num_boundary() const { return boundary.size(); }
};

Grid make_grid(int dim, const std::vector<int>& counts, const std::vector<double>& extents);

// Node values over the whole grid.
struct ScalarField {
    const Grid* grid = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(&g), v(g.num_nodes, fill) {}
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

// Values on boundary nodes only, ordered as grid.boundary.
struct BoundaryField {
    const Grid* grid = nullptr;
    std::vector<double> v;

    BoundaryField() = default;
    explicit BoundaryField(const Grid& g, double fill = 0.0) : grid(&g), v(g.num_boundary(), fill) {}
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

// Time series of scalar fields on a shared grid; stamps strictly increasing from 0.
struct TimeField {
    const Grid* grid = nullptr;
    std::vector<double> stamps;
    std::vector<ScalarField> frames;

    TimeField() = default;
    TimeField(const Grid& g, std::vector<double> stamps_in)
        : grid(&g), stamps(std::move(stamps_in)), frames(stamps.size(), ScalarField(g)) {}

    std::size_t steps() const { return stamps.size(); }
};

BoundaryField restrict_to_boundary(const ScalarField& f);
ScalarField extend_by_zero(const BoundaryField& b);

}  // namespace pmelab
