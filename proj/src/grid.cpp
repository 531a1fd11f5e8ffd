#include "pmelab/grid.hpp"

namespace pmelab {

Grid make_grid(int dim, const std::vector<int>& counts, const std::vector<double>& extents) {
    require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2, or 3");
    require(static_cast<int>(counts.size()) == dim, "counts size must equal dimension");
    require(static_cast<int>(extents.size()) == dim, "extents size must equal dimension");
    Grid g;
    g.dim = dim;
    g.num_nodes = 1;
    for (int a = 0; a < dim; ++a) {
        require(counts[a] >= 3, "grid needs at least 3 nodes per axis, axis " + std::to_string(a + 1));
        require(extents[a] > 0.0, "grid extent must be positive, axis " + std::to_string(a + 1));
        g.counts[a] = counts[a];
        g.extents[a] = extents[a];
        g.dx[a] = extents[a] / (counts[a] - 1);
        g.num_nodes *= static_cast<std::size_t>(counts[a]);
    }
    g.stride = {0, 0, 0};
    std::size_t s = 1;
    for (int a = dim - 1; a >= 0; --a) {
        g.stride[a] = s;
        s *= static_cast<std::size_t>(g.counts[a]);
    }

    g.node_weight.assign(g.num_nodes, 0.0);
    g.boundary_index.assign(g.num_nodes, -1);
    for (std::size_t n = 0; n < g.num_nodes; ++n) {
        auto ix = g.multi(n);
        double w = 1.0;
        int normal_axis = -1;
        int normal_side = 0;
        double surf = 0.0;
        for (int a = 0; a < dim; ++a) {
            bool lo = ix[a] == 0;
            bool hi = ix[a] == g.counts[a] - 1;
            w *= g.dx[a] * ((lo || hi) ? 0.5 : 1.0);
            if ((lo || hi) && normal_axis < 0) {
                normal_axis = a;
                normal_side = lo ? -1 : +1;
            }
            if (lo || hi) {
                // per-face surface weight: transverse trapezoid weights
                double sw = 1.0;
                for (int e = 0; e < dim; ++e) {
                    if (e == a) continue;
                    bool ext = ix[e] == 0 || ix[e] == g.counts[e] - 1;
                    sw *= g.dx[e] * (ext ? 0.5 : 1.0);
                }
                surf += sw;
            }
        }
        g.node_weight[n] = w;
        if (normal_axis >= 0) {
            g.boundary_index[n] = static_cast<std::ptrdiff_t>(g.boundary.size());
            g.boundary.push_back({n, normal_axis, normal_side, surf});
        }
    }
    return g;
}

BoundaryField restrict_to_boundary(const ScalarField& f) {
    BoundaryField b(*f.grid);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = f[f.grid->boundary[i].node];
    return b;
}

ScalarField extend_by_zero(const BoundaryField& b) {
    ScalarField f(*b.grid, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) f[b.grid->boundary[i].node] = b[i];
    return f;
}

}  // namespace pmelab
