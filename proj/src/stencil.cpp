#include "pmelab/stencil.hpp"

#include <algorithm>
#include <map>

namespace pmelab {

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

DivOperator::DivOperator(const Grid& grid, const ScalarField& gamma) : grid_(&grid) {
    require(gamma.size() == grid.num_nodes, "gamma field does not match grid");
    const int dim = grid.dim;
    for (std::size_t n = 0; n < grid.num_nodes; ++n) {
        auto ix = grid.multi(n);
        for (int a = 0; a < dim; ++a) {
            if (ix[a] + 1 >= grid.counts[a]) continue;
            std::size_t nb = n + grid.stride[a];
            double trans = 1.0;
            for (int e = 0; e < dim; ++e) {
                if (e == a) continue;
                bool ext = ix[e] == 0 || ix[e] == grid.counts[e] - 1;
                trans *= grid.dx[e] * (ext ? 0.5 : 1.0);
            }
            double vol_f = grid.dx[a] * trans;
            double w = harmonic_mean(gamma[n], gamma[nb]) * vol_f / (grid.dx[a] * grid.dx[a]);
            faces_.push_back({n, nb, w});
        }
    }

    node_to_interior_.assign(grid.num_nodes, -1);
    for (std::size_t n = 0; n < grid.num_nodes; ++n) {
        if (!grid.is_boundary(n)) {
            node_to_interior_[n] = static_cast<std::ptrdiff_t>(interior_.size());
            interior_.push_back(n);
        }
    }

    // Interior SPD matrix in CSR, ordered by interior index.
    const std::size_t ni = interior_.size();
    std::vector<std::map<std::size_t, double>> rows(ni);
    for (const auto& f : faces_) {
        auto ii = node_to_interior_[f.i];
        auto jj = node_to_interior_[f.j];
        if (ii >= 0) rows[ii][static_cast<std::size_t>(ii)] += f.w;
        if (jj >= 0) rows[jj][static_cast<std::size_t>(jj)] += f.w;
        if (ii >= 0 && jj >= 0) {
            rows[ii][static_cast<std::size_t>(jj)] -= f.w;
            rows[jj][static_cast<std::size_t>(ii)] -= f.w;
        }
    }
    csr_.n = ni;
    csr_.row_ptr.assign(ni + 1, 0);
    for (std::size_t r = 0; r < ni; ++r) csr_.row_ptr[r + 1] = csr_.row_ptr[r] + rows[r].size();
    csr_.col.resize(csr_.row_ptr[ni]);
    csr_.val.resize(csr_.row_ptr[ni]);
    for (std::size_t r = 0; r < ni; ++r) {
        std::size_t k = csr_.row_ptr[r];
        for (const auto& [c, v] : rows[r]) {
            csr_.col[k] = c;
            csr_.val[k] = v;
            ++k;
        }
    }
}

ScalarField DivOperator::apply_nodal(const ScalarField& u) const {
    const Grid& g = *grid_;
    ScalarField out(g, 0.0);
    for (const auto& f : faces_) {
        double flux = f.w * (u[f.j] - u[f.i]);
        out[f.i] += flux;
        out[f.j] -= flux;
    }
    for (std::size_t n = 0; n < g.num_nodes; ++n) out[n] /= g.node_weight[n];
    return out;
}

double DivOperator::bilinear(const ScalarField& u, const ScalarField& w) const {
    // fixed-order chunked reduction over faces for determinism
    const std::size_t nf = faces_.size();
    const std::size_t chunk = kernels::reduce_chunk;
    double total = 0.0;
    for (std::size_t lo = 0; lo < nf; lo += chunk) {
        const std::size_t hi = std::min(nf, lo + chunk);
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& f = faces_[k];
            s += f.w * (u[f.i] - u[f.j]) * (w[f.i] - w[f.j]);
        }
        total += s;
    }
    return total;
}

BoundaryField DivOperator::weak_trace(const ScalarField& V, const ScalarField& rhs) const {
    const Grid& g = *grid_;
    BoundaryField tr(g, 0.0);
    for (const auto& f : faces_) {
        auto bi = g.boundary_index[f.i];
        auto bj = g.boundary_index[f.j];
        if (bi >= 0) tr[bi] += f.w * (V[f.i] - V[f.j]);
        if (bj >= 0) tr[bj] += f.w * (V[f.j] - V[f.i]);
    }
    for (std::size_t b = 0; b < tr.size(); ++b) {
        const auto& bn = g.boundary[b];
        tr[b] = (tr[b] + g.node_weight[bn.node] * rhs[bn.node]) / bn.surf_weight;
    }
    return tr;
}

std::vector<double> DivOperator::interior_rhs(const ScalarField& rhs, const BoundaryField& g) const {
    const Grid& gr = *grid_;
    std::vector<double> b(interior_.size(), 0.0);
    for (const auto& f : faces_) {
        auto ii = node_to_interior_[f.i];
        auto jj = node_to_interior_[f.j];
        if (ii >= 0 && jj < 0) b[ii] += f.w * g[gr.boundary_index[f.j]];
        if (jj >= 0 && ii < 0) b[jj] += f.w * g[gr.boundary_index[f.i]];
    }
    for (std::size_t r = 0; r < interior_.size(); ++r) {
        b[r] -= gr.node_weight[interior_[r]] * rhs[interior_[r]];
    }
    return b;
}

std::vector<double> DivOperator::gather_interior(const ScalarField& u) const {
    std::vector<double> out(interior_.size());
    for (std::size_t r = 0; r < interior_.size(); ++r) out[r] = u[interior_[r]];
    return out;
}

ScalarField DivOperator::scatter_interior(const std::vector<double>& u_int, const BoundaryField& g) const {
    ScalarField out(*grid_, 0.0);
    for (std::size_t r = 0; r < interior_.size(); ++r) out[interior_[r]] = u_int[r];
    for (std::size_t b = 0; b < g.size(); ++b) out[grid_->boundary[b].node] = g[b];
    return out;
}

}  // namespace pmelab
