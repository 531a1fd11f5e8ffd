#include "pmelab/elliptic.hpp"

#include <fstream>

#include "pmelab/io.hpp"
#include "pmelab/quadrature.hpp"

namespace pmelab {

EllipticResult solve_dirichlet(const DivOperator& op, const ScalarField& rhs, const BoundaryField& g,
                               const LinearSolveOptions& opts) {
    EllipticResult out;
    auto b = op.interior_rhs(rhs, g);
    auto x = solve_spd(op.interior_matrix(), b, opts, &out.solve);
    out.V = op.scatter_interior(x, g);
    return out;
}

EllipticResult solve_dirichlet(const EllipticProblem& p, const LinearSolveOptions& opts) {
    DivOperator op(*p.grid, p.gamma);
    return solve_dirichlet(op, p.rhs, p.g, opts);
}

ScalarField solve_dirichlet(const DivOperator& op, const SpdFactor& factor, const ScalarField& rhs,
                            const BoundaryField& g) {
    auto b = op.interior_rhs(rhs, g);
    auto x = factor.solve(b);
    return op.scatter_interior(x, g);
}

BoundaryField neumann_trace(const DivOperator& op, const ScalarField& V, const ScalarField& rhs) {
    return op.weak_trace(V, rhs);
}

std::vector<ScalarField> harmonic_family(const DivOperator& op, const std::vector<BoundaryField>& traces,
                                         const LinearSolveOptions& opts) {
    std::vector<ScalarField> out;
    out.reserve(traces.size());
    ScalarField zero(op.grid(), 0.0);
    if (op.interior_matrix().n < opts.direct_cutoff && !opts.force_iterative) {
        SpdFactor f(op.interior_matrix());
        for (const auto& g : traces) out.push_back(solve_dirichlet(op, f, zero, g));
    } else {
        for (const auto& g : traces) out.push_back(solve_dirichlet(op, zero, g, opts).V);
    }
    return out;
}

std::vector<std::vector<double>> dn_matrix(const DivOperator& op, const std::vector<BoundaryField>& basis,
                                           const LinearSolveOptions& opts) {
    auto lifts = harmonic_family(op, basis, opts);
    ScalarField zero(op.grid(), 0.0);
    std::vector<std::vector<double>> M(basis.size(), std::vector<double>(basis.size(), 0.0));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto tr = op.weak_trace(lifts[i], zero);
        for (std::size_t j = 0; j < basis.size(); ++j) M[i][j] = boundary_pair(tr, basis[j]);
    }
    return M;
}

void write_dn_matrix_csv(const std::string& path, const std::vector<std::vector<double>>& M) {
    std::ofstream os(path);
    require(bool(os), "cannot open for writing: " + path);
    for (const auto& row : M) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_double(row[j]);
        os << "\n";
    }
}

}  // namespace pmelab
