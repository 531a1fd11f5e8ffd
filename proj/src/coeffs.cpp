#include "pmelab/coeffs.hpp"

#include <sstream>

namespace pmelab {

ScalarField eval_expression(const Expr& e, const Grid& grid, double t) {
    ScalarField f(grid);
    for (std::size_t n = 0; n < grid.num_nodes; ++n) {
        auto x = grid.coords(n);
        f[n] = e.eval(x[0], x[1], x[2], t);
    }
    return f;
}

ScalarField eval_coefficient(const CoefficientSpec& spec, const Grid& grid) {
    require(spec.lower > 0.0 && spec.upper >= spec.lower,
            "coefficient bounds must satisfy 0 < lower <= upper");
    ScalarField f;
    if (spec.nodal) {
        require(spec.nodal->size() == grid.num_nodes, "nodal coefficient size does not match grid");
        f = *spec.nodal;
        f.grid = &grid;
    } else {
        f = eval_expression(Expr::parse(spec.expression, false), grid);
    }
    for (std::size_t n = 0; n < grid.num_nodes; ++n) {
        if (!(f[n] >= spec.lower && f[n] <= spec.upper)) {
            auto x = grid.coords(n);
            std::ostringstream os;
            os << "coefficient value " << f[n] << " outside declared bounds [" << spec.lower << ", "
               << spec.upper << "] at node " << n << " (";
            for (int a = 0; a < grid.dim; ++a) os << (a ? ", " : "") << x[a];
            os << ")";
            throw std::invalid_argument(os.str());
        }
    }
    return f;
}

}  // namespace pmelab
