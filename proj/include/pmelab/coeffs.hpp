#pragma once

#include <optional>
#include <string>

#include "pmelab/expr.hpp"
#include "pmelab/grid.hpp"

namespace pmelab {

// A coefficient is either an expression over x1..x3 or explicit nodal values,
// together with declared positive bounds the evaluation must respect.
struct CoefficientSpec {
    std::string expression;            // used when nodal is empty
    std::optional<ScalarField> nodal;  // explicit values
    double lower = 0.0;
    double upper = 0.0;

    static CoefficientSpec from_expression(std::string expr, double lo, double hi) {
        CoefficientSpec s;
        s.expression = std::move(expr);
        s.lower = lo;
        s.upper = hi;
        return s;
    }
    static CoefficientSpec from_field(ScalarField f, double lo, double hi) {
        CoefficientSpec s;
        s.nodal = std::move(f);
        s.lower = lo;
        s.upper = hi;
        return s;
    }
};

// Evaluates onto the grid and verifies declared bounds nodewise; a violation
// reports the offending node index and coordinates.
ScalarField eval_coefficient(const CoefficientSpec& spec, const Grid& grid);

ScalarField eval_expression(const Expr& e, const Grid& grid, double t = 0.0);

}  // namespace pmelab
