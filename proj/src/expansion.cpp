#include "pmelab/expansion.hpp"

#include <algorithm>
#include <cmath>

#include "pmelab/quadrature.hpp"
#include "pmelab/special.hpp"

namespace pmelab {

double remainder_order(double m) {
    require(m >= 1.0, "expansion: exponent m must be >= 1");
    return std::min(1.0, 2.0 - 2.0 / m);
}

ExpansionOracle build_oracle(const DivOperator& op, const ScalarField& eps, double m,
                             const BoundaryField& g, const LinearSolveOptions& opts) {
    const Grid& grid = op.grid();
    require(eps.v.size() == grid.num_nodes, "expansion: eps does not match the grid");
    require(g.v.size() == grid.num_boundary(), "expansion: g does not match the boundary");
    ExpansionOracle o;
    o.m = m;
    o.c_m = gamma_one_plus(m);

    (void)opts;
    ScalarField zero_rhs(grid, 0.0);
    SpdFactor factor(op.interior_matrix());  // two solves share one factorization
    o.V0 = solve_dirichlet(op, factor, zero_rhs, g);

    o.V0_pow = ScalarField(grid, 0.0);
    for (std::size_t i = 0; i < grid.num_nodes; ++i)
        o.V0_pow.v[i] = std::pow(std::max(o.V0.v[i], 0.0), 1.0 / m);

    ScalarField rhs1(grid, 0.0);
    for (std::size_t i = 0; i < grid.num_nodes; ++i) rhs1.v[i] = o.c_m * eps.v[i] * o.V0_pow.v[i];
    BoundaryField zero_g(grid, 0.0);
    o.V1 = solve_dirichlet(op, factor, rhs1, zero_g);

    o.A0 = op.weak_trace(o.V0, zero_rhs);
    o.B0 = op.weak_trace(o.V1, rhs1);
    return o;
}

std::pair<ScalarField, ScalarField> remainders(const ScalarField& V, const ExpansionOracle& oracle,
                                               double h) {
    const Grid& grid = *V.grid;
    require(oracle.V0.v.size() == V.v.size(), "expansion: oracle and V grids differ");
    ScalarField R1(grid, 0.0), R2(grid, 0.0);
    double hm = std::pow(h, 1.0 / oracle.m);
    for (std::size_t i = 0; i < grid.num_nodes; ++i) {
        R1.v[i] = V.v[i] - h * h * oracle.V0.v[i];
        R2.v[i] = R1.v[i] - hm * oracle.V1.v[i];
    }
    return {std::move(R1), std::move(R2)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "expansion: slope needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]);
        double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double n = double(x.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

void check_fit_inputs(const std::vector<DNSample>& samples) {
    require(samples.size() >= 3, "expansion: the fit needs at least three h samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        require(samples[i].h > samples[i - 1].h, "expansion: h samples must be strictly increasing");
    require(samples.back().h >= 10.0 * samples.front().h * (1.0 - 1e-12),
            "expansion: h samples must span at least one decade");
}

void fill_residuals(FitResult& fit, const std::vector<DNSample>& samples, double m) {
    const Grid& grid = *samples.front().lambda.grid;
    double p = 1.0 / m - 2.0;
    fit.residual_norm.clear();
    for (const DNSample& s : samples) {
        BoundaryField r(grid, 0.0);
        double hp = std::pow(s.h, p);
        for (std::size_t b = 0; b < grid.num_boundary(); ++b)
            r.v[b] = s.lambda.v[b] - fit.A.v[b] - hp * fit.B.v[b];
        fit.residual_norm.push_back(boundary_l2(r));
    }
    fit.remainder_slope = loglog_slope(fit.hs, fit.residual_norm);
}

}  // namespace

FitResult fit_expansion(const std::vector<DNSample>& samples, double m, FitWeights weights) {
    check_fit_inputs(samples);
    const Grid& grid = *samples.front().lambda.grid;
    double p = 1.0 / m - 2.0;
    double M = remainder_order(m);

    // Weighted normal equations, shared by every boundary node.
    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    std::vector<double> w2(samples.size()), phi(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        double wgt = weights == FitWeights::uniform ? 1.0 : std::pow(samples[s].h, M + 2.0);
        w2[s] = wgt * wgt;
        phi[s] = std::pow(samples[s].h, p);
        g00 += w2[s];
        g01 += w2[s] * phi[s];
        g11 += w2[s] * phi[s] * phi[s];
    }
    double det = g00 * g11 - g01 * g01;
    require(det > 1e-14 * g00 * g11, "expansion: h samples are collinear for the fit basis");

    double tr = g00 + g11;
    double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    double lam_max = tr / 2.0 + disc, lam_min = tr / 2.0 - disc;

    FitResult fit;
    fit.condition = lam_max / std::max(lam_min, 1e-300);
    fit.A = BoundaryField(grid, 0.0);
    fit.B = BoundaryField(grid, 0.0);
    fit.node_residual.assign(grid.num_boundary(), 0.0);
    for (const DNSample& s : samples) fit.hs.push_back(s.h);

    for (std::size_t b = 0; b < grid.num_boundary(); ++b) {
        double r0 = 0.0, r1 = 0.0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            double y = samples[s].lambda.v[b];
            r0 += w2[s] * y;
            r1 += w2[s] * phi[s] * y;
        }
        double A = (g11 * r0 - g01 * r1) / det;
        double B = (g00 * r1 - g01 * r0) / det;
        fit.A.v[b] = A;
        fit.B.v[b] = B;
        double acc = 0.0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            double res = samples[s].lambda.v[b] - A - phi[s] * B;
            acc += w2[s] * res * res;
        }
        fit.node_residual[b] = std::sqrt(acc / double(samples.size()));
    }
    fill_residuals(fit, samples, m);
    return fit;
}

FitResult fit_expansion_peeling(const std::vector<DNSample>& samples, double m) {
    check_fit_inputs(samples);
    const Grid& grid = *samples.front().lambda.grid;
    double p = 1.0 / m - 2.0;
    const DNSample& top = samples.back();
    const DNSample& next = samples[samples.size() - 2];

    FitResult fit;
    fit.condition = 1.0;
    fit.A = top.lambda;
    fit.B = BoundaryField(grid, 0.0);
    double hp = std::pow(next.h, p);
    for (std::size_t b = 0; b < grid.num_boundary(); ++b)
        fit.B.v[b] = (next.lambda.v[b] - fit.A.v[b]) / hp;
    fit.node_residual.assign(grid.num_boundary(), 0.0);
    for (const DNSample& s : samples) fit.hs.push_back(s.h);
    fill_residuals(fit, samples, m);
    return fit;
}

}  // namespace pmelab
