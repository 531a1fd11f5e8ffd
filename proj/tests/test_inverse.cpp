#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pmelab/inverse.hpp"
#include "pmelab/quadrature.hpp"

using namespace pmelab;

namespace {
constexpr double kGamma32 = 0.88622692545275801365;  // Gamma(3/2)

Grid unit_square(int n) { return make_grid(2, {n, n}, {1.0, 1.0}); }

ScalarField from_fn(const Grid& g, double (*f)(double, double)) {
    ScalarField out(g);
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        auto x = g.coords(i);
        out.v[i] = f(x[0], x[1]);
    }
    return out;
}

double rel_l2(const ScalarField& est, const ScalarField& truth) {
    double num = 0.0, den = 0.0;
    const Grid& g = *truth.grid;
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        double d = est.v[i] - truth.v[i];
        num += g.node_weight[i] * d * d;
        den += g.node_weight[i] * truth.v[i] * truth.v[i];
    }
    return std::sqrt(num / den);
}
}  // namespace

TEST_CASE("moment formula is the scaled central difference") {
    Grid g = unit_square(7);
    MomentRow row;
    row.s = 0.25;
    row.h_max_abs = 1.0;
    row.fit_noise = 1e-3;
    row.b_plus = BoundaryField(g, 0.0);
    row.b_minus = BoundaryField(g, 0.0);
    BoundaryField W(g, 0.0);
    for (std::size_t b = 0; b < g.num_boundary(); ++b) {
        auto x = g.coords(g.boundary[b].node);
        row.b_plus.v[b] = 0.3 + x[0];
        row.b_minus.v[b] = 0.1 - x[1];
        W.v[b] = 1.0 + x[0] * x[1];
    }
    double m = 2.0;
    double bias = 0.0, noise = 0.0;
    double mu = epsilon_moment(row, W, m, &bias, &noise);
    BoundaryField diff(g, 0.0);
    for (std::size_t b = 0; b < g.num_boundary(); ++b) diff.v[b] = row.b_plus.v[b] - row.b_minus.v[b];
    double expect = m * boundary_pair(diff, W) / (2.0 * row.s * kGamma32);
    CHECK(mu == doctest::Approx(expect).epsilon(1e-12));
    CHECK(bias > 0.0);
    CHECK(noise > 0.0);
    CHECK(bias >= noise);  // the bias scale folds the noise part in

    // linearity in the test function
    BoundaryField W2(g, 1.0);
    BoundaryField mix(g, 0.0);
    for (std::size_t b = 0; b < g.num_boundary(); ++b) mix.v[b] = 2.0 * W.v[b] - 0.5 * W2.v[b];
    CHECK(epsilon_moment(row, mix, m) ==
          doctest::Approx(2.0 * epsilon_moment(row, W, m) - 0.5 * epsilon_moment(row, W2, m))
              .epsilon(1e-12));

    // halving s doubles the noise share of the error scale
    MomentRow half = row;
    half.s = 0.125;
    double noise_half = 0.0;
    epsilon_moment(half, W, m, nullptr, &noise_half);
    CHECK(noise_half == doctest::Approx(2.0 * noise).epsilon(1e-12));
}

TEST_CASE("harmonic polynomial family is harmonic and complete per degree") {
    Grid g = unit_square(11);
    ScalarField gamma(g, 1.0);
    DivOperator op(g, gamma);
    HarmonicFamily fam = harmonic_polynomials(op, 2);
    REQUIRE(fam.fields.size() == 6);  // 1, x1, x2, x1^2, x1 x2, x2^2 traces
    REQUIRE(fam.traces.size() == 6);
    REQUIRE(fam.names.size() == 6);
    for (const ScalarField& f : fam.fields) {
        ScalarField Lf = op.apply_nodal(f);
        for (std::size_t i : op.interior()) CHECK(std::abs(Lf.v[i]) < 1e-9);
    }
    for (std::size_t i = 0; i < g.num_nodes; ++i) CHECK(fam.fields[0].v[i] == doctest::Approx(1.0));
    // lifts agree with their traces on the boundary
    for (std::size_t k = 0; k < fam.fields.size(); ++k) {
        BoundaryField tr = restrict_to_boundary(fam.fields[k]);
        for (std::size_t b = 0; b < g.num_boundary(); ++b)
            CHECK(tr.v[b] == doctest::Approx(fam.traces[k].v[b]).epsilon(1e-12));
    }
}

TEST_CASE("exact moments reconstruct a constant to solver precision") {
    Grid g = unit_square(9);
    ScalarField gamma(g, 1.0);
    DivOperator op(g, gamma);
    HarmonicFamily fam = harmonic_polynomials(op, 2);
    ScalarField eps_true(g, 2.0);

    MomentSystem sys;
    sys.m = 2.0;
    sys.c_m = kGamma32;
    for (std::size_t k = 0; k < fam.fields.size(); ++k) {
        double wmax = 0.0;
        for (double v : fam.fields[k].v) wmax = std::max(wmax, std::abs(v));
        ScalarField H = fam.fields[k];
        for (double& v : H.v) v += 1.0 + wmax;  // positive multiplier
        sys.H.push_back(std::move(H));
        sys.W.push_back(fam.fields[k]);
        sys.Wtrace.push_back(fam.traces[k]);
        sys.names.push_back(fam.names[k]);
        sys.s_used.push_back(0.0);  // no finite-difference bias in exact data
    }
    for (std::size_t i = 0; i < sys.H.size(); ++i) {
        std::vector<double> mu_i, bias_i, noise_i;
        for (std::size_t j = 0; j < sys.W.size(); ++j) {
            mu_i.push_back(integrate_triple(eps_true, sys.H[i], sys.W[j]));
            bias_i.push_back(1e-10);
            noise_i.push_back(0.0);
        }
        sys.mu.push_back(mu_i);
        sys.bias.push_back(bias_i);
        sys.noise.push_back(noise_i);
    }

    EpsilonReconReport rep = recover_epsilon(sys, g);
    CHECK(rep.effective_rank >= 6);
    CHECK(rep.residual <= 1e-6);
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        CHECK(rep.eps_hat.v[i] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("measured moments match direct volume integrals") {
    // Full twin-pipeline moment build on the flat problem: mu[i][j] must land
    // within a few percent of integral eps H_i W_j.
    Grid g = unit_square(9);
    ScalarField eps(g, 1.0), gamma(g, 1.0);
    PipelineOptions opts = default_pipeline_options();
    opts.hs = h_schedule(2.0, 16.0, 6);
    MomentSystem sys = build_moment_system(g, eps, gamma, gamma, 2.0, 1, opts);
    REQUIRE(sys.H.size() == 3);
    REQUIRE(sys.mu.size() == 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < sys.H.size(); ++i)
        for (std::size_t j = 0; j < sys.W.size(); ++j) {
            double direct = integrate_triple(eps, sys.H[i], sys.W[j]);
            worst = std::max(worst, std::abs(sys.mu[i][j] - direct) / (1.0 + std::abs(direct)));
        }
    CHECK(worst < 0.03);

    EpsilonReconReport rep = recover_epsilon(sys, g);
    CHECK(rel_l2(rep.eps_hat, eps) < 0.05);
}

TEST_CASE("gauss-newton recovers a linear conductivity from exact traces") {
    Grid g = unit_square(13);
    ScalarField gamma_true = from_fn(g, [](double x, double) { return 1.0 + 0.2 * x; });
    DivOperator op_true(g, gamma_true);

    GammaInverseProblem prob;
    prob.grid = &g;
    prob.lower = 0.5;
    prob.upper = 2.0;
    prob.alpha = 1e-8;
    auto monomial = [&](int px, int py) {
        BoundaryField tr(g, 0.0);
        for (std::size_t b = 0; b < g.num_boundary(); ++b) {
            auto x = g.coords(g.boundary[b].node);
            tr.v[b] = std::pow(x[0], px) * std::pow(x[1], py);
        }
        return tr;
    };
    int degs[8][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}};
    for (auto& d : degs) prob.basis.push_back(monomial(d[0], d[1]));
    ScalarField zero(g, 0.0);
    for (const BoundaryField& b : prob.basis) {
        EllipticResult lift = solve_dirichlet(op_true, zero, b);
        prob.A.push_back(neumann_trace(op_true, lift.V, zero));
    }

    GammaReconReport rep = recover_gamma(prob);
    CHECK(rep.consistency < 0.05);
    CHECK(rep.misfit < rep.misfit0 * 1e-4);
    CHECK(rel_l2(rep.gamma_hat, gamma_true) < 0.02);
}

TEST_CASE("budget note reports the counts it was given") {
    std::string note = inverse_budget_note(8, 48, 121);
    CHECK(note.find("8") != std::string::npos);
    CHECK(note.find("121") != std::string::npos);
}
