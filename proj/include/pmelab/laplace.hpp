#pragma once

#include <array>
#include <string>
#include <vector>

#include "pmelab/pme.hpp"
#include "pmelab/stencil.hpp"

namespace pmelab {

enum class LaplaceRule {
    trapezoid,      // trapezoid applied to the product e^{-t/h} y(t)
    product_exact,  // exact integral of e^{-t/h} times the linear interpolant
};

// Quadrature for int e^{-t/h} y(t) dt over [t_0, inf) from samples y(t_s) on a
// stamp prefix covering [t_0, T], T >= horizon_factor * h. The part beyond T is
// completed in closed form: y is fitted on the power basis {t^p1, t^p2} over
// the last decade of stamps and the fit is integrated exactly with upper
// incomplete gamma functions. Everything is linear in the samples, so the rule
// collapses into a single weight per stamp.
struct TransformWeights {
    double h = 0.0;
    double horizon = 0.0;  // last stamp actually used (the tail starts here)
    std::size_t n = 0;     // prefix length
    std::vector<double> w; // collapsed weights (quadrature + tail completion)
    std::array<double, 2> powers{0.0, 0.0};
    std::array<double, 2> tail_moment{0.0, 0.0};  // int_T^inf e^{-t/h} t^{p_i} dt
    // Extraction vectors for the two tail-fit coefficients (zero outside the
    // fit window): coeff_i = sum_s alpha_i[s] * y_s.
    std::vector<double> alpha0, alpha1;
};

TransformWeights make_transform_weights(const std::vector<double>& stamps, double h,
                                        double horizon_factor, const std::array<double, 2>& tail_powers,
                                        LaplaceRule rule);

struct LaplaceValue {
    double value = 0.0;        // full transform including the fitted tail
    double tail = 0.0;         // fitted tail contribution alone
    double coeff0 = 0.0;       // fitted tail coefficients on {t^p1, t^p2}
    double coeff1 = 0.0;
    double truncation = 0.0;   // crude scale of what the tail completion stands in for
};

LaplaceValue laplace_of_series(const std::vector<double>& stamps, const std::vector<double>& values,
                               double h, double horizon_factor, const std::array<double, 2>& tail_powers,
                               LaplaceRule rule = LaplaceRule::trapezoid);

// Weighted frame sum over all nodes.
ScalarField apply_transform(const TimeField& y, const TransformWeights& tw);

// Frames of the solution and of its m-th power, prepared once and reused for
// every decay parameter h.
struct TransformInputs {
    const TimeField* u = nullptr;
    TimeField v;  // u^m framewise
    const PMEProblem* p = nullptr;
    double floor = 0.0;  // regularization floor the solution was computed with
};

TransformInputs prepare_transform(const TimeField& u, const PMEProblem& p, double floor_used);

struct TransformResult {
    ScalarField V;        // transform of u^m; solves the divergence-form equation
    ScalarField U;        // transform of u
    ScalarField N;        // (eps/h) U, the smooth right-hand side
    // Right-hand side assembled from the scheme's own time differences,
    //   sum_s w_s (eps du^s/dt - f_k(t_s)).
    // Agrees with the divergence operator applied to V at interior nodes up to
    // the nonlinear solver tolerance, and extends it consistently to the
    // boundary, which is what the weak conormal trace needs.
    ScalarField N_chain;
    double truncation_v = 0.0;
    double truncation_u = 0.0;
};

TransformResult transform_solution(const TransformInputs& in, double h, double horizon_factor,
                                   LaplaceRule rule = LaplaceRule::product_exact);

// One Dirichlet-to-Neumann sample: the weak conormal trace of V scaled by
// h^{-2}, plus diagnostics on the boundary identity V = h^2 g.
struct DNSample {
    double h = 0.0;
    BoundaryField lambda;
    BoundaryField vtrace;       // V on the boundary
    double boundary_defect = 0.0;  // max |V_b / h^2 - g_b| relative to max |g|
    double truncation_v = 0.0;
    double truncation_u = 0.0;
};

DNSample dn_sample(const DivOperator& op, const TransformInputs& in, const BoundaryField& g, double h,
                   double horizon_factor, LaplaceRule rule = LaplaceRule::product_exact);

// Same, from an already computed transform.
DNSample dn_sample_from(const DivOperator& op, const TransformResult& tr, const BoundaryField& g,
                        double h);

std::vector<DNSample> dn_samples(const DivOperator& op, const TransformInputs& in, const BoundaryField& g,
                                 const std::vector<double>& hs, double horizon_factor,
                                 LaplaceRule rule = LaplaceRule::product_exact);

// Geometric ladder of count values from h_min to h_max inclusive.
std::vector<double> h_schedule(double h_min, double h_max, int count);

// CSV rows (h, boundary node coordinates, lambda, vtrace).
void write_dn_csv(const std::string& path, const std::vector<DNSample>& samples);

}  // namespace pmelab
