#pragma once

#include <utility>
#include <vector>

#include "pmelab/elliptic.hpp"
#include "pmelab/laplace.hpp"

namespace pmelab {

// Large-h structure of the transformed data:
//   V = h^2 V0 + h^{1/m} V1 + R2,   R1 = V - h^2 V0,
// with V0 the coefficient-harmonic extension of g and V1 the h-independent
// first correction. The scaled trace then splits as A + h^{1/m-2} B plus a
// remainder of order h^{-M-2}, M = min(1, 2-2/m).
struct ExpansionOracle {
    ScalarField V0;       // div(gamma grad V0) = 0, V0|bdry = g
    ScalarField V1;       // div(gamma grad V1) = c_m eps V0^{1/m}, V1|bdry = 0
    ScalarField V0_pow;   // V0^{1/m}, with 0^{1/m} := 0
    double m = 0.0;
    double c_m = 0.0;     // Gamma(1 + 1/m)
    BoundaryField A0;     // conormal trace of V0
    BoundaryField B0;     // conormal trace of V1
};

double remainder_order(double m);  // M = min(1, 2 - 2/m)

ExpansionOracle build_oracle(const DivOperator& op, const ScalarField& eps, double m,
                             const BoundaryField& g, const LinearSolveOptions& opts = {});

// R1 = V - h^2 V0 and R2 = R1 - h^{1/m} V1.
std::pair<ScalarField, ScalarField> remainders(const ScalarField& V, const ExpansionOracle& oracle,
                                               double h);

struct FitResult {
    BoundaryField A;
    BoundaryField B;
    std::vector<double> hs;
    std::vector<double> residual_norm;  // boundary L2 of Lambda_h - A - h^{1/m-2} B, per h
    std::vector<double> node_residual;  // weighted rms residual per boundary node
    double remainder_slope = 0.0;       // log-log slope of residual_norm against h
    double condition = 0.0;             // condition number of the weighted normal matrix
};

// Per-boundary-node weighted least squares on the basis {1, h^{1/m-2}} with
// row weights h^{M+2}, which equalize the remainder across the schedule.
// Row weighting: truncation-equalized h^{M+2} suits exact data (the model
// error grows as h shrinks); uniform weighting is the right call for noisy
// data, where the truncation weights amplify noise into the B column.
enum class FitWeights { truncation, uniform };

FitResult fit_expansion(const std::vector<DNSample>& samples, double m,
                        FitWeights weights = FitWeights::truncation);

// Cross-check variant: read A off the largest h, then B from the next one.
FitResult fit_expansion_peeling(const std::vector<DNSample>& samples, double m);

// Least-squares slope of log(y) against log(x); y values are floored at 1e-300.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pmelab
