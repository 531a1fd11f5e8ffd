#pragma once

#include <vector>

#include "pmelab/expansion.hpp"

namespace pmelab {

// Options for the sign-and-ordering audit of the transform pipeline. The
// defaults are deliberately expensive: the audit asserts one-sided bounds with
// absolute slack, so the regularization floor and the time quadrature error
// must both sit below that slack. The fine stretched grid keeps the transform
// quadrature bias under 1e-9 * h^2 for h up to ~16 (the bias scales like
// (growth-1)^2 sqrt(h) on the slowly decaying mode and dt0^2 on transients);
// ordinary pipelines use much coarser grids.
struct SignCheckOptions {
    double k = 1e10;              // single regularization level for the solve
    double horizon_factor = 40.0;
    LaplaceRule rule = LaplaceRule::product_exact;
    NewtonOptions newton;
    double slack = 1e-9;          // one-sided slack, scaled by h^2 where noted
    double dt0 = 3e-4;
    double uniform_until = 1.0;
    double growth = 1.001;
    bool fine_grid = true;        // false: coarse grid, slope/norm use only
};

// One-sided defects for a single decay parameter. Sign conventions: every
// field is the amount by which the corresponding bound is violated, so values
// <= 0 (up to slack) mean the bound holds.
struct SignChecks {
    double h = 0.0;
    double r1_max = 0.0;             // max R1            (bound: R1 <= 0)
    double r2_min = 0.0;             // min R2            (bound: R2 >= 0)
    double v_min = 0.0;              // min V             (bound: V  >= 0)
    double n_min = 0.0;              // min N             (bound: N  >= 0)
    double n_minus_n0_max = 0.0;     // max N - N0        (bound: N <= N0)
    double n1_minus_n_max = 0.0;     // max N1 - N, measured defect (see n1_excess)
    double n1_excess = 0.0;          // max N1 - N - D/h  (bound: N1 <= N + D/h)
    double holder_defect = 0.0;      // max N - eps h^{-1/m} V^{1/m}  (power-mean bound)
    double v_drop_min = 0.0;         // min over nodes of V(h_next) - V(h)
    double boundary_defect = 0.0;    // max |V/h^2 - g| / max |g|
    double flux_balance = 0.0;       // |surface integral of trace - volume integral of N_chain|, relative
    double r1_norm = 0.0;            // max |R1|, for the decay slopes
    double r2_norm = 0.0;            // max |R2|
    bool pass = false;
};

struct VerifyReport {
    std::vector<SignChecks> checks;  // one per h, ascending
    double v1_max = 0.0;             // max V1 (bound: V1 <= 0); h-independent
    double sigma = 0.0;              // first stamp where t V0 + t^{1/m-1} V1 / Gamma(1/m) >= 0 everywhere
    // The degenerate front moves at finite speed, so v = u^m stays exactly
    // zero at a node until the front arrives while the two-mode barrier may
    // already be positive: the ordering barrier <= v genuinely fails on a
    // bounded window past sigma. sigma_v is the measured end of that window
    // (first stamp from which the barrier stays below v within slack),
    // w_pre_defect the largest violation inside it, and w_minus_v_max the
    // defect after it (bound: <= discretization-scaled slack). The window
    // enters the transforms as the O(1/h) allowance D in the N1 check.
    double sigma_v = 0.0;
    double w_pre_defect = 0.0;
    double w_minus_v_max = 0.0;
    double r1_slope = 0.0;           // log-log slope of max|R1| against h, expect ~ 1/m
    double r2_slope = 0.0;           // same for R2, expect ~ -min(1, 2-2/m)
    std::size_t stamp_count = 0;
    bool all_pass = false;
};

// Solves the flow for phi^m = t g at one deep regularization level, transforms
// it for every h, and audits the expansion ordering against the two-term
// oracle: R1 <= 0 <= R2, V1 <= 0, 0 <= N <= N0, N1 <= N + D/h, the barrier
// ordering past its settling time, the boundary identity V = h^2 g,
// monotonicity of V in h, and the discrete flux balance.
VerifyReport verify_expansion(const Grid& grid, const ScalarField& eps, const ScalarField& gamma,
                              double m, const BoundaryField& g, const std::vector<double>& hs,
                              const SignCheckOptions& opts = {});

}  // namespace pmelab
