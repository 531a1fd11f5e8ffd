#pragma once

#include <functional>
#include <vector>

#include "pmelab/stencil.hpp"

namespace pmelab {

struct TimeGridSpec {
    enum class Kind { automatic, uniform, stretched };
    Kind kind = Kind::automatic;
    std::size_t steps = 0;  // uniform
    // stretched: uniform spacing dt0 until uniform_until, then geometric with
    // the given growth ratio; the last stamp is clipped to T.
    double dt0 = 1e-2;
    double uniform_until = 1.0;
    double growth = 1.03;
};

// eps du/dt - div(gamma grad u^m) = f on (0,T] with u(0) = 0, u = phi >= 0 on
// the boundary (phi(0) = 0 for compatibility). Solved through the regularized
// levels below.
struct PMEProblem {
    const Grid* grid = nullptr;
    ScalarField eps;
    ScalarField gamma;
    double m = 2.0;
    std::function<double(double t, std::size_t bindex)> phi;  // boundary value of u
    std::function<double(double t, std::size_t node)> f;      // source, may be null for 0
    double T = 1.0;
    TimeGridSpec tgrid;
};

// Level k: initial and boundary data lifted by 1/k, source f_k = f + 1/k, and
// the mobility argument clamped to [lam_min, lam_max].
struct RegularizationLevel {
    double k = 0.0;
    double floor = 0.0;  // 1/k
    double lam_min = 0.0;
    double lam_max = 0.0;
};

// window_k <= k widens the clamp window to that of a smaller k; a schedule
// passes its first k so every level shares one window (then any u_k solves the
// 2k-level equation exactly, giving the k-monotonicity property).
RegularizationLevel make_level(const PMEProblem& p, double k, double window_k = 0.0);

// Clamped mobility m * gamma * clamp(lambda)^(m-1).
double mobility(double gamma_value, double lambda, const RegularizationLevel& lvl, double m);

// Kirchhoff primitive of the clamped mobility over gamma: b' = mobility/gamma,
// b(lambda) = lambda^m inside the window, linear extensions outside.
double kirchhoff(double lambda, const RegularizationLevel& lvl, double m);
double kirchhoff_prime(double lambda, const RegularizationLevel& lvl, double m);

struct NewtonOptions {
    double tol = 1e-12;  // residual scale factor, see solver
    int max_iter = 50;
    int max_halvings = 8;  // time-step halvings on Newton failure
};

std::vector<double> make_stamps(const PMEProblem& p, const RegularizationLevel& lvl);

// Implicit Euler with damped Newton on the fixed stamp sequence.
TimeField solve_level(const PMEProblem& p, const RegularizationLevel& lvl, const NewtonOptions& opts = {},
                      const std::vector<double>* stamps = nullptr);

struct PMESolveResult {
    TimeField u;                          // last level
    std::vector<double> ks;               // k sequence
    std::vector<double> level_diffs;      // max |u_k - u_{2k}| per doubling
    std::vector<double> monotone_defects; // max (u_{2k} - u_k)_+ per doubling
    std::vector<double> stamps;
};

// Runs the geometric k-schedule (x2 from k0) until the successive max-norm
// difference is <= tol; throws when k would exceed 1e9.
PMESolveResult solve_pme(const PMEProblem& p, double tol, double k0 = 100.0,
                         const NewtonOptions& opts = {});

// L2(0,T; grad u^m)^2 energy by central differences and trapezoid in time.
double energy_norm(const TimeField& u, double m);

// Suprema used for the clamp window and maximum-principle checks, sampled on
// the boundary/nodes over the stamp sequence (plus a uniform refinement).
double sup_phi(const PMEProblem& p);
double sup_source(const PMEProblem& p);

}  // namespace pmelab
