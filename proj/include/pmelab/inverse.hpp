#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmelab/elliptic.hpp"
#include "pmelab/expansion.hpp"

namespace pmelab {

// Shared settings for one forward pipeline evaluation: PME flow for
// phi^m = t g at a single deep regularization level, transform ladder over
// hs, two-term fit. The single level keeps repeated pipeline runs affordable;
// the k-schedule solver stays available where the regularization limit itself
// is under study.
struct PipelineOptions {
    std::vector<double> hs;        // fit wants a decade of h values
    double horizon_factor = 40.0;
    double level_k = 1e8;
    TimeGridSpec tgrid;            // defaulted to the coarse stretched grid
    NewtonOptions newton;
    LaplaceRule rule = LaplaceRule::product_exact;
    double noise = 0.0;            // multiplicative noise on the DN samples
    std::uint64_t seed = 0;
};

PipelineOptions default_pipeline_options();

// One full evaluation for a boundary datum g >= 0.
struct PipelineRun {
    std::vector<DNSample> samples;
    FitResult fit;
};

PipelineRun run_pipeline(const Grid& grid, const ScalarField& eps, const ScalarField& gamma, double m,
                         const BoundaryField& g, const PipelineOptions& opts);

// Coefficient-harmonic lifts of the monomial boundary traces up to the given
// total degree, with their traces and printable names.
struct HarmonicFamily {
    std::vector<ScalarField> fields;
    std::vector<BoundaryField> traces;
    std::vector<std::string> names;
};

HarmonicFamily harmonic_polynomials(const DivOperator& op, int degree,
                                    const LinearSolveOptions& opts = {});

// The two fitted second-order coefficients from the +/- s runs for one
// positive multiplier H; every test function W pairs against the same row.
struct MomentRow {
    BoundaryField b_plus;
    BoundaryField b_minus;
    double s = 0.0;
    double h_max_abs = 0.0;     // max |H|, for the bias scale
    double fit_noise = 0.0;     // surviving (non-cancelling) fit residual of the two runs
};

MomentRow moment_row(const Grid& grid, const ScalarField& eps, const ScalarField& gamma, double m,
                     const ScalarField& H, const BoundaryField& Htrace, double s,
                     const PipelineOptions& opts);

// Central-difference moment m <B(+s) - B(-s), W> / (2 s Gamma(1+1/m)), which
// approximates the volume integral of eps H W. bias_out, when given, receives
// a crude O(s^2) + noise/s error scale.
double epsilon_moment(const MomentRow& row, const BoundaryField& Wtrace, double m,
                      double* bias_out = nullptr, double* noise_out = nullptr);

// Families built with the working coefficient (the reconstructed gamma when
// used downstream of recover_gamma) and moments measured through pipelines on
// the true coefficients.
struct MomentSystem {
    std::vector<ScalarField> H;          // positive multipliers
    std::vector<ScalarField> W;          // signed test functions
    std::vector<BoundaryField> Wtrace;
    std::vector<std::string> names;      // per family member
    std::vector<std::vector<double>> mu;   // mu[i][j] ~ integral eps H_i W_j
    std::vector<std::vector<double>> bias;  // a-priori error scale per entry
    std::vector<std::vector<double>> noise; // measurement part of the bias
    double c_m = 0.0;                    // Gamma(1 + 1/m)
    double m = 0.0;
    std::vector<double> s_used;          // per H
};

// Runs 2 |H| pipelines on (eps_truth, gamma_truth); H and W are harmonic for
// gamma_model (the H family is the W family shifted to positive values).
MomentSystem build_moment_system(const Grid& grid, const ScalarField& eps_truth,
                                 const ScalarField& gamma_truth, const ScalarField& gamma_model,
                                 double m, int degree, const PipelineOptions& opts,
                                 double s_scale = 0.1);

void write_moment_system_json(const std::string& path, const MomentSystem& sys);

struct EpsilonReconOptions {
    double alpha = -1.0;            // < 0: pick by discrepancy against the bias scale
    double lower = 1e-3;
    double upper = 1e3;
    double discrepancy_safety = 1.05;
};

struct EpsilonReconReport {
    ScalarField eps_hat;
    double alpha_used = 0.0;
    double residual = 0.0;          // final moment misfit (l2 over entries)
    double discrepancy_target = 0.0;
    int effective_rank = 0;         // of the moment rows
    bool rank_deficient = false;    // effective rank below the parameter count
    std::vector<std::pair<double, double>> path;  // (alpha, residual) ladder
};

// Least squares on nodal eps with a gradient penalty: minimizes the moment
// misfit + alpha |grad eps|^2, clamped to the positivity bounds.
EpsilonReconReport recover_epsilon(const MomentSystem& sys, const Grid& grid,
                                   const EpsilonReconOptions& opts = {});

struct GammaInverseProblem {
    const Grid* grid = nullptr;
    std::vector<BoundaryField> basis;  // Dirichlet data g_i
    std::vector<BoundaryField> A;      // measured leading DN terms
    double alpha = 1e-6;
    double lower = 0.1;
    double upper = 10.0;
    int max_iter = 30;
    double grad_tol = 1e-6;            // relative to the initial gradient norm
    double consistency_tol = 0.05;     // allowed asymmetry of <A_i, g_j>
    double noise_floor = 0.0;          // misfit below this counts as converged
};

struct GammaReconReport {
    ScalarField gamma_hat;
    double misfit0 = 0.0;
    double misfit = 0.0;             // boundary-l2 data misfit (squared sum)
    double grad0 = 0.0;
    double grad = 0.0;
    double consistency = 0.0;        // measured pairing asymmetry
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    bool stagnated = false;          // misfit stopped falling above the floor
    std::vector<double> misfit_path;
};

// Gauss-Newton for the leading-term Calderon misfit
//   sum_i |trace(lift_gamma g_i) - A_i|^2  + alpha |grad gamma|^2
// with the exact Jacobian assembled from harmonic lifts of boundary
// indicators (one extra solve per boundary node, shared across the basis),
// clamped to the declared positive bounds.
GammaReconReport recover_gamma(const GammaInverseProblem& p);

// Report line: parameter count vs data rows (informative, not enforced).
std::string inverse_budget_note(std::size_t basis_size, std::size_t boundary_nodes,
                                std::size_t parameters);

}  // namespace pmelab
