// Acceptance gate: eleven criteria, one printed line each, exit code equals
// the number of failed criteria. Tolerances are pinned here on purpose; they
// are the contract, not knobs.
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pmelab/config.hpp"
#include "pmelab/elliptic.hpp"
#include "pmelab/expansion.hpp"
#include "pmelab/inverse.hpp"
#include "pmelab/laplace.hpp"
#include "pmelab/pme.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/runner.hpp"
#include "pmelab/special.hpp"
#include "pmelab/verify.hpp"

using namespace pmelab;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Criterion {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, ...) {
    char buf[768];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return std::string(buf);
}

ScalarField field_from(const Grid& g, const std::function<double(double, double)>& f) {
    ScalarField out(g);
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        auto x = g.coords(i);
        out.v[i] = f(x[0], x[1]);
    }
    return out;
}

BoundaryField bfield_from(const Grid& g, const std::function<double(double, double)>& f) {
    BoundaryField out(g);
    for (std::size_t b = 0; b < g.num_boundary(); ++b) {
        auto x = g.coords(g.boundary[b].node);
        out.v[b] = f(x[0], x[1]);
    }
    return out;
}

double rel_l2(const ScalarField& est, const ScalarField& truth) {
    ScalarField diff(*truth.grid);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.v[i] = est.v[i] - truth.v[i];
    return l2(diff) / l2(truth);
}

double boundary_dist(const BoundaryField& a, const BoundaryField& b) {
    BoundaryField diff(*a.grid);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.v[i] = a.v[i] - b.v[i];
    return boundary_l2(diff);
}

double boundary_rel(const BoundaryField& a, const BoundaryField& ref) {
    return boundary_dist(a, ref) / boundary_l2(ref);
}

ScalarField sine_bump(const Grid& g, double base, double amp) {
    return field_from(g, [=](double x, double y) {
        return base + amp * std::sin(kPi * x) * std::sin(kPi * y);
    });
}

// ---------------------------------------------------------------- AC1
double wave_error(int n, int steps) {
    Grid g = make_grid(1, {n}, {1.0});
    PMEProblem p;
    p.grid = &g;
    p.eps = ScalarField(g, 1.0);
    p.gamma = ScalarField(g, 1.0);
    p.m = 2.0;
    p.T = 0.5;
    p.phi = [&g](double t, std::size_t b) {
        double x = g.coords(g.boundary[b].node)[0];
        return 0.5 * std::max(t - x, 0.0);
    };
    p.tgrid.kind = TimeGridSpec::Kind::uniform;
    p.tgrid.steps = static_cast<std::size_t>(steps);
    RegularizationLevel lvl = make_level(p, 1e6);
    TimeField u = solve_level(p, lvl);
    double err = 0.0;
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        double exact = 0.5 * std::max(0.5 - g.coords(i)[0], 0.0);
        err = std::max(err, std::abs(u.frames.back().v[i] - exact));
    }
    return err;
}

Criterion ac1() {
    // dt = 6.25e-5 keeps the time error near 3e-5, an order of magnitude
    // below the spatial front error at the finest grid
    std::vector<double> dxs, errs;
    for (int n : {51, 101, 201}) {
        dxs.push_back(1.0 / double(n - 1));
        errs.push_back(wave_error(n, 8000));
    }
    double order = loglog_slope(dxs, errs);
    bool pass = errs.back() <= 5e-3 && order >= 0.9;
    return {pass, fmt("traveling wave: Linf(dx=1/200)=%.2e (<=5.0e-03), spatial order=%.2f (>=0.9)",
                      errs.back(), order)};
}

// ------------------------------------------------------- AC2 / AC3 / AC4
struct RandomConfig {
    int dim = 2;
    int n = 9;
    double m = 2.0;
    double ea = 1.0, eb = 0.0;  // eps = ea + eb * sin(pi x1) [* sin(pi x2)]
    double ga = 1.0, gb = 0.0;
    double c0 = 1.0, c1 = 0.0, c2 = 0.0;  // g = c0 + c1 x1 + c2 x2
};

std::vector<RandomConfig> random_suite() {
    std::mt19937_64 rng(20260815);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const double ms[3] = {1.5, 2.0, 3.0};
    const int ns[3] = {9, 11, 13};
    std::vector<RandomConfig> out;
    for (int i = 0; i < 20; ++i) {
        RandomConfig c;
        c.dim = (i % 5 == 4) ? 1 : 2;
        c.n = c.dim == 1 ? 41 : ns[i % 3];
        c.m = ms[i % 3];
        c.ea = uni(0.9, 1.4);  // coefficients stay inside [0.55, 1.75] subset of [0.5, 2]
        c.eb = uni(-0.35, 0.35);
        c.ga = uni(0.9, 1.4);
        c.gb = uni(-0.35, 0.35);
        c.c0 = uni(0.2, 1.0);
        c.c1 = uni(0.0, 0.5);
        c.c2 = c.dim == 2 ? uni(0.0, 0.5) : 0.0;
        out.push_back(c);
    }
    return out;
}

Grid suite_grid(const RandomConfig& c) {
    return c.dim == 1 ? make_grid(1, {c.n}, {1.0}) : make_grid(2, {c.n, c.n}, {1.0, 1.0});
}

ScalarField suite_field(const Grid& g, double a, double b, int dim) {
    return field_from(g, [=](double x, double y) {
        double s = dim == 1 ? std::sin(kPi * x) : std::sin(kPi * x) * std::sin(kPi * y);
        return a + b * s;
    });
}

BoundaryField suite_datum(const Grid& g, const RandomConfig& c) {
    return bfield_from(g, [&c](double x, double y) { return c.c0 + c.c1 * x + c.c2 * y; });
}

Criterion ac2(const std::vector<RandomConfig>& suite) {
    double worst_neg = -1e300, worst_mp = -1e300, worst_kmono = 0.0, worst_cmp = -1e300;
    for (const RandomConfig& c : suite) {
        Grid grid = suite_grid(c);
        PMEProblem p;
        p.grid = &grid;
        p.eps = suite_field(grid, c.ea, c.eb, c.dim);
        p.gamma = suite_field(grid, c.ga, c.gb, c.dim);
        p.m = c.m;
        p.T = 0.4;
        BoundaryField gb = suite_datum(grid, c);
        p.phi = [gb, m = c.m](double t, std::size_t b) {
            return std::pow(std::max(t, 0.0) * gb.v[b], 1.0 / m);
        };

        PMESolveResult r = solve_pme(p, 1e-2, 100.0);
        double umax = 0.0, umin = 1e300;
        for (const auto& fr : r.u.frames)
            for (double v : fr.v) {
                umax = std::max(umax, v);
                umin = std::min(umin, v);
            }
        worst_neg = std::max(worst_neg, -umin);

        // Constant-in-space supersolution bound at the first level, pushed
        // down the k-schedule by the measured monotone defects.
        double eps_min = 1e300;
        for (double v : p.eps.v) eps_min = std::min(eps_min, v);
        double floor0 = 1.0 / r.ks.front();
        double bound = sup_phi(p) + 2.0 * floor0 + p.T * floor0 / eps_min;
        for (double d : r.monotone_defects) bound += d;
        worst_mp = std::max(worst_mp, (umax - bound) / (1.0 + bound));
        for (double d : r.monotone_defects)
            worst_kmono = std::max(worst_kmono, d / (1.0 + umax));

        // Comparison against strictly larger boundary datum and source, both
        // solved at the same level window and stamp sequence.
        PMEProblem p2 = p;
        p2.phi = [gb, m = c.m](double t, std::size_t b) {
            return std::pow(std::max(t, 0.0) * (1.3 * gb.v[b] + 0.1), 1.0 / m);
        };
        p2.f = [](double, std::size_t) { return 0.05; };
        p2.tgrid.kind = TimeGridSpec::Kind::uniform;
        p2.tgrid.steps = 80;
        PMEProblem p1 = p;
        p1.tgrid = p2.tgrid;
        RegularizationLevel lvl = make_level(p2, 1e4);
        TimeField ua = solve_level(p1, lvl);
        TimeField ub = solve_level(p2, lvl);
        double bmax = 0.0;
        for (const auto& fr : ub.frames)
            for (double v : fr.v) bmax = std::max(bmax, v);
        for (std::size_t s = 0; s < ua.frames.size(); ++s)
            for (std::size_t i = 0; i < grid.num_nodes; ++i)
                worst_cmp = std::max(worst_cmp,
                                     (ua.frames[s].v[i] - ub.frames[s].v[i]) / (1.0 + bmax));
    }
    bool pass = worst_neg <= 1e-9 && worst_mp <= 1e-9 && worst_kmono <= 1e-9 && worst_cmp <= 1e-9;
    return {pass,
            fmt("scheme properties, 20 random configs: neg=%.1e mp=%.1e kmono=%.1e cmp=%.1e "
                "(all <=1e-09 relative slack)",
                worst_neg, worst_mp, worst_kmono, worst_cmp)};
}

struct SignSummary {
    double boundary = 0.0;                         // worst relative boundary identity defect
    double r1 = -1e300, v1 = -1e300, r2 = -1e300;  // worst normalized sign violations
    bool ran = false;
};

SignSummary sign_audit(const std::vector<RandomConfig>& suite) {
    SignSummary s;
    std::vector<double> hs{4.0, 8.0, 16.0};
    for (const RandomConfig& c : suite) {
        Grid grid = suite_grid(c);
        ScalarField eps = suite_field(grid, c.ea, c.eb, c.dim);
        ScalarField gamma = suite_field(grid, c.ga, c.gb, c.dim);
        BoundaryField g = suite_datum(grid, c);
        VerifyReport rep = verify_expansion(grid, eps, gamma, c.m, g, hs);
        for (const SignChecks& ck : rep.checks) {
            s.boundary = std::max(s.boundary, ck.boundary_defect);
            s.r1 = std::max(s.r1, ck.r1_max / (ck.h * ck.h));
            s.r2 = std::max(s.r2, -ck.r2_min / (ck.h * ck.h));
        }
        s.v1 = std::max(s.v1, rep.v1_max);
    }
    s.ran = true;
    return s;
}

Criterion ac3(const SignSummary& s) {
    bool pass = s.ran && s.boundary <= 5e-3;
    return {pass, fmt("transform boundary identity V=h^2*g for h in {4,8,16}: worst relative "
                      "defect=%.2e (<=5.0e-03)",
                      s.boundary)};
}

Criterion ac4(const SignSummary& s) {
    bool pass = s.ran && s.r1 <= 1e-9 && s.v1 <= 1e-9 && s.r2 <= 1e-9;
    return {pass, fmt("sign structure R1<=0, V1<=0, R2>=0 on the suite: worst defects "
                      "%.1e / %.1e / %.1e (<=1e-09; R1, R2 measured per h^2)",
                      s.r1, s.v1, s.r2)};
}

// ---------------------------------------------------------------- AC5
Criterion ac5() {
    SignCheckOptions opts;
    opts.fine_grid = false;  // norm/slope use only, coarse time grid
    std::vector<double> hs = h_schedule(8.0, 80.0, 7);
    std::ostringstream msg;
    bool pass = true;
    for (double m : {2.0, 3.0}) {
        Grid grid = make_grid(2, {17, 17}, {1.0, 1.0});
        ScalarField eps = sine_bump(grid, 1.0, 0.25);
        ScalarField gamma = field_from(grid, [](double x, double) { return 1.0 + 0.2 * x; });
        VerifyReport rep =
            verify_expansion(grid, eps, gamma, m, BoundaryField(grid, 1.0), hs, opts);
        bool okm = std::abs(rep.r1_slope - 1.0 / m) <= 0.15 && rep.r1_slope - rep.r2_slope >= 0.3;
        pass = pass && okm;
        msg << fmt("m=%g slope(R1)=%.3f (1/m=%.2f+-0.15) slope(R2)=%.3f (gap>=0.3); ", m,
                   rep.r1_slope, 1.0 / m, rep.r2_slope);
    }
    return {pass, "remainder orders over h in [8,80]: " + msg.str()};
}

// ---------------------------------------------------------------- AC6
Criterion ac6() {
    Grid grid = make_grid(2, {17, 17}, {1.0, 1.0});
    ScalarField gamma = field_from(grid, [](double x, double) { return 1.0 + 0.2 * x; });
    ScalarField epsA(grid, 1.0);
    ScalarField epsB = sine_bump(grid, 1.0, 0.5);
    DivOperator op(grid, gamma);
    ScalarField zero(grid, 0.0);

    PipelineOptions popts = default_pipeline_options();
    popts.hs = h_schedule(1.6, 16.0, 7);

    std::vector<BoundaryField> gs;
    gs.push_back(BoundaryField(grid, 1.0));
    gs.push_back(bfield_from(grid, [](double x, double y) { return 0.5 + x + y; }));

    double worst_direct = 0.0, worst_invariance = 0.0;
    for (const BoundaryField& g : gs) {
        PipelineRun runA = run_pipeline(grid, epsA, gamma, 2.0, g, popts);
        PipelineRun runB = run_pipeline(grid, epsB, gamma, 2.0, g, popts);
        BoundaryField direct = neumann_trace(op, solve_dirichlet(op, zero, g).V, zero);
        worst_direct = std::max(worst_direct, boundary_rel(runA.fit.A, direct));
        worst_invariance = std::max(worst_invariance, boundary_rel(runB.fit.A, runA.fit.A));
    }
    bool pass = worst_direct <= 0.02 && worst_invariance <= 0.03;
    return {pass, fmt("leading term: fitted A vs direct trace %.2e (<=2.0e-02); A drift under eps "
                      "change %.2e (<=3.0e-02)",
                      worst_direct, worst_invariance)};
}

// ---------------------------------------------------------------- AC7
Criterion ac7() {
    Grid grid = make_grid(2, {17, 17}, {1.0, 1.0});
    ScalarField eps = sine_bump(grid, 1.0, 0.5);
    ScalarField gamma(grid, 1.0);
    BoundaryField g(grid, 1.0);
    double m = 2.0;

    PipelineOptions popts = default_pipeline_options();
    popts.hs = h_schedule(1.6, 16.0, 7);
    PipelineRun run = run_pipeline(grid, eps, gamma, m, g, popts);

    DivOperator op(grid, gamma);
    ExpansionOracle oracle = build_oracle(op, eps, m, g);
    HarmonicFamily fam = harmonic_polynomials(op, 2);  // 6 members in 2D

    double worst = 0.0;
    for (std::size_t j = 0; j < fam.fields.size(); ++j) {
        double lhs = boundary_pair(run.fit.B, fam.traces[j]);
        double rhs = oracle.c_m * integrate_triple(eps, oracle.V0_pow, fam.fields[j]);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    bool pass = fam.fields.size() >= 6 && worst <= 0.03;
    return {pass, fmt("moment identity <B,W> vs scaled volume integral over %zu harmonic W: worst "
                      "relative error %.2e (<=3.0e-02)",
                      fam.fields.size(), worst)};
}

// ---------------------------------------------------------------- AC8
Criterion ac8() {
    Grid grid = make_grid(2, {33, 33}, {1.0, 1.0});
    ScalarField eps_true = sine_bump(grid, 1.0, 0.5);
    ScalarField gamma(grid, 1.0);

    PipelineOptions popts = default_pipeline_options();
    popts.hs = h_schedule(0.8, 16.0, 13);

    MomentSystem clean = build_moment_system(grid, eps_true, gamma, gamma, 2.0, 3, popts, 0.3);
    EpsilonReconReport rep0 = recover_epsilon(clean, grid);
    double e0 = rel_l2(rep0.eps_hat, eps_true);

    popts.noise = 0.01;
    popts.seed = 424242;
    MomentSystem noisy = build_moment_system(grid, eps_true, gamma, gamma, 2.0, 3, popts, 0.3);
    EpsilonReconReport rep1 = recover_epsilon(noisy, grid);
    double e1 = rel_l2(rep1.eps_hat, eps_true);

    bool pass = e0 <= 0.10 && e1 <= 2.0 * e0;
    return {pass, fmt("eps reconstruction: rel L2 %.3f noiseless (<=0.10), %.3f with 1%% DN noise "
                      "(<= 2x noiseless = %.3f)",
                      e0, e1, 2.0 * e0)};
}

// ---------------------------------------------------------------- AC9
Criterion ac9() {
    Grid grid = make_grid(2, {17, 17}, {1.0, 1.0});
    ScalarField gamma_true = sine_bump(grid, 1.0, 0.3);
    DivOperator op_true(grid, gamma_true);
    ScalarField zero(grid, 0.0);

    // Noiseless synthetic data: leading DN traces of the true coefficient for
    // twelve monomial Dirichlet data.
    const int expo[12][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2},
                             {3, 0}, {2, 1}, {1, 2}, {0, 3}, {2, 2}, {3, 1}};
    GammaInverseProblem inv;
    inv.grid = &grid;
    for (auto& e : expo) {
        BoundaryField g = bfield_from(grid, [&e](double x, double y) {
            return std::pow(x, e[0]) * std::pow(y, e[1]);
        });
        inv.basis.push_back(g);
        inv.A.push_back(neumann_trace(op_true, solve_dirichlet(op_true, zero, g).V, zero));
    }
    GammaReconReport rep = recover_gamma(inv);
    double err = rel_l2(rep.gamma_hat, gamma_true);
    bool pass = err <= 0.10;
    return {pass, fmt("gamma reconstruction from 12 noiseless DN traces: rel L2 %.4f (<=0.10), "
                      "%d Gauss-Newton steps",
                      err, rep.iterations)};
}

// ---------------------------------------------------------------- AC10
Criterion ac10() {
    Grid grid = make_grid(2, {17, 17}, {1.0, 1.0});
    double m = 2.0;
    ScalarField epsI(grid, 1.0), gammaI(grid, 1.0);
    ScalarField epsII = sine_bump(grid, 1.0, 0.5);
    ScalarField gammaII = sine_bump(grid, 1.0, 0.3);

    std::vector<BoundaryField> gs;
    gs.push_back(BoundaryField(grid, 1.0));
    gs.push_back(bfield_from(grid, [](double x, double y) { return 0.5 + x + y; }));

    PipelineOptions base = default_pipeline_options();
    base.hs = h_schedule(1.6, 16.0, 5);
    // Perturbed numerics for the tolerance scale: deeper level, finer stamps.
    PipelineOptions pert = base;
    pert.level_k = 4e8;
    pert.tgrid.dt0 = 1.5e-3;
    pert.tgrid.growth = 1.025;
    pert.horizon_factor = 50.0;

    // Identical coefficient pair rebuilt through different but exact
    // arithmetic; also catches hidden state leaking between runs.
    ScalarField epsI2(grid, 0.0), gammaI2(grid, 0.0);
    for (std::size_t i = 0; i < grid.num_nodes; ++i) {
        epsI2.v[i] = 0.5 * epsI.v[i] * 2.0;
        gammaI2.v[i] = (gammaI.v[i] * 4.0) * 0.25;
    }

    double tol = 0.0, diff = 0.0, ident = 0.0;
    for (const BoundaryField& g : gs) {
        PipelineRun rI = run_pipeline(grid, epsI, gammaI, m, g, base);
        PipelineRun rP = run_pipeline(grid, epsI, gammaI, m, g, pert);
        PipelineRun rII = run_pipeline(grid, epsII, gammaII, m, g, base);
        PipelineRun rId = run_pipeline(grid, epsI2, gammaI2, m, g, base);
        for (std::size_t k = 0; k < rI.samples.size(); ++k) {
            tol = std::max(tol, boundary_dist(rI.samples[k].lambda, rP.samples[k].lambda));
            diff = std::max(diff, boundary_dist(rI.samples[k].lambda, rII.samples[k].lambda));
            ident = std::max(ident, boundary_dist(rI.samples[k].lambda, rId.samples[k].lambda));
        }
    }
    bool pass = diff >= 5.0 * tol && ident <= tol;
    return {pass, fmt("uniqueness surrogate: pair separation %.2e >= 5x tolerance %.2e; identical "
                      "pair %.2e <= tolerance",
                      diff, tol, ident)};
}

// ---------------------------------------------------------------- AC11
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Criterion ac11() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "pmelab_acceptance_ac11";
    fs::remove_all(dir);
    fs::create_directories(dir);

    ExperimentConfig cfg;
    cfg.counts = {17, 17};
    cfg.eps_expr = "1 + 0.5*sin(pi*x1)*sin(pi*x2)";
    cfg.gamma_expr = "1 + 0.3*sin(pi*x1)*sin(pi*x2)";
    cfg.g_expr = "1";
    cfg.h_min = 1.6;
    cfg.h_max = 16.0;
    cfg.h_count = 5;
    cfg.stages = {"transform", "fit", "recon-gamma"};
    cfg.noise = 0.01;  // exercises the seeded noise path
    cfg.seed = 777;
    cfg.out_dir = (dir / "out").string();
    validate_config(cfg);

    RunReport rep1 = run(cfg);
    write_report_json((dir / "rep1.json").string(), rep1);
    std::string dn1 = slurp(cfg.out_dir + "/dn_samples.csv");
    std::string rg1 = slurp(cfg.out_dir + "/recon_gamma.csv");

    RunReport rep2 = run(cfg);
    write_report_json((dir / "rep2.json").string(), rep2);
    std::string dn2 = slurp(cfg.out_dir + "/dn_samples.csv");
    std::string rg2 = slurp(cfg.out_dir + "/recon_gamma.csv");

    std::string r1 = slurp((dir / "rep1.json").string());
    std::string r2 = slurp((dir / "rep2.json").string());
    bool pass = !r1.empty() && r1 == r2 && !dn1.empty() && dn1 == dn2 && !rg1.empty() && rg1 == rg2;
    fs::remove_all(dir);
    return {pass, fmt("determinism: report JSON %s (%zu bytes), DN and reconstruction artifacts %s "
                      "across repeated seeded runs",
                      r1 == r2 ? "byte-identical" : "DIFFER", r1.size(),
                      (dn1 == dn2 && rg1 == rg2) ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const Criterion& c) {
        std::printf("AC%-2d %s %s\n", id, c.pass ? "PASS" : "FAIL", c.detail.c_str());
        std::fflush(stdout);
        if (!c.pass) ++failures;
    };
    auto guarded = [](const std::function<Criterion()>& f) -> Criterion {
        try {
            return f();
        } catch (const std::exception& e) {
            return {false, std::string("exception: ") + e.what()};
        }
    };

    std::vector<RandomConfig> suite = random_suite();

    report(1, guarded([] { return ac1(); }));
    report(2, guarded([&] { return ac2(suite); }));
    SignSummary signs;
    Criterion sign_err{false, ""};
    try {
        signs = sign_audit(suite);
    } catch (const std::exception& e) {
        sign_err.detail = std::string("exception: ") + e.what();
    }
    report(3, signs.ran ? ac3(signs) : sign_err);
    report(4, signs.ran ? ac4(signs) : sign_err);
    report(5, guarded([] { return ac5(); }));
    report(6, guarded([] { return ac6(); }));
    report(7, guarded([] { return ac7(); }));
    report(8, guarded([] { return ac8(); }));
    report(9, guarded([] { return ac9(); }));
    report(10, guarded([] { return ac10(); }));
    report(11, guarded([] { return ac11(); }));

    return failures;
}
