#include "pmelab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "pmelab/coeffs.hpp"
#include "pmelab/inverse.hpp"
#include "pmelab/io.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/special.hpp"
#include "pmelab/verify.hpp"
#include "json.hpp"

namespace pmelab {

namespace {

// Lazily shared state across stages so a stage list never recomputes a
// pipeline another stage already ran, while keeping every stage's numbers
// independent of which other stages were requested.
struct RunContext {
    const ExperimentConfig& cfg;
    Grid grid;
    ScalarField eps;
    ScalarField gamma;
    BoundaryField g;
    double m = 0.0;
    std::vector<double> hs;
    PipelineOptions popts;

    std::optional<PipelineRun> pipeline;           // level-k run for the [data] g
    std::optional<GammaReconReport> gamma_recon;

    RunReport report;
    std::vector<std::string> files;

    explicit RunContext(const ExperimentConfig& c)
        : cfg(c),
          grid(make_grid(c.dim, c.counts, c.extents)),
          eps(eval_coefficient(CoefficientSpec::from_expression(c.eps_expr, c.eps_lower, c.eps_upper), grid)),
          gamma(eval_coefficient(CoefficientSpec::from_expression(c.gamma_expr, c.gamma_lower, c.gamma_upper), grid)),
          g(grid, 0.0),
          m(c.m) {
        Expr ge = Expr::parse(c.g_expr);
        for (std::size_t b = 0; b < grid.num_boundary(); ++b) {
            auto x = grid.coords(grid.boundary[b].node);
            g.v[b] = ge.eval(x[0], x[1], x[2]);
            require(g.v[b] >= 0.0, "data.g: boundary datum must be nonnegative");
        }
        hs = h_schedule(cfg.h_min, cfg.h_max, cfg.h_count);
        popts = default_pipeline_options();
        popts.hs = hs;
        popts.horizon_factor = cfg.horizon_factor;
        popts.level_k = cfg.level_k;
        popts.tgrid = cfg.tgrid;
        popts.newton = cfg.newton;
        popts.rule = cfg.fit_rule == "trapezoid" ? LaplaceRule::trapezoid : LaplaceRule::product_exact;
        popts.noise = cfg.noise;
        popts.seed = cfg.seed;
    }

    const PipelineRun& data_pipeline() {
        if (!pipeline) pipeline = run_pipeline(grid, eps, gamma, m, g, popts);
        return *pipeline;
    }

    std::string path(const std::string& name) const {
        return (std::filesystem::path(cfg.out_dir) / name).string();
    }

    void add_file(const std::string& p) { files.push_back(p); }

    void check(const std::string& name, double value, double bound, bool pass) {
        report.checks.push_back({name, value, bound, pass});
        report.all_checks_pass = report.all_checks_pass && pass;
    }
};

std::string dtos(double v) { return format_double(v); }

// Boundary data catalog for the gamma reconstruction: monomial traces in the
// harmonic_polynomials ordering, all nonnegative on the box.
std::vector<BoundaryField> monomial_traces(const Grid& grid, int count) {
    std::vector<BoundaryField> out;
    for (int degree = 0; static_cast<int>(out.size()) < count && degree <= 12; ++degree) {
        for (int a = degree; a >= 0 && static_cast<int>(out.size()) < count; --a)
            for (int b = degree - a; b >= 0 && static_cast<int>(out.size()) < count; --b) {
                int c = degree - a - b;
                if (grid.dim < 3 && c > 0) continue;
                if (grid.dim < 2 && b > 0) continue;
                BoundaryField tr(grid, 0.0);
                for (std::size_t bi = 0; bi < grid.num_boundary(); ++bi) {
                    auto x = grid.coords(grid.boundary[bi].node);
                    tr.v[bi] = std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c);
                }
                out.push_back(tr);
            }
    }
    require(static_cast<int>(out.size()) == count, "gamma_recon.basis: catalog exhausted");
    return out;
}

double rel_l2(const ScalarField& estimate, const ScalarField& truth) {
    ScalarField diff = estimate;
    for (std::size_t i = 0; i < diff.v.size(); ++i) diff.v[i] -= truth.v[i];
    double denom = l2(truth);
    return denom > 0.0 ? l2(diff) / denom : l2(diff);
}

void write_recon_csv(const std::string& path, const Grid& grid, const ScalarField& truth,
                     const ScalarField& estimate) {
    std::ofstream out(path);
    require(out.good(), "cannot open " + path + " for writing");
    out << "x1,x2,x3,truth,estimate\n";
    for (std::size_t i = 0; i < grid.num_nodes; ++i) {
        auto x = grid.coords(i);
        out << dtos(x[0]) << "," << dtos(x[1]) << "," << dtos(x[2]) << "," << dtos(truth.v[i]) << ","
            << dtos(estimate.v[i]) << "\n";
    }
}

void stage_forward(RunContext& cx) {
    const ExperimentConfig& cfg = cx.cfg;
    PMEProblem p;
    p.grid = &cx.grid;
    p.eps = cx.eps;
    p.gamma = cx.gamma;
    p.m = cx.m;
    p.T = cfg.horizon_factor * cfg.h_max;
    const BoundaryField& g = cx.g;
    double m = cx.m;
    p.phi = [&g, m](double t, std::size_t b) { return std::pow(std::max(t, 0.0) * g.v[b], 1.0 / m); };
    p.tgrid = cfg.tgrid;

    PMESolveResult res = solve_pme(p, cfg.k_tol, cfg.k0, cfg.newton);
    const TimeField& u = res.u;

    double umax = 0.0, ulast = 0.0;
    for (const ScalarField& f : u.frames)
        for (double x : f.v) umax = std::max(umax, x);
    ulast = kernels::serial::max_abs(u.frames.back().v);

    double eps_min = *std::min_element(cx.eps.v.begin(), cx.eps.v.end());
    double lift = std::max(1.0, 1.0 / eps_min);
    double floor_last = 1.0 / res.ks.back();
    double mp_bound = floor_last + sup_phi(p) + lift * p.T * (sup_source(p) + floor_last);
    cx.check("forward.max-principle", umax, mp_bound, umax <= mp_bound * (1.0 + 1e-12) + 1e-12);

    double defect = 0.0;
    for (double d : res.monotone_defects) defect = std::max(defect, d);
    cx.check("forward.level-monotone", defect, 1e-9 * (1.0 + umax), defect <= 1e-9 * (1.0 + umax));

    double drop = 0.0;
    for (std::size_t s = 1; s < u.frames.size(); ++s)
        for (std::size_t i = 0; i < cx.grid.num_nodes; ++i)
            drop = std::max(drop, u.frames[s - 1].v[i] - u.frames[s].v[i]);
    cx.check("forward.time-monotone", drop, 1e-9 * (1.0 + umax), drop <= 1e-9 * (1.0 + umax));

    double last_diff = res.level_diffs.empty() ? 0.0 : res.level_diffs.back();
    cx.check("forward.level-converged", last_diff, cfg.k_tol, last_diff <= cfg.k_tol);

    cx.report.scalars["forward.k-final"] = res.ks.back();
    cx.report.scalars["forward.stamps"] = static_cast<double>(res.stamps.size());
    cx.report.scalars["forward.final-max"] = ulast;
    cx.report.scalars["forward.energy"] = energy_norm(u, cx.m);

    std::string fpath = cx.path("forward_u.csv");
    write_csv(fpath, u.frames.back(), "u");
    cx.add_file(fpath);
}

void stage_transform(RunContext& cx) {
    const PipelineRun& run = cx.data_pipeline();

    double max_defect = 0.0;
    for (const DNSample& s : run.samples) max_defect = std::max(max_defect, s.boundary_defect);
    cx.check("transform.boundary-identity", max_defect, 5e-3, max_defect <= 5e-3);

    // Sign checks need the volume fields; recompute the transforms.
    PMEProblem p;
    p.grid = &cx.grid;
    p.eps = cx.eps;
    p.gamma = cx.gamma;
    p.m = cx.m;
    p.T = cx.popts.horizon_factor * cx.hs.back();
    const BoundaryField& g = cx.g;
    double m = cx.m;
    p.phi = [&g, m](double t, std::size_t b) { return std::pow(std::max(t, 0.0) * g.v[b], 1.0 / m); };
    p.tgrid = cx.popts.tgrid;
    RegularizationLevel lvl = make_level(p, cx.popts.level_k);
    TimeField u = solve_level(p, lvl, cx.popts.newton);
    TransformInputs in = prepare_transform(u, p, lvl.floor);

    double vmin = 0.0, nmin = 0.0, nscale = 0.0, vscale = 0.0;
    for (double h : cx.hs) {
        TransformResult tr = transform_solution(in, h, cx.popts.horizon_factor, cx.popts.rule);
        for (std::size_t i = 0; i < cx.grid.num_nodes; ++i) {
            vmin = std::min(vmin, tr.V.v[i]);
            nmin = std::min(nmin, tr.N.v[i]);
            vscale = std::max(vscale, std::abs(tr.V.v[i]));
            nscale = std::max(nscale, std::abs(tr.N.v[i]));
        }
    }
    cx.check("transform.v-nonneg", vmin, -1e-9 * (1.0 + vscale), vmin >= -1e-9 * (1.0 + vscale));
    cx.check("transform.n-nonneg", nmin, -1e-12 * (1.0 + nscale), nmin >= -1e-12 * (1.0 + nscale));

    double horizon_ratio = p.T / cx.hs.back();
    cx.check("transform.horizon", horizon_ratio, 10.0, horizon_ratio >= 10.0);

    double trunc = 0.0;
    for (const DNSample& s : run.samples) trunc = std::max(trunc, s.truncation_v);
    cx.report.scalars["transform.truncation"] = trunc;

    std::string dpath = cx.path("dn_samples.csv");
    write_dn_csv(dpath, run.samples);
    cx.add_file(dpath);
}

void stage_fit(RunContext& cx) {
    const PipelineRun& run = cx.data_pipeline();
    const FitResult& fit = cx.cfg.fit_peeling ? fit_expansion_peeling(run.samples, cx.m) : run.fit;

    bool finite = std::isfinite(fit.condition);
    for (double r : fit.residual_norm) finite = finite && std::isfinite(r);
    for (double a : fit.A.v) finite = finite && std::isfinite(a);
    for (double b : fit.B.v) finite = finite && std::isfinite(b);
    cx.check("fit.finite", finite ? 1.0 : 0.0, 1.0, finite);
    cx.check("fit.condition", fit.condition, 1e10, fit.condition <= 1e10);
    cx.report.scalars["fit.remainder-slope"] = fit.remainder_slope;

    nlohmann::ordered_json j;
    j["m"] = cx.m;
    j["hs"] = fit.hs;
    j["condition"] = fit.condition;
    j["remainder_slope"] = fit.remainder_slope;
    j["residual_norm"] = fit.residual_norm;
    std::vector<std::vector<double>> rows;
    for (std::size_t b = 0; b < cx.grid.num_boundary(); ++b) {
        auto x = cx.grid.coords(cx.grid.boundary[b].node);
        rows.push_back({x[0], x[1], x[2], fit.A.v[b], fit.B.v[b]});
    }
    j["columns"] = {"x1", "x2", "x3", "A", "B"};
    j["boundary"] = rows;
    std::string jpath = cx.path("fit.json");
    {
        std::ofstream out(jpath);
        require(out.good(), "cannot open " + jpath + " for writing");
        out << j.dump(2) << "\n";
    }
    cx.add_file(jpath);

    std::string rpath = cx.path("fit_residuals.csv");
    {
        std::ofstream out(rpath);
        require(out.good(), "cannot open " + rpath + " for writing");
        out << "h,residual_norm\n";
        for (std::size_t q = 0; q < fit.hs.size(); ++q)
            out << dtos(fit.hs[q]) << "," << dtos(fit.residual_norm[q]) << "\n";
    }
    cx.add_file(rpath);
}

const GammaReconReport& ensure_gamma_recon(RunContext& cx) {
    if (cx.gamma_recon) return *cx.gamma_recon;
    const ExperimentConfig& cfg = cx.cfg;
    std::vector<BoundaryField> basis = monomial_traces(cx.grid, cfg.grec_basis);
    std::vector<BoundaryField> A;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        PipelineOptions po = cx.popts;
        po.seed = cfg.seed + 1000 + i;
        PipelineRun run = run_pipeline(cx.grid, cx.eps, cx.gamma, cx.m, basis[i], po);
        A.push_back(run.fit.A);
    }
    GammaInverseProblem gp;
    gp.grid = &cx.grid;
    gp.basis = std::move(basis);
    gp.A = std::move(A);
    gp.alpha = cfg.grec_alpha;
    gp.lower = cfg.grec_lower;
    gp.upper = cfg.grec_upper;
    gp.max_iter = cfg.grec_max_iter;
    // The pipeline's own accuracy bounds how well the data can be matched.
    double fitscale = 0.0;
    for (const BoundaryField& a : gp.A) fitscale = std::max(fitscale, boundary_l2(a));
    gp.noise_floor = std::pow(1e-3 * (1.0 + fitscale), 2);
    cx.gamma_recon = recover_gamma(gp);
    return *cx.gamma_recon;
}

void stage_recon_gamma(RunContext& cx) {
    const GammaReconReport& rec = ensure_gamma_recon(cx);

    cx.check("recon-gamma.progress", rec.misfit, rec.misfit0,
             !rec.line_search_failed && rec.misfit <= rec.misfit0);
    cx.check("recon-gamma.consistency", rec.consistency, 0.05, rec.consistency <= 0.05);
    cx.report.scalars["recon-gamma.misfit0"] = rec.misfit0;
    cx.report.scalars["recon-gamma.misfit"] = rec.misfit;
    cx.report.scalars["recon-gamma.grad-reduction"] = rec.grad0 > 0.0 ? rec.grad / rec.grad0 : 0.0;
    cx.report.scalars["recon-gamma.iterations"] = rec.iterations;
    cx.report.scalars["recon-gamma.stagnated"] = rec.stagnated ? 1.0 : 0.0;
    double err = rel_l2(rec.gamma_hat, cx.gamma);
    cx.report.scalars["recon-gamma.rel-l2"] = err;

    std::string rpath = cx.path("recon_gamma.csv");
    write_recon_csv(rpath, cx.grid, cx.gamma, rec.gamma_hat);
    cx.add_file(rpath);
}

void stage_recon_eps(RunContext& cx) {
    const ExperimentConfig& cfg = cx.cfg;
    const ScalarField& gamma_model = ensure_gamma_recon(cx).gamma_hat;

    PipelineOptions po = cx.popts;
    po.seed = cfg.seed + 2000;
    MomentSystem sys = build_moment_system(cx.grid, cx.eps, cx.gamma, gamma_model, cx.m,
                                           cfg.erec_degree, po, cfg.erec_s_scale);

    EpsilonReconOptions eo;
    eo.alpha = cfg.erec_alpha;
    eo.lower = cfg.erec_lower;
    eo.upper = cfg.erec_upper;
    EpsilonReconReport rec = recover_epsilon(sys, cx.grid, eo);

    cx.check("recon-eps.rank", rec.effective_rank, 6.0, rec.effective_rank >= 6);

    // The central identity: for constant gamma the pipeline moments match the
    // volume integrals directly computable from the truth.
    double gam_lo = *std::min_element(cx.gamma.v.begin(), cx.gamma.v.end());
    double gam_hi = *std::max_element(cx.gamma.v.begin(), cx.gamma.v.end());
    if (gam_hi - gam_lo <= 1e-14 * (1.0 + gam_hi)) {
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < sys.H.size(); ++i)
            for (std::size_t j = 0; j < sys.W.size(); ++j) {
                double direct = integrate_triple(cx.eps, sys.H[i], sys.W[j]);
                worst = std::max(worst, std::abs(sys.mu[i][j] - direct));
                scale = std::max(scale, std::abs(direct));
            }
        double rel = worst / (1.0 + scale);
        cx.check("recon-eps.moment-consistency", rel, 0.05, rel <= 0.05);
    }

    cx.report.scalars["recon-eps.alpha"] = rec.alpha_used;
    cx.report.scalars["recon-eps.residual"] = rec.residual;
    cx.report.scalars["recon-eps.discrepancy-target"] = rec.discrepancy_target;
    double err = rel_l2(rec.eps_hat, cx.eps);
    cx.report.scalars["recon-eps.rel-l2"] = err;

    std::string mpath = cx.path("moment_system.json");
    write_moment_system_json(mpath, sys);
    cx.add_file(mpath);
    std::string rpath = cx.path("recon_eps.csv");
    write_recon_csv(rpath, cx.grid, cx.eps, rec.eps_hat);
    cx.add_file(rpath);
}

void stage_verify(RunContext& cx) {
    const ExperimentConfig& cfg = cx.cfg;
    SignCheckOptions so;
    so.k = cfg.verify_k;
    so.horizon_factor = cfg.horizon_factor;
    so.rule = cfg.fit_rule == "trapezoid" ? LaplaceRule::trapezoid : LaplaceRule::product_exact;
    so.newton = cfg.newton;
    so.slack = cfg.verify_slack;
    so.dt0 = cfg.verify_dt0;
    so.growth = cfg.verify_growth;
    so.fine_grid = cfg.verify_fine;
    VerifyReport rep = verify_expansion(cx.grid, cx.eps, cx.gamma, cx.m, cx.g, cfg.verify_hs, so);

    auto tag = [](double h) {
        std::ostringstream o;
        o << "verify.h=" << h;
        return o.str();
    };
    double n1_worst = 0.0;
    for (const SignChecks& ck : rep.checks) {
        double s2 = cfg.verify_slack * ck.h * ck.h;
        cx.check(tag(ck.h) + ".r1-sign", ck.r1_max, s2, ck.r1_max <= s2);
        cx.check(tag(ck.h) + ".r2-sign", ck.r2_min, -s2, ck.r2_min >= -s2);
        cx.check(tag(ck.h) + ".v-nonneg", ck.v_min, -cfg.verify_slack, ck.v_min >= -cfg.verify_slack);
        cx.check(tag(ck.h) + ".n-nonneg", ck.n_min, -1e-12, ck.n_min >= -1e-12);
        cx.check(tag(ck.h) + ".n-below-n0", ck.n_minus_n0_max, cfg.verify_slack,
                 ck.n_minus_n0_max <= cfg.verify_slack);
        cx.check(tag(ck.h) + ".boundary-identity", ck.boundary_defect, 5e-3, ck.boundary_defect <= 5e-3);
        cx.check(tag(ck.h) + ".flux-balance", ck.flux_balance, 1e-9, ck.flux_balance <= 1e-9);
        cx.check(tag(ck.h) + ".v-monotone", ck.v_drop_min, -cfg.verify_slack,
                 ck.v_drop_min >= -cfg.verify_slack);
        n1_worst = std::max(n1_worst, ck.n1_minus_n_max);
    }
    cx.check("verify.v1-sign", rep.v1_max, cfg.verify_slack, rep.v1_max <= cfg.verify_slack);
    // The barrier and N1 checks carry window allowances and discretization
    // scaled slacks that verify_expansion computes internally; all_pass folds
    // them in.
    cx.check("verify.all-pass", rep.all_pass ? 1.0 : 0.0, 1.0, rep.all_pass);
    cx.report.scalars["verify.n1-below-n-defect"] = n1_worst;
    cx.report.scalars["verify.w-below-v-defect"] = rep.w_minus_v_max;
    cx.report.scalars["verify.w-window-defect"] = rep.w_pre_defect;
    cx.report.scalars["verify.sigma"] = rep.sigma;
    cx.report.scalars["verify.sigma-v"] = rep.sigma_v;
    cx.report.scalars["verify.r1-slope"] = rep.r1_slope;
    cx.report.scalars["verify.r2-slope"] = rep.r2_slope;
    cx.report.scalars["verify.stamps"] = static_cast<double>(rep.stamp_count);

    std::string rpath = cx.path("remainders.csv");
    {
        std::ofstream out(rpath);
        require(out.good(), "cannot open " + rpath + " for writing");
        out << "h,r1_norm,r2_norm\n";
        for (const SignChecks& ck : rep.checks)
            out << dtos(ck.h) << "," << dtos(ck.r1_norm) << "," << dtos(ck.r2_norm) << "\n";
    }
    cx.add_file(rpath);
}

std::vector<std::string> normalize_stages(const std::vector<std::string>& stages) {
    static const std::vector<std::string> all{"forward", "transform", "fit",
                                              "recon-gamma", "recon-eps", "verify"};
    std::vector<std::string> out;
    auto add = [&](const std::string& s) {
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const std::string& s : stages) {
        if (s == "all")
            for (const std::string& a : all) add(a);
        else
            add(s);
    }
    return out;
}

}  // namespace

RunReport run(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    RunContext cx(cfg);
    cx.report.resolved_config = resolved_ini(cfg);

    for (const std::string& stage : normalize_stages(cfg.stages)) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            if (stage == "forward") stage_forward(cx);
            else if (stage == "transform") stage_transform(cx);
            else if (stage == "fit") stage_fit(cx);
            else if (stage == "recon-gamma") stage_recon_gamma(cx);
            else if (stage == "recon-eps") stage_recon_eps(cx);
            else if (stage == "verify") stage_verify(cx);
            else throw std::runtime_error("unknown stage " + stage);
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(stage, e.what());
        }
        auto t1 = std::chrono::steady_clock::now();
        std::chrono::duration<double> dt = t1 - t0;
        std::cerr << "stage " << stage << " finished in " << dt.count() << " s\n";
        cx.report.stages_run.push_back(stage);
    }

    std::sort(cx.files.begin(), cx.files.end());
    cx.report.manifest = cx.files;
    return cx.report;
}

void write_report_json(const std::string& path, const RunReport& rep) {
    nlohmann::ordered_json j;
    j["stages"] = rep.stages_run;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const CheckRow& c : rep.checks)
        checks.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
    j["checks"] = checks;
    j["all_checks_pass"] = rep.all_checks_pass;
    j["scalars"] = rep.scalars;
    j["manifest"] = rep.manifest;
    j["config"] = rep.resolved_config;
    std::ofstream out(path);
    require(out.good(), "cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "missing artifact " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    require(!rows.empty(), "empty artifact " + path);
    return rows;
}

std::size_t column_of(const std::vector<std::vector<std::string>>& rows, const std::string& name,
                      const std::string& path) {
    for (std::size_t c = 0; c < rows[0].size(); ++c)
        if (rows[0][c] == name) return c;
    throw std::runtime_error("artifact " + path + " lacks column " + name);
}

void log_pair_csv(const std::string& in_path, const std::string& xcol, const std::string& ycol,
                  const std::string& out_path) {
    auto rows = read_csv(in_path);
    std::size_t xi = column_of(rows, xcol, in_path), yi = column_of(rows, ycol, in_path);
    std::ofstream out(out_path);
    require(out.good(), "cannot open " + out_path + " for writing");
    out << "log10_" << xcol << ",log10_" << ycol << "\n";
    for (std::size_t r = 1; r < rows.size(); ++r) {
        double x = std::stod(rows[r][xi]), y = std::stod(rows[r][yi]);
        out << format_double(std::log10(std::max(x, 1e-300))) << ","
            << format_double(std::log10(std::max(y, 1e-300))) << "\n";
    }
}

// Cross-section row along x1 at the x2 value closest to the domain midline.
void cross_section_csv(const std::string& in_path, const std::string& out_path) {
    auto rows = read_csv(in_path);
    std::size_t x1 = column_of(rows, "x1", in_path), x2 = column_of(rows, "x2", in_path);
    std::size_t tr = column_of(rows, "truth", in_path), es = column_of(rows, "estimate", in_path);
    double hi = 0.0;
    for (std::size_t r = 1; r < rows.size(); ++r) hi = std::max(hi, std::stod(rows[r][x2]));
    double mid = hi / 2.0, best = hi;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        double d = std::abs(std::stod(rows[r][x2]) - mid);
        if (d < best) best = d;
    }
    std::ofstream out(out_path);
    require(out.good(), "cannot open " + out_path + " for writing");
    out << "x1,truth,estimate\n";
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (std::abs(std::stod(rows[r][x2]) - mid) > best + 1e-12) continue;
        out << rows[r][x1] << "," << rows[r][tr] << "," << rows[r][es] << "\n";
    }
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& out_dir,
                                    const std::vector<std::string>& selection) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    for (const std::string& sel : selection) {
        if (sel == "remainder") {
            std::string in = (fs::path(out_dir) / "remainders.csv").string();
            std::string out = (fs::path(out_dir) / "plot_remainder.csv").string();
            log_pair_csv(in, "h", "r1_norm", out);
            written.push_back(out);
        } else if (sel == "dn-residual") {
            std::string in = (fs::path(out_dir) / "fit_residuals.csv").string();
            std::string out = (fs::path(out_dir) / "plot_dn_residual.csv").string();
            log_pair_csv(in, "h", "residual_norm", out);
            written.push_back(out);
        } else if (sel == "reconstruction") {
            bool any = false;
            std::vector<std::string> missing;
            for (const char* base : {"recon_eps", "recon_gamma"}) {
                std::string in = (fs::path(out_dir) / (std::string(base) + ".csv")).string();
                if (!fs::exists(in)) {
                    missing.push_back(in);
                    continue;
                }
                std::string out = (fs::path(out_dir) / ("plot_" + std::string(base) + ".csv")).string();
                cross_section_csv(in, out);
                written.push_back(out);
                any = true;
            }
            if (!any) {
                std::string msg = "missing artifacts:";
                for (const std::string& p : missing) msg += " " + p;
                throw std::runtime_error(msg);
            }
        } else {
            throw std::runtime_error("unknown plot selection '" + sel + "'");
        }
    }
    std::sort(written.begin(), written.end());
    return written;
}

}  // namespace pmelab
