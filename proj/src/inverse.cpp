#include "pmelab/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "pmelab/io.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/special.hpp"
#include "json.hpp"

namespace pmelab {

namespace {

// Dense unit-coefficient stiffness matrix, the quadratic form |grad .|^2 used
// as the smoothing penalty in both reconstructions.
Eigen::MatrixXd gradient_penalty(const Grid& grid) {
    DivOperator unit(grid, ScalarField(grid, 1.0));
    const std::size_t n = grid.num_nodes;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& f : unit.faces()) {
        auto i = static_cast<Eigen::Index>(f.i), j = static_cast<Eigen::Index>(f.j);
        K(i, i) += f.w;
        K(j, j) += f.w;
        K(i, j) -= f.w;
        K(j, i) -= f.w;
    }
    return K;
}

}  // namespace

PipelineOptions default_pipeline_options() {
    PipelineOptions o;
    o.hs = h_schedule(1.6, 16.0, 5);
    o.tgrid.kind = TimeGridSpec::Kind::stretched;
    o.tgrid.dt0 = 2e-3;
    o.tgrid.uniform_until = 1.0;
    o.tgrid.growth = 1.03;
    return o;
}

PipelineRun run_pipeline(const Grid& grid, const ScalarField& eps, const ScalarField& gamma, double m,
                         const BoundaryField& g, const PipelineOptions& opts) {
    require(!opts.hs.empty(), "pipeline: empty h schedule");
    for (double gb : g.v) require(gb >= 0.0, "pipeline: boundary data must be nonnegative");

    PMEProblem p;
    p.grid = &grid;
    p.eps = eps;
    p.gamma = gamma;
    p.m = m;
    p.T = opts.horizon_factor * *std::max_element(opts.hs.begin(), opts.hs.end());
    p.phi = [&g, m](double t, std::size_t b) { return std::pow(std::max(t, 0.0) * g.v[b], 1.0 / m); };
    p.tgrid = opts.tgrid;

    RegularizationLevel lvl = make_level(p, opts.level_k);
    TimeField u = solve_level(p, lvl, opts.newton);
    TransformInputs in = prepare_transform(u, p, lvl.floor);
    DivOperator op(grid, gamma);

    PipelineRun run;
    run.samples = dn_samples(op, in, g, opts.hs, opts.horizon_factor, opts.rule);
    if (opts.noise > 0.0) {
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (DNSample& s : run.samples)
            for (double& lam : s.lambda.v) lam *= 1.0 + opts.noise * unit(rng);
    }
    run.fit = fit_expansion(run.samples, m,
                            opts.noise > 0.0 ? FitWeights::uniform : FitWeights::truncation);
    return run;
}

HarmonicFamily harmonic_polynomials(const DivOperator& op, int degree, const LinearSolveOptions& opts) {
    require(degree >= 0, "inverse: polynomial degree must be nonnegative");
    const Grid& grid = op.grid();
    HarmonicFamily fam;
    // Total-degree monomials in the grid coordinates, constant first.
    std::vector<std::array<int, 3>> exps;
    for (int d = 0; d <= degree; ++d)
        for (int a = d; a >= 0; --a)
            for (int b = d - a; b >= 0; --b) {
                int c = d - a - b;
                if (grid.dim < 3 && c > 0) continue;
                if (grid.dim < 2 && b > 0) continue;
                exps.push_back({a, b, c});
            }
    for (const auto& e : exps) {
        BoundaryField tr(grid, 0.0);
        for (std::size_t bi = 0; bi < grid.num_boundary(); ++bi) {
            auto x = grid.coords(grid.boundary[bi].node);
            tr.v[bi] = std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
        }
        fam.traces.push_back(tr);
        std::string name = "1";
        const char* axes[3] = {"x1", "x2", "x3"};
        for (int a = 0; a < 3; ++a)
            for (int r = 0; r < e[a]; ++r) name = (name == "1" ? "" : name + "*") + axes[a];
        fam.names.push_back(name);
    }
    fam.fields = harmonic_family(op, fam.traces, opts);
    return fam;
}

MomentRow moment_row(const Grid& grid, const ScalarField& eps, const ScalarField& gamma, double m,
                     const ScalarField& H, const BoundaryField& Htrace, double s,
                     const PipelineOptions& opts) {
    require(s > 0.0, "moment: step must be positive");
    MomentRow row;
    row.s = s;
    row.h_max_abs = linf(H);
    double hmin = *std::min_element(H.v.begin(), H.v.end());
    require(hmin > 0.0, "moment: multiplier must be positive");
    require(1.0 - s * row.h_max_abs >= 0.05, "moment: 1 - s H loses positivity margin");

    BoundaryField gp(grid, 0.0), gm(grid, 0.0);
    for (std::size_t b = 0; b < grid.num_boundary(); ++b) {
        gp.v[b] = 1.0 + s * Htrace.v[b];
        gm.v[b] = 1.0 - s * Htrace.v[b];
    }
    PipelineOptions minus = opts;
    minus.seed = opts.seed + 1;
    PipelineRun rp = run_pipeline(grid, eps, gamma, m, gp, opts);
    PipelineRun rm = run_pipeline(grid, eps, gamma, m, gm, minus);
    row.b_plus = rp.fit.B;
    row.b_minus = rm.fit.B;
    // The systematic part of the fit residual is nearly common to the +s and
    // -s runs and cancels in the central difference; what survives (noise,
    // g-dependent truncation) shows up as the difference of the residuals.
    double diff = 0.0;
    for (std::size_t q = 0; q < rp.fit.residual_norm.size(); ++q)
        diff = std::max(diff, std::abs(rp.fit.residual_norm[q] - rm.fit.residual_norm[q]));
    row.fit_noise = 0.5 * diff;
    return row;
}

double epsilon_moment(const MomentRow& row, const BoundaryField& Wtrace, double m, double* bias_out,
                      double* noise_out) {
    double c_m = gamma_one_plus(m);
    double dplus = boundary_pair(row.b_plus, Wtrace);
    double dminus = boundary_pair(row.b_minus, Wtrace);
    double value = m * (dplus - dminus) / (2.0 * row.s * c_m);
    double im = 1.0 / m;
    double curve = std::abs((im - 1.0) * (im - 2.0)) / 6.0 * row.s * row.s * row.h_max_abs * row.h_max_abs;
    double noise = m * row.fit_noise * (1.0 + boundary_l2(Wtrace)) / (row.s * c_m);
    if (bias_out) *bias_out = curve * std::abs(value) + noise;
    if (noise_out) *noise_out = noise;
    return value;
}

MomentSystem build_moment_system(const Grid& grid, const ScalarField& eps_truth,
                                 const ScalarField& gamma_truth, const ScalarField& gamma_model,
                                 double m, int degree, const PipelineOptions& opts, double s_scale) {
    MomentSystem sys;
    sys.c_m = gamma_one_plus(m);
    sys.m = m;
    DivOperator op_model(grid, gamma_model);
    HarmonicFamily fam = harmonic_polynomials(op_model, degree);
    sys.W = fam.fields;
    sys.Wtrace = fam.traces;
    sys.names = fam.names;

    // Positive multipliers: the same lifts shifted by a constant when their
    // minimum is too low. A shifted lift stays coefficient-harmonic.
    for (const ScalarField& w : sys.W) {
        ScalarField h = w;
        double lo = *std::min_element(h.v.begin(), h.v.end());
        if (lo < 0.5) {
            double shift = 1.0 - lo;
            for (double& x : h.v) x += shift;
        }
        sys.H.push_back(h);
    }

    std::size_t idx = 0;
    for (std::size_t i = 0; i < sys.H.size(); ++i) {
        double s = s_scale / linf(sys.H[i]);
        BoundaryField htrace = restrict_to_boundary(sys.H[i]);
        PipelineOptions po = opts;
        po.seed = opts.seed + 2 * idx;
        MomentRow row = moment_row(grid, eps_truth, gamma_truth, m, sys.H[i], htrace, s, po);
        sys.s_used.push_back(s);
        std::vector<double> mu_i, bias_i, noise_i;
        for (std::size_t j = 0; j < sys.W.size(); ++j) {
            double bias = 0.0, noise = 0.0;
            mu_i.push_back(epsilon_moment(row, sys.Wtrace[j], m, &bias, &noise));
            bias_i.push_back(bias);
            noise_i.push_back(noise);
        }
        sys.mu.push_back(std::move(mu_i));
        sys.bias.push_back(std::move(bias_i));
        sys.noise.push_back(std::move(noise_i));
        ++idx;
    }
    return sys;
}

void write_moment_system_json(const std::string& path, const MomentSystem& sys) {
    nlohmann::json j;
    j["names"] = sys.names;
    j["m"] = sys.m;
    j["c_m"] = sys.c_m;
    j["s_used"] = sys.s_used;
    j["mu"] = sys.mu;
    j["bias"] = sys.bias;
    j["noise"] = sys.noise;
    std::ofstream out(path);
    require(out.good(), "inverse: cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

EpsilonReconReport recover_epsilon(const MomentSystem& sys, const Grid& grid,
                                   const EpsilonReconOptions& opts) {
    const std::size_t n = grid.num_nodes;
    const std::size_t R = sys.H.size() * sys.W.size();
    require(R >= 6, "inverse: need at least six moment rows");

    Eigen::MatrixXd G(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(n));
    Eigen::VectorXd mu(static_cast<Eigen::Index>(R));
    double bias2 = 0.0;
    {
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < sys.H.size(); ++i)
            for (std::size_t j = 0; j < sys.W.size(); ++j, ++r) {
                for (std::size_t p = 0; p < n; ++p)
                    G(r, static_cast<Eigen::Index>(p)) =
                        grid.node_weight[p] * sys.H[i].v[p] * sys.W[j].v[p];
                mu(r) = sys.mu[i][j];
                bias2 += sys.bias[i][j] * sys.bias[i][j];
            }
    }

    EpsilonReconReport rep;
    rep.discrepancy_target = opts.discrepancy_safety * std::sqrt(bias2);

    // Effective rank from the small Gram matrix of the rows.
    Eigen::MatrixXd GGt = G * G.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(GGt);
    double lmax = es.eigenvalues().maxCoeff();
    for (Eigen::Index q = 0; q < es.eigenvalues().size(); ++q)
        if (es.eigenvalues()(q) > 1e-12 * lmax) ++rep.effective_rank;
    rep.rank_deficient = static_cast<std::size_t>(rep.effective_rank) < n;

    Eigen::MatrixXd K = gradient_penalty(grid);
    Eigen::MatrixXd GtG = G.transpose() * G;
    Eigen::VectorXd Gtmu = G.transpose() * mu;

    auto solve_for = [&](double alpha) {
        Eigen::MatrixXd M = GtG + alpha * K;
        Eigen::VectorXd x = M.ldlt().solve(Gtmu);
        ScalarField e(grid, 0.0);
        for (std::size_t p = 0; p < n; ++p)
            e.v[p] = std::clamp(x(static_cast<Eigen::Index>(p)), opts.lower, opts.upper);
        Eigen::VectorXd xe(static_cast<Eigen::Index>(n));
        for (std::size_t p = 0; p < n; ++p) xe(static_cast<Eigen::Index>(p)) = e.v[p];
        double res = (G * xe - mu).norm();
        return std::make_pair(e, res);
    };

    if (opts.alpha >= 0.0) {
        auto [e, res] = solve_for(opts.alpha);
        rep.eps_hat = e;
        rep.residual = res;
        rep.alpha_used = opts.alpha;
        rep.path.emplace_back(opts.alpha, res);
        return rep;
    }

    // Ladder from strong to weak smoothing; keep the largest alpha whose
    // residual meets the discrepancy target, or the flattest end of the path.
    double a0 = lmax;  // scale of G G^T
    double res_floor = -1.0;
    std::vector<std::pair<double, ScalarField>> ladder;
    for (int jj = 2; jj <= 12; ++jj) {
        double alpha = a0 * std::pow(10.0, -jj);
        auto [e, res] = solve_for(alpha);
        rep.path.emplace_back(alpha, res);
        if (res_floor < 0.0 || res < res_floor) res_floor = res;
        ladder.emplace_back(alpha, e);
    }
    auto pick = [&](double target) {
        double limit = std::max(target, 1.05 * res_floor);
        std::size_t best = rep.path.size();
        for (std::size_t q = 0; q < rep.path.size(); ++q)
            if (rep.path[q].second <= limit) {
                best = q;
                break;
            }
        if (best == rep.path.size()) {  // nothing met the target: smallest residual
            for (std::size_t q = 0; q < rep.path.size(); ++q)
                if (best == rep.path.size() || rep.path[q].second < rep.path[best].second) best = q;
        }
        rep.eps_hat = ladder[best].second;
        rep.residual = rep.path[best].second;
        rep.alpha_used = rep.path[best].first;
    };
    pick(rep.discrepancy_target);

    // Second pass: the a-priori bias bounds the cubic correction by
    // max|H|^2 |mu|, which is loose. With a first estimate in hand the
    // correction integral s^2 |(1/m-1)(1/m-2)|/6 int eps H^3 W is computable
    // directly; re-run the selection when it tightens the target.
    if (sys.m > 1.0 && sys.noise.size() == sys.H.size()) {
        double fac = std::abs((1.0 / sys.m - 1.0) * (1.0 / sys.m - 2.0)) / 6.0;
        double t2 = 0.0;
        for (std::size_t i = 0; i < sys.H.size(); ++i)
            for (std::size_t j = 0; j < sys.W.size(); ++j) {
                double cube = 0.0;
                for (std::size_t p = 0; p < n; ++p) {
                    double hv = sys.H[i].v[p];
                    cube += grid.node_weight[p] * rep.eps_hat.v[p] * hv * hv * hv * sys.W[j].v[p];
                }
                double s = sys.s_used[i];
                double b = s * s * fac * std::abs(cube) + sys.noise[i][j];
                t2 += b * b;
            }
        t2 = opts.discrepancy_safety * std::sqrt(t2);
        if (t2 < rep.discrepancy_target) {
            rep.discrepancy_target = t2;
            pick(t2);
        }
    }
    return rep;
}

namespace {

// d harm(a, b) / d a for the face-weight derivative.
double dharm_da(double a, double b) {
    double s = a + b;
    return 2.0 * b * b / (s * s);
}

struct GammaState {
    std::vector<ScalarField> lifts;      // V_i per basis datum
    std::vector<BoundaryField> traces;   // their weak conormal traces
    double data_misfit = 0.0;            // sum_i surface-l2^2 of the residual
};

GammaState evaluate_gamma(const Grid& grid, const ScalarField& gamma,
                          const std::vector<BoundaryField>& basis, const std::vector<BoundaryField>& A) {
    GammaState st;
    DivOperator op(grid, gamma);
    SpdFactor factor(op.interior_matrix());
    ScalarField zero(grid, 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        ScalarField V = solve_dirichlet(op, factor, zero, basis[i]);
        BoundaryField tr = op.weak_trace(V, zero);
        double acc = 0.0;
        for (std::size_t b = 0; b < grid.num_boundary(); ++b) {
            double r = tr.v[b] - A[i].v[b];
            acc += grid.boundary[b].surf_weight * r * r;
        }
        st.data_misfit += acc;
        st.lifts.push_back(std::move(V));
        st.traces.push_back(std::move(tr));
    }
    return st;
}

}  // namespace

GammaReconReport recover_gamma(const GammaInverseProblem& p) {
    const Grid& grid = *p.grid;
    const std::size_t n = grid.num_nodes;
    const std::size_t nb = grid.num_boundary();
    const std::size_t nd = p.basis.size();
    require(nd > 0 && p.A.size() == nd, "inverse: basis and data sizes differ");
    require(p.lower > 0.0 && p.upper > p.lower, "inverse: positivity bounds must be ordered");

    GammaReconReport rep;

    // Precheck: the DN pairing must be symmetric across the data set.
    double scale = 0.0, asym = 0.0;
    for (std::size_t i = 0; i < nd; ++i)
        for (std::size_t j = 0; j < nd; ++j) {
            double pij = boundary_pair(p.A[i], p.basis[j]);
            double pji = boundary_pair(p.A[j], p.basis[i]);
            asym = std::max(asym, std::abs(pij - pji));
            scale = std::max(scale, std::abs(pij));
        }
    rep.consistency = scale > 0.0 ? asym / scale : asym;
    require(rep.consistency <= p.consistency_tol, "inverse: DN data fails the symmetry precheck");

    ScalarField gamma(grid, 1.0);
    ScalarField zero(grid, 0.0);
    Eigen::MatrixXd K = gradient_penalty(grid);

    auto total_objective = [&](const GammaState& st, const ScalarField& gam) {
        Eigen::VectorXd gv(static_cast<Eigen::Index>(n));
        for (std::size_t q = 0; q < n; ++q) gv(static_cast<Eigen::Index>(q)) = gam.v[q];
        return st.data_misfit + p.alpha * gv.dot(K * gv);
    };

    GammaState st = evaluate_gamma(grid, gamma, p.basis, p.A);
    double obj = total_objective(st, gamma);
    rep.misfit0 = st.data_misfit;
    rep.misfit_path.push_back(st.data_misfit);

    for (int iter = 0; iter < p.max_iter; ++iter) {
        DivOperator op(grid, gamma);
        SpdFactor factor(op.interior_matrix());

        // Harmonic lifts of boundary indicators: the adjoint fields that turn
        // trace derivatives into one bilinear-form evaluation per face.
        std::vector<ScalarField> wb;
        wb.reserve(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            BoundaryField ind(grid, 0.0);
            ind.v[b] = 1.0;
            wb.push_back(solve_dirichlet(op, factor, zero, ind));
        }

        // Weighted residual and Jacobian: rows (i, b) scaled by sqrt(surf_b).
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nd * nb),
                                                  static_cast<Eigen::Index>(n));
        Eigen::VectorXd rho(static_cast<Eigen::Index>(nd * nb));
        for (std::size_t i = 0; i < nd; ++i)
            for (std::size_t b = 0; b < nb; ++b) {
                double sw = grid.boundary[b].surf_weight;
                rho(static_cast<Eigen::Index>(i * nb + b)) =
                    std::sqrt(sw) * (st.traces[i].v[b] - p.A[i].v[b]);
            }
        for (const auto& f : op.faces()) {
            double gi = gamma.v[f.i], gj = gamma.v[f.j];
            double base = f.w / harmonic_mean(gi, gj);  // vol_f / dx^2
            double di = base * dharm_da(gi, gj);
            double dj = base * dharm_da(gj, gi);
            for (std::size_t i = 0; i < nd; ++i) {
                double dv = st.lifts[i].v[f.j] - st.lifts[i].v[f.i];
                for (std::size_t b = 0; b < nb; ++b) {
                    double dw = wb[b].v[f.j] - wb[b].v[f.i];
                    double sw = grid.boundary[b].surf_weight;
                    double contrib = dv * dw / std::sqrt(sw);
                    J(static_cast<Eigen::Index>(i * nb + b), static_cast<Eigen::Index>(f.i)) +=
                        di * contrib;
                    J(static_cast<Eigen::Index>(i * nb + b), static_cast<Eigen::Index>(f.j)) +=
                        dj * contrib;
                }
            }
        }

        Eigen::VectorXd gv(static_cast<Eigen::Index>(n));
        for (std::size_t q = 0; q < n; ++q) gv(static_cast<Eigen::Index>(q)) = gamma.v[q];
        Eigen::VectorXd grad = 2.0 * (J.transpose() * rho + p.alpha * (K * gv));
        double gnorm = grad.norm();
        if (iter == 0) rep.grad0 = gnorm;
        rep.grad = gnorm;
        if (gnorm <= p.grad_tol * rep.grad0 || st.data_misfit <= p.noise_floor) {
            rep.converged = true;
            break;
        }

        Eigen::MatrixXd M = J.transpose() * J + p.alpha * K;
        for (Eigen::Index q = 0; q < M.rows(); ++q) M(q, q) += 1e-14;
        Eigen::VectorXd step = M.ldlt().solve(-0.5 * grad);

        // Backtracking on the clamped update.
        double tau = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 8; ++ls, tau *= 0.5) {
            ScalarField trial(grid, 0.0);
            for (std::size_t q = 0; q < n; ++q)
                trial.v[q] = std::clamp(gamma.v[q] + tau * step(static_cast<Eigen::Index>(q)),
                                        p.lower, p.upper);
            GammaState ts = evaluate_gamma(grid, trial, p.basis, p.A);
            double tobj = total_objective(ts, trial);
            if (tobj < obj * (1.0 - 1e-4 * tau)) {
                gamma = trial;
                st = std::move(ts);
                obj = tobj;
                accepted = true;
                break;
            }
        }
        rep.iterations = iter + 1;
        rep.misfit_path.push_back(st.data_misfit);
        if (!accepted) {
            rep.line_search_failed = true;
            break;
        }
    }

    // Stagnation: misfit stopped improving but stayed above the declared floor.
    if (!rep.converged && rep.misfit_path.size() >= 3) {
        double a = rep.misfit_path[rep.misfit_path.size() - 3];
        double c = rep.misfit_path.back();
        if (c > p.noise_floor && c > a * (1.0 - 1e-3)) rep.stagnated = true;
    }
    rep.misfit = st.data_misfit;
    rep.gamma_hat = gamma;
    return rep;
}

std::string inverse_budget_note(std::size_t basis_size, std::size_t boundary_nodes,
                                std::size_t parameters) {
    std::string s = "data rows " + std::to_string(basis_size * boundary_nodes) + " (" +
                    std::to_string(basis_size) + " x " + std::to_string(boundary_nodes) +
                    "), parameters " + std::to_string(parameters);
    if (basis_size * 4 < parameters) s += "; basis smaller than a quarter of the parameter count";
    return s;
}

}  // namespace pmelab
