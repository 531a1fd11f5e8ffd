#include "pmelab/pme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pmelab/kernels.hpp"
#include "pmelab/linsolve.hpp"

namespace pmelab {

namespace {

double sample_sup(const std::function<double(double, std::size_t)>& fn, double T,
                  const std::vector<std::size_t>& indices) {
    if (!fn) return 0.0;
    const int nt = 512;
    double s = 0.0;
    for (int it = 0; it <= nt; ++it) {
        double t = T * double(it) / double(nt);
        for (std::size_t idx : indices) s = std::max(s, fn(t, idx));
    }
    return s;
}

}  // namespace

double sup_phi(const PMEProblem& p) {
    require(p.grid != nullptr, "pme: grid not set");
    require(static_cast<bool>(p.phi), "pme: boundary data not set");
    std::vector<std::size_t> idx(p.grid->num_boundary());
    for (std::size_t b = 0; b < idx.size(); ++b) idx[b] = b;
    return sample_sup(p.phi, p.T, idx);
}

double sup_source(const PMEProblem& p) {
    require(p.grid != nullptr, "pme: grid not set");
    if (!p.f) return 0.0;
    std::vector<std::size_t> idx(p.grid->num_nodes);
    for (std::size_t n = 0; n < idx.size(); ++n) idx[n] = n;
    return sample_sup(p.f, p.T, idx);
}

RegularizationLevel make_level(const PMEProblem& p, double k, double window_k) {
    require(k >= 1.0, "pme: regularization k must be >= 1");
    if (window_k <= 0.0) window_k = k;
    require(window_k <= k + 1e-9, "pme: clamp window k must not exceed the level k");
    RegularizationLevel lvl;
    lvl.k = k;
    lvl.floor = 1.0 / k;
    lvl.lam_min = 1.0 / window_k;
    // The solution obeys u <= 1/k + sup phi + t * sup(f_k / eps); the 1/eps
    // factor matters when eps dips below 1, so widen the window accordingly to
    // keep the clamp inactive on the solution's range.
    double eps_min = p.eps.v[0];
    for (double e : p.eps.v) eps_min = std::min(eps_min, e);
    require(eps_min > 0.0, "pme: eps must be positive");
    double lift = std::max(1.0, 1.0 / eps_min);
    lvl.lam_max = sup_phi(p) + lift * p.T * sup_source(p) + (1.0 + lift * p.T) / window_k;
    return lvl;
}

double mobility(double gamma_value, double lambda, const RegularizationLevel& lvl, double m) {
    double lam = std::clamp(lambda, lvl.lam_min, lvl.lam_max);
    return gamma_value * m * std::pow(lam, m - 1.0);
}

double kirchhoff(double lambda, const RegularizationLevel& lvl, double m) {
    if (lambda < lvl.lam_min)
        return std::pow(lvl.lam_min, m) + m * std::pow(lvl.lam_min, m - 1.0) * (lambda - lvl.lam_min);
    if (lambda > lvl.lam_max)
        return std::pow(lvl.lam_max, m) + m * std::pow(lvl.lam_max, m - 1.0) * (lambda - lvl.lam_max);
    return std::pow(lambda, m);
}

double kirchhoff_prime(double lambda, const RegularizationLevel& lvl, double m) {
    double lam = std::clamp(lambda, lvl.lam_min, lvl.lam_max);
    return m * std::pow(lam, m - 1.0);
}

std::vector<double> make_stamps(const PMEProblem& p, const RegularizationLevel& lvl) {
    require(p.T > 0.0, "pme: final time must be positive");
    const TimeGridSpec& tg = p.tgrid;
    std::vector<double> stamps;
    stamps.push_back(0.0);
    if (tg.kind == TimeGridSpec::Kind::uniform) {
        require(tg.steps >= 1, "pme: uniform time grid needs steps >= 1");
        for (std::size_t i = 1; i <= tg.steps; ++i)
            stamps.push_back(p.T * double(i) / double(tg.steps));
        return stamps;
    }
    double dt0 = tg.dt0;
    if (tg.kind == TimeGridSpec::Kind::automatic) {
        double dx_min = p.grid->dx[0];
        for (int a = 1; a < p.grid->dim; ++a) dx_min = std::min(dx_min, p.grid->dx[a]);
        double sup_gamma = kernels::serial::max_abs(p.gamma.v);
        double cap = dx_min * dx_min / (2.0 * p.m * sup_gamma * std::pow(lvl.lam_max, p.m - 1.0));
        dt0 = std::clamp(cap, 2e-3, 1e-2);
    }
    require(dt0 > 0.0 && tg.growth > 1.0, "pme: stretched time grid needs dt0 > 0 and growth > 1");
    double t = 0.0;
    double dt = dt0;
    double uniform_until = std::min(tg.uniform_until, p.T);
    while (t < p.T - 1e-12 * p.T) {
        if (t >= uniform_until - 1e-12) dt *= tg.growth;
        t = std::min(t + dt, p.T);
        stamps.push_back(t);
    }
    return stamps;
}

namespace {

struct NewtonWorkspace {
    const Grid* grid = nullptr;
    const DivOperator* op = nullptr;
    std::vector<std::size_t> interior;           // interior node ids
    std::vector<std::ptrdiff_t> interior_index;  // node -> row or -1
    kernels::Csr jac;                            // pattern fixed
    std::vector<std::size_t> diag_pos;           // row -> position of diagonal in jac
    // Per face: rows/positions touched when accumulating the Jacobian.
    struct FaceSlots {
        std::ptrdiff_t row_i = -1, row_j = -1;  // interior rows (-1 when boundary)
        std::size_t pos_ii = 0, pos_ij = 0, pos_jj = 0, pos_ji = 0;
    };
    std::vector<FaceSlots> slots;
};

std::size_t find_col(const kernels::Csr& a, std::size_t row, std::size_t col) {
    for (std::size_t p = a.row_ptr[row]; p < a.row_ptr[row + 1]; ++p)
        if (a.col[p] == col) return p;
    throw std::runtime_error("pme: jacobian pattern is missing an expected entry");
}

NewtonWorkspace make_workspace(const DivOperator& op) {
    NewtonWorkspace ws;
    ws.grid = &op.grid();
    ws.op = &op;
    ws.interior = op.interior();
    ws.interior_index.assign(ws.grid->num_nodes, -1);
    for (std::size_t r = 0; r < ws.interior.size(); ++r)
        ws.interior_index[ws.interior[r]] = std::ptrdiff_t(r);
    ws.jac = op.interior_matrix();  // borrows the SPD pattern, values rewritten per step
    ws.diag_pos.resize(ws.interior.size());
    for (std::size_t r = 0; r < ws.interior.size(); ++r)
        ws.diag_pos[r] = find_col(ws.jac, r, r);
    const auto& faces = op.faces();
    ws.slots.resize(faces.size());
    for (std::size_t fidx = 0; fidx < faces.size(); ++fidx) {
        const auto& f = faces[fidx];
        auto& s = ws.slots[fidx];
        s.row_i = ws.interior_index[f.i];
        s.row_j = ws.interior_index[f.j];
        if (s.row_i >= 0) {
            s.pos_ii = ws.diag_pos[std::size_t(s.row_i)];
            if (s.row_j >= 0) s.pos_ij = find_col(ws.jac, std::size_t(s.row_i), std::size_t(s.row_j));
        }
        if (s.row_j >= 0) {
            s.pos_jj = ws.diag_pos[std::size_t(s.row_j)];
            if (s.row_i >= 0) s.pos_ji = find_col(ws.jac, std::size_t(s.row_j), std::size_t(s.row_i));
        }
    }
    return ws;
}

// Residual of the implicit Euler step at the interior nodes:
//   F_i = eps_i w_i (u_i - uprev_i)/dt - sum_f w_f (b(u_j) - b(u_i)) - w_i f_i
// with u already carrying the boundary values for time t1.
void residual(const NewtonWorkspace& ws, const PMEProblem& p, const RegularizationLevel& lvl,
              const std::vector<double>& u, const std::vector<double>& uprev, double dt,
              const std::vector<double>& fvals, std::vector<double>& F, std::vector<double>& bu) {
    const Grid& g = *ws.grid;
    const std::size_t n = g.num_nodes;
    bu.resize(n);
    for (std::size_t i = 0; i < n; ++i) bu[i] = kirchhoff(u[i], lvl, p.m);
    F.assign(ws.interior.size(), 0.0);
    for (std::size_t r = 0; r < ws.interior.size(); ++r) {
        std::size_t i = ws.interior[r];
        F[r] = p.eps.v[i] * g.node_weight[i] * (u[i] - uprev[i]) / dt - g.node_weight[i] * fvals[i];
    }
    const auto& faces = ws.op->faces();
    for (std::size_t fidx = 0; fidx < faces.size(); ++fidx) {
        const auto& f = faces[fidx];
        double flux = f.w * (bu[f.j] - bu[f.i]);  // f.w holds harm(gamma)/dx^2 * face volume
        const auto& s = ws.slots[fidx];
        if (s.row_i >= 0) F[std::size_t(s.row_i)] -= flux;
        if (s.row_j >= 0) F[std::size_t(s.row_j)] += flux;
    }
}

void jacobian(NewtonWorkspace& ws, const PMEProblem& p, const RegularizationLevel& lvl,
              const std::vector<double>& u, double dt) {
    const Grid& g = *ws.grid;
    std::fill(ws.jac.val.begin(), ws.jac.val.end(), 0.0);
    for (std::size_t r = 0; r < ws.interior.size(); ++r) {
        std::size_t i = ws.interior[r];
        ws.jac.val[ws.diag_pos[r]] = p.eps.v[i] * g.node_weight[i] / dt;
    }
    const auto& faces = ws.op->faces();
    for (std::size_t fidx = 0; fidx < faces.size(); ++fidx) {
        const auto& f = faces[fidx];
        const auto& s = ws.slots[fidx];
        double bpi = kirchhoff_prime(u[f.i], lvl, p.m);
        double bpj = kirchhoff_prime(u[f.j], lvl, p.m);
        if (s.row_i >= 0) {
            ws.jac.val[s.pos_ii] += f.w * bpi;
            if (s.row_j >= 0) ws.jac.val[s.pos_ij] -= f.w * bpj;
        }
        if (s.row_j >= 0) {
            ws.jac.val[s.pos_jj] += f.w * bpj;
            if (s.row_i >= 0) ws.jac.val[s.pos_ji] -= f.w * bpi;
        }
    }
}

struct StepContext {
    const PMEProblem* p = nullptr;
    const RegularizationLevel* lvl = nullptr;
    NewtonWorkspace* ws = nullptr;
    LuFactor* lu = nullptr;
    const NewtonOptions* opts = nullptr;
};

void fill_boundary(const StepContext& c, std::vector<double>& u, double t) {
    const Grid& g = *c.p->grid;
    for (std::size_t b = 0; b < g.num_boundary(); ++b)
        u[g.boundary[b].node] = c.p->phi(t, b) + c.lvl->floor;
}

void fill_source(const StepContext& c, std::vector<double>& fvals, double t) {
    const Grid& g = *c.p->grid;
    if (c.p->f) {
        for (std::size_t i = 0; i < g.num_nodes; ++i) fvals[i] = c.p->f(t, i) + c.lvl->floor;
    } else {
        std::fill(fvals.begin(), fvals.end(), c.lvl->floor);
    }
}

bool newton_step(const StepContext& c, const std::vector<double>& uprev, double t0, double t1,
                 std::vector<double>& u) {
    NewtonWorkspace& ws = *c.ws;
    const Grid& g = *c.p->grid;
    double dt = t1 - t0;
    std::vector<double> fvals(g.num_nodes);
    fill_source(c, fvals, t1);
    u = uprev;
    fill_boundary(c, u, t1);

    // Convergence scale: the residual is assembled from time, flux, and
    // source terms; roundoff in F is proportional to their magnitudes, so the
    // tolerance must be too (a 1/dt scale alone starves the tail steps).
    double umax = 0.0;
    for (double x : u) umax = std::max(umax, std::abs(x));
    double fmax = 0.0, ewmax = 0.0, wmax = 0.0;
    for (std::size_t i : ws.interior) {
        fmax = std::max(fmax, std::abs(fvals[i]));
        ewmax = std::max(ewmax, c.p->eps.v[i] * g.node_weight[i]);
        wmax = std::max(wmax, g.node_weight[i]);
    }
    double wfmax = 0.0;
    for (const auto& f : ws.op->faces()) wfmax = std::max(wfmax, f.w);
    double scale = ewmax / dt * (1.0 + umax) + wfmax * (1.0 + kirchhoff(umax, *c.lvl, c.p->m)) +
                   wmax * (1.0 + fmax);

    std::vector<double> F, bu, du, utrial, Ftrial;
    residual(ws, *c.p, *c.lvl, u, uprev, dt, fvals, F, bu);
    double fn = kernels::serial::max_abs(F);
    for (int it = 0; it < c.opts->max_iter; ++it) {
        if (fn <= c.opts->tol * scale) return true;
        jacobian(ws, *c.p, *c.lvl, u, dt);
        c.lu->factor(ws.jac);
        du = c.lu->solve(F);
        double s = 1.0;
        bool accepted = false;
        for (int half = 0; half < 12; ++half) {
            utrial = u;
            // Project onto u >= floor: the discrete solution satisfies the
            // bound exactly (the floor is a subsolution), and iterates below
            // the mobility window would see a near-singular Jacobian.
            for (std::size_t r = 0; r < ws.interior.size(); ++r) {
                std::size_t i = ws.interior[r];
                utrial[i] = std::max(c.lvl->floor, utrial[i] - s * du[r]);
            }
            residual(ws, *c.p, *c.lvl, utrial, uprev, dt, fvals, Ftrial, bu);
            double fn_trial = kernels::serial::max_abs(Ftrial);
            if (fn_trial < (1.0 - 1e-4 * s) * fn) {
                u.swap(utrial);
                F.swap(Ftrial);
                fn = fn_trial;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) return false;
    }
    return fn <= c.opts->tol * scale;
}

// Advance uprev(t0) -> t1, bisecting the step on Newton failure.
void advance(const StepContext& c, std::vector<double>& uprev, double t0, double t1, int depth) {
    std::vector<double> u;
    if (newton_step(c, uprev, t0, t1, u)) {
        uprev.swap(u);
        return;
    }
    if (depth >= c.opts->max_halvings) {
        std::ostringstream msg;
        msg << "pme: Newton failed to converge after maximum time-step bisections near t=" << t1;
        throw std::runtime_error(msg.str());
    }
    double tm = 0.5 * (t0 + t1);
    advance(c, uprev, t0, tm, depth + 1);
    advance(c, uprev, tm, t1, depth + 1);
}

}  // namespace

TimeField solve_level(const PMEProblem& p, const RegularizationLevel& lvl, const NewtonOptions& opts,
                      const std::vector<double>* stamps_in) {
    require(p.grid != nullptr, "pme: grid not set");
    require(p.m >= 1.0, "pme: exponent m must be >= 1");
    require(p.eps.v.size() == p.grid->num_nodes && p.gamma.v.size() == p.grid->num_nodes,
            "pme: coefficient fields do not match the grid");
    std::vector<double> stamps = stamps_in ? *stamps_in : make_stamps(p, lvl);
    require(stamps.size() >= 2 && stamps.front() == 0.0, "pme: stamp sequence must start at 0");

    DivOperator op(*p.grid, p.gamma);
    NewtonWorkspace ws = make_workspace(op);
    LuFactor lu;
    StepContext c{&p, &lvl, &ws, &lu, &opts};

    TimeField out(*p.grid, stamps);
    std::vector<double> u(p.grid->num_nodes, lvl.floor);
    fill_boundary(c, u, 0.0);
    out.frames[0].v = u;
    for (std::size_t s = 1; s < stamps.size(); ++s) {
        advance(c, u, stamps[s - 1], stamps[s], 0);
        out.frames[s].v = u;
    }
    return out;
}

PMESolveResult solve_pme(const PMEProblem& p, double tol, double k0, const NewtonOptions& opts) {
    require(tol > 0.0, "pme: level tolerance must be positive");
    require(k0 >= 1.0, "pme: initial k must be >= 1");
    PMESolveResult res;
    // Every level in the schedule shares one flux function: the upper clamp of
    // the first level and a lower clamp far below any level's floor. Solutions
    // then never touch the clamped regions (each u_k equals its own-level
    // solution exactly) while the shared flux makes the comparison between
    // consecutive levels exact, not just asymptotic.
    RegularizationLevel first = make_level(p, k0);
    first.lam_min = 1e-14;
    res.stamps = make_stamps(p, first);

    double k = k0;
    TimeField u_prev = solve_level(p, first, opts, &res.stamps);
    res.ks.push_back(k);
    while (true) {
        double k_next = 2.0 * k;
        if (k_next > 1e9)
            throw std::runtime_error("pme: regularization schedule exceeded k = 1e9 without meeting tolerance");
        RegularizationLevel lvl = make_level(p, k_next, k0);  // shared clamp window
        lvl.lam_min = first.lam_min;
        TimeField u_next = solve_level(p, lvl, opts, &res.stamps);
        double diff = 0.0, defect = 0.0;
        for (std::size_t s = 0; s < res.stamps.size(); ++s) {
            for (std::size_t i = 0; i < p.grid->num_nodes; ++i) {
                double d = u_next.frames[s].v[i] - u_prev.frames[s].v[i];
                diff = std::max(diff, std::abs(d));
                defect = std::max(defect, d);  // u_{2k} <= u_k, so positive d is a defect
            }
        }
        res.ks.push_back(k_next);
        res.level_diffs.push_back(diff);
        res.monotone_defects.push_back(std::max(defect, 0.0));
        u_prev = std::move(u_next);
        k = k_next;
        if (diff <= tol) break;
    }
    res.u = std::move(u_prev);
    return res;
}

double energy_norm(const TimeField& u, double m) {
    const Grid& g = *u.grid;
    const std::size_t n = g.num_nodes;
    std::vector<double> w(u.stamps.size(), 0.0);
    std::vector<double> um(n);
    for (std::size_t s = 0; s < u.stamps.size(); ++s) {
        for (std::size_t i = 0; i < n; ++i) um[i] = std::pow(std::max(u.frames[s].v[i], 0.0), m);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto mi = g.multi(i);
            double g2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                std::size_t lo = mi[std::size_t(a)] > 0 ? i - std::size_t(g.stride[a]) : i;
                std::size_t hi = mi[std::size_t(a)] + 1 < g.counts[a] ? i + std::size_t(g.stride[a]) : i;
                double h = double(hi - lo) / double(g.stride[a]) * g.dx[a];
                double d = (um[hi] - um[lo]) / h;
                g2 += d * d;
            }
            acc += g.node_weight[i] * g2;
        }
        w[s] = acc;
    }
    double total = 0.0;
    for (std::size_t s = 1; s < u.stamps.size(); ++s)
        total += 0.5 * (w[s] + w[s - 1]) * (u.stamps[s] - u.stamps[s - 1]);
    return total;
}

}  // namespace pmelab
