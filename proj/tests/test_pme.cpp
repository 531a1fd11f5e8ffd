#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pmelab/pme.hpp"
#include "pmelab/quadrature.hpp"

using namespace pmelab;

namespace {
// Exact degenerate front for m = 2, eps = gamma = 1, speed c:
// u(x,t) = (c/2) max(ct - x, 0). The boundary feed at x = 0 is (c^2/2) t.
double wave(double x, double t, double c) { return 0.5 * c * std::max(c * t - x, 0.0); }

PMEProblem wave_problem(const Grid& g, double c, double T) {
    PMEProblem p;
    p.grid = &g;
    p.eps = ScalarField(g, 1.0);
    p.gamma = ScalarField(g, 1.0);
    p.m = 2.0;
    p.T = T;
    p.phi = [&g, c](double t, std::size_t b) {
        double x = g.coords(g.boundary[b].node)[0];
        return wave(x, t, c);
    };
    // dt small enough that the first-order time error does not mask the
    // spatial front error in the refinement ratio
    p.tgrid.kind = TimeGridSpec::Kind::uniform;
    p.tgrid.steps = 2000;
    return p;
}

double wave_error(int n, double c, double T) {
    Grid g = make_grid(1, {n}, {1.0});
    PMEProblem p = wave_problem(g, c, T);
    RegularizationLevel lvl = make_level(p, 1e6);
    TimeField u = solve_level(p, lvl);
    const ScalarField& last = u.frames.back();
    double err = 0.0;
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        err = std::max(err, std::abs(last.v[i] - wave(g.coords(i)[0], T, c)));
    return err;
}
}  // namespace

TEST_CASE("1d traveling wave is captured at first order") {
    double e1 = wave_error(51, 1.0, 0.5);
    double e2 = wave_error(101, 1.0, 0.5);
    CHECK(e2 < 1.5e-2);
    CHECK(std::log2(e1 / e2) > 0.7);
}

TEST_CASE("traveling wave energy matches the closed form") {
    // integral_0^T integral |d/dx u^2|^2 = T^4/48 for c = 1.
    Grid g = make_grid(1, {101}, {1.0});
    PMEProblem p = wave_problem(g, 1.0, 0.5);
    RegularizationLevel lvl = make_level(p, 1e6);
    TimeField u = solve_level(p, lvl);
    double exact = std::pow(0.5, 4) / 48.0;
    CHECK(energy_norm(u, 2.0) == doctest::Approx(exact).epsilon(0.1));
}

TEST_CASE("mobility and kirchhoff obey the clamp algebra") {
    RegularizationLevel lvl;
    lvl.k = 100.0;
    lvl.floor = 0.01;
    lvl.lam_min = 0.01;
    lvl.lam_max = 2.0;
    double m = 2.5;
    // inside the window: b = lambda^m, b' = m lambda^(m-1)
    CHECK(kirchhoff(1.3, lvl, m) == doctest::Approx(std::pow(1.3, m)).epsilon(1e-13));
    CHECK(kirchhoff_prime(1.3, lvl, m) == doctest::Approx(m * std::pow(1.3, m - 1)).epsilon(1e-13));
    CHECK(mobility(0.7, 1.3, lvl, m) == doctest::Approx(0.7 * m * std::pow(1.3, m - 1)).epsilon(1e-13));
    // above: linear continuation with the boundary slope
    double above = std::pow(2.0, m) + m * std::pow(2.0, m - 1) * 0.5;
    CHECK(kirchhoff(2.5, lvl, m) == doctest::Approx(above).epsilon(1e-13));
    CHECK(kirchhoff_prime(2.5, lvl, m) == doctest::Approx(m * std::pow(2.0, m - 1)).epsilon(1e-13));
    // below likewise
    double below = std::pow(0.01, m) - m * std::pow(0.01, m - 1) * 0.005;
    CHECK(kirchhoff(0.005, lvl, m) == doctest::Approx(below).epsilon(1e-12));
    // kirchhoff' is the finite-difference slope of kirchhoff inside the window
    double fd = (kirchhoff(1.3 + 1e-6, lvl, m) - kirchhoff(1.3 - 1e-6, lvl, m)) / 2e-6;
    CHECK(kirchhoff_prime(1.3, lvl, m) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("level schedule is monotone decreasing in k and converges") {
    Grid g = make_grid(2, {9, 9}, {1.0, 1.0});
    PMEProblem p;
    p.grid = &g;
    p.eps = ScalarField(g, 1.0);
    p.gamma = ScalarField(g, 1.0);
    p.m = 2.0;
    p.T = 0.5;
    p.phi = [&g](double t, std::size_t b) {
        double x = g.coords(g.boundary[b].node)[0];
        return std::sqrt(t * (1.0 + x));
    };
    PMESolveResult r = solve_pme(p, 1e-3, 100.0);
    REQUIRE(r.ks.size() >= 2);
    for (std::size_t i = 1; i < r.ks.size(); ++i) CHECK(r.ks[i] == doctest::Approx(2.0 * r.ks[i - 1]));
    double umax = 0.0;
    for (const auto& fr : r.u.frames) umax = std::max(umax, linf(fr));
    for (double d : r.monotone_defects) CHECK(d <= 1e-9 * (1.0 + umax));
    CHECK(r.level_diffs.back() <= 1e-3 * (1.0 + umax));
    // floor of the final level bounds the solution from below
    double floor = 1.0 / r.ks.back();
    for (const auto& fr : r.u.frames)
        for (double v : fr.v) CHECK(v >= floor - 1e-12);
}

TEST_CASE("ordered data produce ordered solutions at a shared level") {
    Grid g = make_grid(2, {11, 11}, {1.0, 1.0});
    PMEProblem pa, pb;
    for (PMEProblem* p : {&pa, &pb}) {
        p->grid = &g;
        p->eps = ScalarField(g, 1.0);
        p->gamma = ScalarField(g, 1.0);
        p->m = 2.0;
        p->T = 0.4;
        p->tgrid.kind = TimeGridSpec::Kind::uniform;
        p->tgrid.steps = 60;
    }
    pa.phi = [](double t, std::size_t) { return std::sqrt(0.5 * t); };
    pb.phi = [&g](double t, std::size_t b) {
        double x = g.coords(g.boundary[b].node)[0];
        return std::sqrt(t * (0.5 + 0.5 * x));
    };
    pb.f = [](double, std::size_t) { return 0.3; };
    // One clamp window sized for the larger problem keeps both solves inside
    // the same monotone flux function, which is what the ordering needs.
    RegularizationLevel lvl = make_level(pb, 1e4);
    TimeField ua = solve_level(pa, lvl);
    TimeField ub = solve_level(pb, lvl);
    REQUIRE(ua.stamps.size() == ub.stamps.size());
    double umax = 0.0;
    for (const auto& fr : ub.frames) umax = std::max(umax, linf(fr));
    for (std::size_t s = 0; s < ua.frames.size(); ++s)
        for (std::size_t i = 0; i < g.num_nodes; ++i)
            CHECK(ua.frames[s].v[i] <= ub.frames[s].v[i] + 1e-9 * (1.0 + umax));
}

TEST_CASE("monotone feed gives a solution nondecreasing in time") {
    Grid g = make_grid(2, {9, 9}, {1.0, 1.0});
    PMEProblem p;
    p.grid = &g;
    p.eps = ScalarField(g, 1.0);
    p.gamma = ScalarField(g, 2.0);
    p.m = 3.0;
    p.T = 0.5;
    p.phi = [](double t, std::size_t) { return std::cbrt(t); };
    RegularizationLevel lvl = make_level(p, 1e4);
    TimeField u = solve_level(p, lvl);
    double umax = 0.0;
    for (const auto& fr : u.frames) umax = std::max(umax, linf(fr));
    for (std::size_t s = 1; s < u.frames.size(); ++s)
        for (std::size_t i = 0; i < g.num_nodes; ++i)
            CHECK(u.frames[s].v[i] >= u.frames[s - 1].v[i] - 1e-9 * (1.0 + umax));
}

TEST_CASE("stamp generators respect the requested shapes") {
    Grid g = make_grid(1, {11}, {1.0});
    PMEProblem p;
    p.grid = &g;
    p.eps = ScalarField(g, 1.0);
    p.gamma = ScalarField(g, 1.0);
    p.T = 2.0;
    p.phi = [](double t, std::size_t) { return std::sqrt(t); };

    p.tgrid.kind = TimeGridSpec::Kind::uniform;
    p.tgrid.steps = 8;
    RegularizationLevel lvl = make_level(p, 100.0);
    auto uniform = make_stamps(p, lvl);
    REQUIRE(uniform.size() == 9);  // includes t = 0
    CHECK(uniform.front() == 0.0);
    CHECK(uniform[1] == doctest::Approx(0.25));
    CHECK(uniform.back() == doctest::Approx(2.0));

    p.tgrid.kind = TimeGridSpec::Kind::stretched;
    p.tgrid.dt0 = 0.1;
    p.tgrid.uniform_until = 0.3;
    p.tgrid.growth = 1.5;
    auto stretched = make_stamps(p, lvl);
    CHECK(stretched.front() == 0.0);
    CHECK(stretched[1] == doctest::Approx(0.1));
    CHECK(stretched.back() == doctest::Approx(2.0));
    for (std::size_t i = 1; i < stretched.size(); ++i) CHECK(stretched[i] > stretched[i - 1]);
    // first geometric step after the uniform prefix [0, 0.3]
    REQUIRE(stretched.size() >= 5);
    CHECK(stretched[4] - stretched[3] == doctest::Approx(0.15));

    double sp = sup_phi(p);
    CHECK(sp == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(sup_source(p) == 0.0);
}
