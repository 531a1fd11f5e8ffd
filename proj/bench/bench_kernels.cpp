// Timing comparison of the serial reference kernels against the OpenMP
// backend, plus a whole-solver data point. Results are printed as a table;
// every timed pair is also checked for bit-identical output, which the
// chunked reductions guarantee by construction.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmelab/kernels.hpp"
#include "pmelab/pme.hpp"

using namespace pmelab;
namespace kn = pmelab::kernels;

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(int reps, const std::function<void()>& body) {
    body();  // warm up
    auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) body();
    auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

kn::Csr band_matrix(std::size_t n) {
    kn::Csr A;
    A.n = n;
    A.row_ptr.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t off : {-3, -1, 0, 1, 3}) {
            std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + off;
            if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
            A.col.push_back(static_cast<std::size_t>(j));
            A.val.push_back(off == 0 ? 4.0 : -1.0);
        }
        A.row_ptr.push_back(A.col.size());
    }
    return A;
}

struct Row {
    std::string name;
    double serial_ms = 0.0;
    double par_ms = 0.0;
    bool identical = true;
};

void print_rows(const std::vector<Row>& rows) {
    std::printf("%-22s %12s %12s %9s %10s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup",
                "identical");
    for (const Row& r : rows)
        std::printf("%-22s %12.4f %12.4f %8.2fx %10s\n", r.name.c_str(), r.serial_ms, r.par_ms,
                    r.serial_ms / r.par_ms, r.identical ? "yes" : "NO");
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 1u << 20;
    int reps = 50;
    int threads = 0;
    CLI::App app{"kernel backend timing"};
    app.add_option("-n,--size", n, "vector length");
    app.add_option("-r,--reps", reps, "repetitions per timing");
    app.add_option("-t,--threads", threads, "OpenMP threads (0: default)");
    CLI11_PARSE(app, argc, argv);

    kn::set_threads(threads);
    std::printf("n = %zu, reps = %d, threads = %d\n\n", n, reps, kn::max_threads());

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.1, 2.0);
    std::vector<double> x(n), d(n), y0(n), ys(n), yp(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = uni(rng);
        d[i] = uni(rng);
        y0[i] = uni(rng);
    }
    kn::Csr A = band_matrix(n);

    std::vector<Row> rows;
    auto timed = [&](const std::string& name, const std::function<void()>& s,
                     const std::function<void()>& p, bool check) {
        Row r;
        r.name = name;
        r.serial_ms = time_ms(reps, s);
        r.par_ms = time_ms(reps, p);
        r.identical = !check || same_bits(ys, yp);
        rows.push_back(r);
    };

    double acc_s = 0.0, acc_p = 0.0;
    timed("dot", [&] { acc_s += kn::serial::dot(x.data(), d.data(), n); },
          [&] { acc_p += kn::par::dot(x.data(), d.data(), n); }, false);
    rows.back().identical = acc_s == acc_p;

    timed("max_abs", [&] { acc_s += kn::serial::max_abs(x.data(), n); },
          [&] { acc_p += kn::par::max_abs(x.data(), n); }, false);
    rows.back().identical = acc_s == acc_p;

    ys = y0;
    yp = y0;
    timed("axpy", [&] { kn::serial::axpy(0.5, x.data(), ys.data(), n); },
          [&] { kn::par::axpy(0.5, x.data(), yp.data(), n); }, true);

    ys = y0;
    yp = y0;
    timed("xpay", [&] { kn::serial::xpay(x.data(), 0.75, ys.data(), n); },
          [&] { kn::par::xpay(x.data(), 0.75, yp.data(), n); }, true);

    timed("scale", [&] { kn::serial::scale(x.data(), d.data(), ys.data(), n); },
          [&] { kn::par::scale(x.data(), d.data(), yp.data(), n); }, true);

    timed("power_clamped", [&] { kn::serial::power_clamped(x.data(), 0.2, 1.5, 1.5, ys.data(), n); },
          [&] { kn::par::power_clamped(x.data(), 0.2, 1.5, 1.5, yp.data(), n); }, true);

    ys = y0;
    yp = y0;
    timed("accumulate_scaled", [&] { kn::serial::accumulate_scaled(0.3, x.data(), ys.data(), n); },
          [&] { kn::par::accumulate_scaled(0.3, x.data(), yp.data(), n); }, true);

    timed("csr_apply (5-band)", [&] { kn::serial::csr_apply(A, x.data(), ys.data()); },
          [&] { kn::par::csr_apply(A, x.data(), yp.data()); }, true);

    print_rows(rows);

    // Whole-solver comparison: one nonlinear diffusion solve per backend.
    Grid grid = make_grid(2, {65, 65}, {1.0, 1.0});
    PMEProblem p;
    p.grid = &grid;
    p.eps = ScalarField(grid, 1.0);
    p.gamma = ScalarField(grid, 1.0);
    p.m = 2.0;
    p.T = 0.5;
    p.phi = [&grid](double t, std::size_t b) {
        double s = grid.coords(grid.boundary[b].node)[0];
        return std::sqrt(t * (0.5 + 0.5 * s));
    };
    p.tgrid.kind = TimeGridSpec::Kind::uniform;
    p.tgrid.steps = 200;
    RegularizationLevel lvl = make_level(p, 1e6);

    kn::set_backend(kn::Backend::serial);
    auto t0 = clock_type::now();
    TimeField us = solve_level(p, lvl);
    auto t1 = clock_type::now();
    kn::set_backend(kn::Backend::parallel);
    TimeField up = solve_level(p, lvl);
    auto t2 = clock_type::now();

    double solver_s = std::chrono::duration<double, std::milli>(t1 - t0).count();
    double solver_p = std::chrono::duration<double, std::milli>(t2 - t1).count();
    bool solver_same = same_bits(us.frames.back().v, up.frames.back().v);
    std::printf("\n%-22s %12.1f %12.1f %8.2fx %10s\n", "solve_level 65x65x200", solver_s, solver_p,
                solver_s / solver_p, solver_same ? "yes" : "NO");
    return 0;
}
