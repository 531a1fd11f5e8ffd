#include "pmelab/laplace.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pmelab/io.hpp"
#include "pmelab/kernels.hpp"
#include "pmelab/special.hpp"

namespace pmelab {

namespace {

// (1 - (1-e^-d)/d) and ((1-e^-d)/d - e^-d), stable for small d.
double left_shape(double d) {
    if (d < 1e-3) return d / 2.0 - d * d / 6.0 + d * d * d / 24.0 - d * d * d * d / 120.0;
    return 1.0 - (-std::expm1(-d)) / d;
}
double right_shape(double d) {
    if (d < 1e-3) return d / 2.0 - d * d / 3.0 + d * d * d / 8.0 - d * d * d * d / 30.0;
    return (-std::expm1(-d)) / d - std::exp(-d);
}

}  // namespace

TransformWeights make_transform_weights(const std::vector<double>& stamps, double h,
                                        double horizon_factor, const std::array<double, 2>& tail_powers,
                                        LaplaceRule rule) {
    require(h > 0.0, "laplace: decay parameter h must be positive");
    require(horizon_factor >= 10.0, "laplace: horizon factor must be at least 10");
    require(stamps.size() >= 2 && stamps.front() >= 0.0, "laplace: stamps must not be negative");
    for (std::size_t s = 1; s < stamps.size(); ++s)
        require(stamps[s] > stamps[s - 1], "laplace: stamps must be strictly increasing");
    const double H = horizon_factor * h;
    require(stamps.back() >= H * (1.0 - 1e-12),
            "laplace: the series does not reach the horizon required for this h");

    TransformWeights tw;
    tw.h = h;
    tw.powers = tail_powers;
    std::size_t n = stamps.size();
    while (n > 0 && stamps[n - 1] > H * (1.0 + 1e-12)) --n;
    require(n >= 2, "laplace: fewer than two stamps inside the horizon");
    tw.n = n;
    tw.horizon = stamps[n - 1];
    tw.w.assign(n, 0.0);

    for (std::size_t s = 0; s + 1 < n; ++s) {
        double t0 = stamps[s], t1 = stamps[s + 1];
        double dt = t1 - t0;
        if (rule == LaplaceRule::trapezoid) {
            tw.w[s] += 0.5 * dt * std::exp(-t0 / h);
            tw.w[s + 1] += 0.5 * dt * std::exp(-t1 / h);
        } else {
            double d = dt / h;
            double e0 = std::exp(-t0 / h);
            tw.w[s] += h * e0 * left_shape(d);
            tw.w[s + 1] += h * e0 * right_shape(d);
        }
    }

    // Tail fit over the last decade of the prefix.
    const double T = tw.horizon;
    std::size_t fit_begin = n - 1;
    while (fit_begin > 0 && stamps[fit_begin - 1] >= T / 10.0) --fit_begin;
    std::size_t fit_count = n - fit_begin;
    require(fit_count >= 3, "laplace: tail fit needs at least three stamps in the last decade");

    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    for (std::size_t s = fit_begin; s < n; ++s) {
        double f0 = std::pow(stamps[s], tail_powers[0]);
        double f1 = std::pow(stamps[s], tail_powers[1]);
        g00 += f0 * f0;
        g01 += f0 * f1;
        g11 += f1 * f1;
    }
    double det = g00 * g11 - g01 * g01;
    require(det > 1e-12 * g00 * g11, "laplace: tail basis is collinear on the fit window");

    tw.alpha0.assign(n, 0.0);
    tw.alpha1.assign(n, 0.0);
    for (std::size_t s = fit_begin; s < n; ++s) {
        double f0 = std::pow(stamps[s], tail_powers[0]);
        double f1 = std::pow(stamps[s], tail_powers[1]);
        tw.alpha0[s] = (g11 * f0 - g01 * f1) / det;
        tw.alpha1[s] = (g00 * f1 - g01 * f0) / det;
    }
    tw.tail_moment[0] = exp_tail_moment(tail_powers[0], T, h);
    tw.tail_moment[1] = exp_tail_moment(tail_powers[1], T, h);
    for (std::size_t s = fit_begin; s < n; ++s)
        tw.w[s] += tw.tail_moment[0] * tw.alpha0[s] + tw.tail_moment[1] * tw.alpha1[s];
    return tw;
}

LaplaceValue laplace_of_series(const std::vector<double>& stamps, const std::vector<double>& values,
                               double h, double horizon_factor, const std::array<double, 2>& tail_powers,
                               LaplaceRule rule) {
    require(values.size() == stamps.size(), "laplace: series and stamps differ in length");
    TransformWeights tw = make_transform_weights(stamps, h, horizon_factor, tail_powers, rule);
    LaplaceValue out;
    for (std::size_t s = 0; s < tw.n; ++s) {
        out.value += tw.w[s] * values[s];
        out.coeff0 += tw.alpha0[s] * values[s];
        out.coeff1 += tw.alpha1[s] * values[s];
    }
    out.tail = tw.tail_moment[0] * out.coeff0 + tw.tail_moment[1] * out.coeff1;
    out.truncation = std::abs(values[tw.n - 1]) * (tw.horizon + h) * std::exp(-tw.horizon / h);
    return out;
}

ScalarField apply_transform(const TimeField& y, const TransformWeights& tw) {
    require(y.grid != nullptr && tw.n <= y.frames.size(), "laplace: weights do not match the series");
    ScalarField out(*y.grid, 0.0);
    for (std::size_t s = 0; s < tw.n; ++s)
        kernels::accumulate_scaled(tw.w[s], y.frames[s].v.data(), out.v.data(), out.v.size());
    return out;
}

TransformInputs prepare_transform(const TimeField& u, const PMEProblem& p, double floor_used) {
    TransformInputs in;
    in.u = &u;
    in.p = &p;
    in.floor = floor_used;
    in.v.grid = u.grid;
    in.v.stamps = u.stamps;
    in.v.frames.assign(u.frames.size(), ScalarField(*u.grid));
    for (std::size_t s = 0; s < u.frames.size(); ++s)
        for (std::size_t i = 0; i < u.frames[s].v.size(); ++i)
            in.v.frames[s].v[i] = std::pow(u.frames[s].v[i], p.m);
    return in;
}

TransformResult transform_solution(const TransformInputs& in, double h, double horizon_factor,
                                   LaplaceRule rule) {
    const TimeField& u = *in.u;
    const PMEProblem& p = *in.p;
    const Grid& g = *u.grid;
    std::array<double, 2> vpow{1.0, 1.0 / p.m - 1.0};
    std::array<double, 2> upow{1.0 / p.m, 2.0 / p.m - 2.0};
    if (p.m == 1.0) {  // heat-equation validation mode: both series grow like {t, const}
        vpow = {1.0, 0.0};
        upow = {1.0, 0.0};
    }
    TransformWeights twv = make_transform_weights(u.stamps, h, horizon_factor, vpow, rule);
    TransformWeights twu = make_transform_weights(u.stamps, h, horizon_factor, upow, rule);

    TransformResult out;
    out.V = apply_transform(in.v, twv);
    out.U = apply_transform(u, twu);
    out.N = ScalarField(g, 0.0);
    for (std::size_t i = 0; i < g.num_nodes; ++i) out.N.v[i] = p.eps.v[i] / h * out.U.v[i];

    out.N_chain = ScalarField(g, 0.0);
    std::vector<double> rhs_s(g.num_nodes);
    for (std::size_t s = 1; s < twv.n; ++s) {
        double dt = u.stamps[s] - u.stamps[s - 1];
        double t = u.stamps[s];
        const auto& us = u.frames[s].v;
        const auto& up = u.frames[s - 1].v;
        for (std::size_t i = 0; i < g.num_nodes; ++i) {
            double fk = (p.f ? p.f(t, i) : 0.0) + in.floor;
            rhs_s[i] = p.eps.v[i] * (us[i] - up[i]) / dt - fk;
        }
        kernels::accumulate_scaled(twv.w[s], rhs_s.data(), out.N_chain.v.data(), g.num_nodes);
    }

    double vmax = kernels::serial::max_abs(in.v.frames[twv.n - 1].v);
    double umax = kernels::serial::max_abs(u.frames[twu.n - 1].v);
    out.truncation_v = vmax * (twv.horizon + h) * std::exp(-twv.horizon / h);
    out.truncation_u = umax * (twu.horizon + h) * std::exp(-twu.horizon / h);
    return out;
}

DNSample dn_sample_from(const DivOperator& op, const TransformResult& tr, const BoundaryField& g,
                        double h) {
    const Grid& grid = *tr.V.grid;
    DNSample s;
    s.h = h;
    s.truncation_v = tr.truncation_v;
    s.truncation_u = tr.truncation_u;
    BoundaryField trace = op.weak_trace(tr.V, tr.N_chain);
    s.lambda = BoundaryField(grid, 0.0);
    for (std::size_t b = 0; b < grid.num_boundary(); ++b) s.lambda.v[b] = trace.v[b] / (h * h);
    s.vtrace = restrict_to_boundary(tr.V);
    double gmax = kernels::serial::max_abs(g.v);
    double defect = 0.0;
    for (std::size_t b = 0; b < grid.num_boundary(); ++b)
        defect = std::max(defect, std::abs(s.vtrace.v[b] / (h * h) - g.v[b]));
    s.boundary_defect = gmax > 0.0 ? defect / gmax : defect;
    return s;
}

DNSample dn_sample(const DivOperator& op, const TransformInputs& in, const BoundaryField& g, double h,
                   double horizon_factor, LaplaceRule rule) {
    return dn_sample_from(op, transform_solution(in, h, horizon_factor, rule), g, h);
}

std::vector<DNSample> dn_samples(const DivOperator& op, const TransformInputs& in, const BoundaryField& g,
                                 const std::vector<double>& hs, double horizon_factor, LaplaceRule rule) {
    std::vector<DNSample> out;
    out.reserve(hs.size());
    for (double h : hs) out.push_back(dn_sample(op, in, g, h, horizon_factor, rule));
    return out;
}

std::vector<double> h_schedule(double h_min, double h_max, int count) {
    require(h_min > 0.0 && h_max >= h_min, "laplace: h schedule needs 0 < h_min <= h_max");
    require(count >= 1, "laplace: h schedule needs at least one value");
    std::vector<double> hs;
    if (count == 1) {
        hs.push_back(h_min);
        return hs;
    }
    double r = std::pow(h_max / h_min, 1.0 / double(count - 1));
    for (int i = 0; i < count; ++i) hs.push_back(h_min * std::pow(r, double(i)));
    hs.back() = h_max;
    return hs;
}

void write_dn_csv(const std::string& path, const std::vector<DNSample>& samples) {
    std::ofstream out(path);
    require(out.good(), "laplace: cannot open " + path + " for writing");
    if (samples.empty()) return;
    const Grid& g = *samples.front().lambda.grid;
    out << "h";
    for (int a = 0; a < g.dim; ++a) out << ",x" << (a + 1);
    out << ",lambda,vtrace\n";
    for (const DNSample& s : samples) {
        for (std::size_t b = 0; b < g.num_boundary(); ++b) {
            auto x = g.coords(g.boundary[b].node);
            out << format_double(s.h);
            for (int a = 0; a < g.dim; ++a) out << "," << format_double(x[std::size_t(a)]);
            out << "," << format_double(s.lambda.v[b]) << "," << format_double(s.vtrace.v[b]) << "\n";
        }
    }
}

}  // namespace pmelab
