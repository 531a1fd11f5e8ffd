#include "pmelab/special.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pmelab {

double gamma_one_plus(double m) {
    if (!(m >= 1.0)) throw std::invalid_argument("gamma_one_plus requires m >= 1");
    return std::tgamma(1.0 + 1.0 / m);
}

double upper_gamma(double a, double x) {
    if (!(x > 0.0) || x < a + 2.0)
        throw std::invalid_argument("upper_gamma: continued fraction needs x > 0 and x >= a + 2 (got a=" +
                                    std::to_string(a) + ", x=" + std::to_string(x) + ")");
    // Lentz's method on the standard continued fraction for Gamma(a,x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 400; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) return std::exp(-x + a * std::log(x)) * h;
    }
    throw std::runtime_error("upper_gamma: continued fraction did not converge");
}

double exp_tail_moment(double p, double T, double h) {
    return std::pow(h, p + 1.0) * upper_gamma(p + 1.0, T / h);
}

}  // namespace pmelab
