#pragma once

namespace pmelab {

// Gamma(1 + 1/m) for the expansion coefficients, relative error <= 1e-10.
double gamma_one_plus(double m);

// Upper incomplete gamma Gamma(a, x) by Lentz continued fraction; intended for
// the tail integrals where x = T/h >= 4 and a in (-2, 3].
double upper_gamma(double a, double x);

// integral_T^inf e^(-t/h) t^p dt = h^(p+1) Gamma(p+1, T/h).
double exp_tail_moment(double p, double T, double h);

}  // namespace pmelab
