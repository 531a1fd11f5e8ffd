#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "pmelab/special.hpp"

using namespace pmelab;

namespace {
// High-precision references (50-digit arithmetic, rounded to double).
constexpr double kGamma32 = 0.88622692545275801365;  // Gamma(3/2)
constexpr double kGamma43 = 0.89297951156924921122;  // Gamma(4/3)
constexpr double kGamma53 = 0.9027452929509336113;   // Gamma(5/3)

struct UpperRef {
    double a, x, value;
};
constexpr UpperRef kUpper[] = {
    {-1.0 / 3.0, 5.0, 0.00063933719433117664634},
    {-1.0 / 3.0, 40.0, 3.0076305457620026605e-20},
    {-1.0 / 3.0, 80.0, 5.1510414745778707461e-38},
    {0.0, 5.0, 0.0011482955912753257973},
    {0.0, 40.0, 1.0367732614516569722e-19},
    {0.0, 80.0, 2.2285432586884729112e-37},
    {1.0 / 3.0, 5.0, 0.0020665870848999536937},
    {1.0 / 3.0, 40.0, 3.5741216968228164019e-19},
    {1.0 / 3.0, 80.0, 9.6417109200981464725e-37},
    {0.5, 5.0, 0.0027746032604128093195},
    {0.5, 40.0, 6.6362398267956972838e-19},
    {0.5, 80.0, 2.0055028012539033333e-36},
    {1.0, 5.0, 0.0067379469990854670966},
    {1.0, 40.0, 4.2483542552915889953e-18},
    {1.0, 80.0, 1.8048513878454151723e-35},
    {1.5, 5.0, 0.016453809148952222406},
    {1.5, 40.0, 2.7200763499319512299e-17},
    {1.5, 80.0, 1.6243356710091439248e-34},
};
}  // namespace

TEST_CASE("gamma factor of the expansion matches references") {
    CHECK(gamma_one_plus(2.0) == doctest::Approx(kGamma32).epsilon(1e-12));
    CHECK(gamma_one_plus(3.0) == doctest::Approx(kGamma43).epsilon(1e-12));
    CHECK(gamma_one_plus(1.5) == doctest::Approx(kGamma53).epsilon(1e-12));
    CHECK(gamma_one_plus(1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("upper incomplete gamma matches references across the tail range") {
    for (const UpperRef& r : kUpper)
        CHECK(upper_gamma(r.a, r.x) == doctest::Approx(r.value).epsilon(1e-11));
}

TEST_CASE("exponential tail moments reduce to the incomplete gamma") {
    // integral_T^inf e^(-t/h) t^p dt = h^(p+1) Gamma(p+1, T/h)
    CHECK(exp_tail_moment(0.5, 10.0, 2.0) ==
          doctest::Approx(std::pow(2.0, 1.5) * 0.016453809148952222406).epsilon(1e-11));
    CHECK(exp_tail_moment(0.0, 10.0, 2.0) ==
          doctest::Approx(2.0 * 0.0067379469990854670966).epsilon(1e-11));
    CHECK(exp_tail_moment(-0.5, 10.0, 2.0) ==
          doctest::Approx(std::pow(2.0, 0.5) * 0.0027746032604128093195).epsilon(1e-11));
    // p = 0 has the closed form h e^(-T/h).
    CHECK(exp_tail_moment(0.0, 64.0, 1.6) ==
          doctest::Approx(1.6 * std::exp(-40.0)).epsilon(1e-11));
}

TEST_CASE("tail moments decay with the horizon and grow with h") {
    double prev = exp_tail_moment(0.5, 20.0, 4.0);
    for (double T : {40.0, 80.0, 160.0}) {
        double cur = exp_tail_moment(0.5, T, 4.0);
        CHECK(cur < prev);
        CHECK(cur > 0.0);
        prev = cur;
    }
    CHECK(exp_tail_moment(0.5, 80.0, 8.0) > exp_tail_moment(0.5, 80.0, 4.0));
}
