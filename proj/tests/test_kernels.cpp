#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "pmelab/kernels.hpp"

using namespace pmelab;

namespace {
std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

// Pentadiagonal test matrix in CSR form.
kernels::Csr band_matrix(std::size_t n) {
    kernels::Csr A;
    A.n = n;
    A.row_ptr.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t o : {-2, -1, 0, 1, 2}) {
            std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + o;
            if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
            A.col.push_back(static_cast<std::size_t>(j));
            A.val.push_back(o == 0 ? 4.0 : 1.0 / double(2 + std::abs(o) + int(i % 3)));
        }
        A.row_ptr.push_back(A.col.size());
    }
    return A;
}
}  // namespace

TEST_CASE("serial and parallel kernels are bit-identical") {
    // Sizes straddle the reduction chunk so partial-sum combination is hit.
    for (std::size_t n : {33UL, 1024UL, 5000UL}) {
        std::vector<double> a = random_vec(n, 7), b = random_vec(n, 11);
        CHECK(kernels::serial::dot(a.data(), b.data(), n) == kernels::par::dot(a.data(), b.data(), n));
        CHECK(kernels::serial::max_abs(a.data(), n) == kernels::par::max_abs(a.data(), n));

        std::vector<double> y1 = b, y2 = b;
        kernels::serial::axpy(0.37, a.data(), y1.data(), n);
        kernels::par::axpy(0.37, a.data(), y2.data(), n);
        CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

        y1 = b;
        y2 = b;
        kernels::serial::xpay(a.data(), -1.7, y1.data(), n);
        kernels::par::xpay(a.data(), -1.7, y2.data(), n);
        CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

        kernels::serial::scale(a.data(), b.data(), y1.data(), n);
        kernels::par::scale(a.data(), b.data(), y2.data(), n);
        CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

        kernels::serial::power_clamped(a.data(), 0.1, 0.9, 1.7, y1.data(), n);
        kernels::par::power_clamped(a.data(), 0.1, 0.9, 1.7, y2.data(), n);
        CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

        y1 = b;
        y2 = b;
        kernels::serial::accumulate_scaled(0.211, a.data(), y1.data(), n);
        kernels::par::accumulate_scaled(0.211, a.data(), y2.data(), n);
        CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

        kernels::Csr A = band_matrix(n);
        y1.assign(n, 0.0);
        y2.assign(n, 0.0);
        kernels::serial::csr_apply(A, a.data(), y1.data());
        kernels::par::csr_apply(A, a.data(), y2.data());
        CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);
    }
}

TEST_CASE("dispatch honors the selected backend") {
    std::vector<double> a = random_vec(2048, 3), b = random_vec(2048, 5);
    kernels::Backend saved = kernels::backend();
    kernels::set_backend(kernels::Backend::serial);
    double ds = kernels::dot(a.data(), b.data(), a.size());
    kernels::set_backend(kernels::Backend::parallel);
    double dp = kernels::dot(a.data(), b.data(), a.size());
    kernels::set_backend(saved);
    CHECK(ds == dp);
}

TEST_CASE("thread count does not change reductions") {
    std::vector<double> a = random_vec(8192, 17), b = random_vec(8192, 23);
    double ref = kernels::par::dot(a.data(), b.data(), a.size());
    for (int threads : {1, 2, 3}) {
        kernels::set_threads(threads);
        CHECK(kernels::par::dot(a.data(), b.data(), a.size()) == ref);
    }
    kernels::set_threads(0);
}

TEST_CASE("power clamp saturates outside the window") {
    std::vector<double> x{0.05, 0.5, 2.0}, y(3);
    kernels::serial::power_clamped(x.data(), 0.1, 1.0, 2.0, y.data(), 3);
    CHECK(y[0] == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(y[2] == doctest::Approx(1.0).epsilon(1e-14));
}
