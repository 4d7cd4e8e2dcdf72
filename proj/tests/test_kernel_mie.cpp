#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "borscat/constants.hpp"
#include "borscat/fd_solver.hpp"
#include "borscat/mie.hpp"
#include "borscat/modal_kernel.hpp"

using namespace borscat;

namespace {

/// Brute-force oracle for the modal kernel: dense midpoint rule over
/// phi', independent of the production quadrature.
cplx modal_kernel_oracle(int m, double rho_s, double z_s, double rho_o,
                         double z_o, double k, std::size_t n = 2'000'000) {
    cplx acc{};
    const double dphi = 2.0 * pi / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = dphi * (double(i) + 0.5) - pi;
        const double dx = rho_o - rho_s * std::cos(phi);
        const double dy = -rho_s * std::sin(phi);
        const double dz = z_o - z_s;
        const double R = std::sqrt(dx * dx + dy * dy + dz * dz);
        acc += std::exp(cplx(0.0, -k * R)) / (4.0 * pi * R) *
               std::cos(double(m) * phi) * dphi;
    }
    return acc;
}

} // namespace

TEST_CASE("on-axis source ring has no m >= 1 moments") {
    for (int m : {1, 2, 5}) {
        const cplx g = modal_kernel(m, 0.0, 0.3, 0.8, 0.0, 7.0);
        CHECK(std::abs(g) < 1e-14);
    }
    CHECK(std::abs(modal_kernel(0, 0.0, 0.3, 0.8, 0.0, 7.0)) > 0.0);
}

TEST_CASE("modal kernel is symmetric under src/obs swap") {
    const double k = 4.0;
    for (int m : {0, 1, 3}) {
        const cplx a = modal_kernel(m, 0.4, 0.1, 0.9, 0.7, k);
        const cplx b = modal_kernel(m, 0.9, 0.7, 0.4, 0.1, k);
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
    }
}

TEST_CASE("static kernel of far small rings approaches 1/(2 Rbar)") {
    const double rbar = 50.0;
    const cplx g = modal_kernel(0, 0.01, 0.0, 0.01, rbar, 0.0);
    CHECK(g.real() == Catch::Approx(1.0 / (2.0 * rbar)).epsilon(1e-5));
    CHECK(std::abs(g.imag()) < 1e-12);
}

TEST_CASE("modal kernel matches the brute-force oracle") {
    struct Case { int m; double rs, zs, ro, zo, k; };
    const Case cases[] = {
        {0, 0.7, 0.0, 0.7, 0.05, 12.0},   // near-singular same-ring region
        {1, 0.5, -0.2, 1.2, 0.4, 8.0},    // separated, oscillatory
        {4, 0.9, 0.0, 0.95, 0.02, 20.0},  // high mode, close rings
        {2, 0.3, 1.0, 0.3, -1.0, 3.0},    // axial separation
    };
    for (const auto& c : cases) {
        const cplx got = modal_kernel(c.m, c.rs, c.zs, c.ro, c.zo, c.k);
        const cplx want = modal_kernel_oracle(c.m, c.rs, c.zs, c.ro, c.zo, c.k);
        REQUIRE(std::abs(got - want) <= 1e-6 * std::abs(want) + 1e-12);
    }
}

TEST_CASE("modal kernel argument validation") {
    CHECK_THROWS_AS(modal_kernel(-1, 0.5, 0.0, 0.7, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(modal_kernel(0, 0.5, 0.0, 0.7, 0.0, -1.0),
                    std::invalid_argument);
    // coincident points: singular
    CHECK_THROWS_AS(modal_kernel(0, 0.5, 0.0, 0.5, 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("Mie oracle: Rayleigh fourth-power scaling") {
    const double a = 1.0;
    const double f1 = 0.05 * c0 / (2.0 * pi * a);
    const double f2 = 0.10 * c0 / (2.0 * pi * a);
    const double ratio = mie_rcs_oracle(a, f1) / mie_rcs_oracle(a, f2);
    CHECK(ratio == Catch::Approx(1.0 / 16.0).epsilon(0.01));
}

TEST_CASE("Mie oracle: geometric-optics limit at ka = 30") {
    const double a = 1.0;
    const double f = 30.0 * c0 / (2.0 * pi * a);
    CHECK(mie_rcs_oracle(a, f) / (pi * a * a) ==
          Catch::Approx(1.0).epsilon(0.10));
}

TEST_CASE("Mie series is converged at the default truncation") {
    const double a = 1.0;
    for (double ka : {0.5, 2.0, 8.0}) {
        const double f = ka * c0 / (2.0 * pi * a);
        const double s1 = mie_rcs_oracle(a, f);
        const double s2 = mie_rcs_oracle(a, f, 2 * mie_n_max(ka));
        REQUIRE(std::abs(s1 - s2) < 1e-10 * s1);
    }
    CHECK_THROWS_AS(mie_rcs_oracle(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mie_rcs_oracle(0.0, 1e8), std::invalid_argument);
}

TEST_CASE("rcs_from_H definition and scaling") {
    CHECK(rcs_from_H(cplx(1.0, 0.0)) == Catch::Approx(4.0 * pi));
    const cplx H(0.3, -0.4);
    CHECK(rcs_from_H(2.0 * H) == Catch::Approx(4.0 * rcs_from_H(H)));
    // GO limit |H| -> a/2 <=> sigma -> pi a^2
    CHECK(rcs_from_H(cplx(0.5, 0.0)) == Catch::Approx(pi).epsilon(1e-12));
}
