#pragma once

/// Mie-series monostatic RCS of a perfectly conducting sphere, the
/// ground-truth oracle for the integral-equation solver.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

#include "borscat/constants.hpp"

namespace borscat {

/// Series truncation order for size parameter x = ka.
inline std::size_t mie_n_max(double x) {
    // a few terms beyond the classical rule buys < 1e-10 series tails
    return static_cast<std::size_t>(std::ceil(x + 4.0 * std::cbrt(x) + 8.0));
}

/// Monostatic (backscatter) RCS of a PEC sphere of radius a at
/// frequency f, in m^2.
inline double mie_rcs_oracle(double a, double f, std::size_t n_max = 0) {
    if (f <= 0.0) throw std::invalid_argument("mie_rcs_oracle requires f > 0");
    if (a <= 0.0) throw std::invalid_argument("mie_rcs_oracle requires a > 0");
    const double k = 2.0 * pi * f / c0;
    const double x = k * a;
    if (n_max == 0) n_max = mie_n_max(x);

    cplx sum = 0.0;
    double sign = -1.0;  // (-1)^n starting at n = 1
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double jn = std::sph_bessel(unsigned(n), x);
        const double jnm1 = std::sph_bessel(unsigned(n) - 1, x);
        const double yn = std::sph_neumann(unsigned(n), x);
        const double ynm1 = std::sph_neumann(unsigned(n) - 1, x);
        // Riccati-Bessel psi = x j_n, xi = x h1_n and derivatives,
        // using f_n' = f_{n-1} - (n+1)/x f_n.
        const double psi = x * jn;
        const double psi_d = x * jnm1 - double(n) * jn;
        const cplx h1(jn, yn);
        const cplx h1m1(jnm1, ynm1);
        const cplx xi = x * h1;
        const cplx xi_d = x * h1m1 - double(n) * h1;
        const cplx an = psi / xi;
        const cplx bn = psi_d / xi_d;
        sum += sign * (2.0 * double(n) + 1.0) * (bn - an);
        sign = -sign;
    }
    const double lambda = c0 / f;
    return lambda * lambda / (4.0 * pi) * std::norm(sum);
}

} // namespace borscat
