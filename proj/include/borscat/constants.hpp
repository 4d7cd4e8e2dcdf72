#pragma once

#include <complex>

namespace borscat {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double c0 = 2.99792458e8;          // speed of light, m/s
inline constexpr double eta0 = 376.730313668;       // free-space wave impedance, ohm
inline constexpr double mu0 = eta0 / c0;            // H/m
inline constexpr double eps0 = 1.0 / (eta0 * c0);   // F/m

using cplx = std::complex<double>;
inline constexpr cplx jimag{0.0, 1.0};

} // namespace borscat
