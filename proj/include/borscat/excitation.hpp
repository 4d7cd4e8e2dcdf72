#pragma once

/// Incident plane-wave pulses: Gaussian video, rectangular video, and
/// rectangular radio waveforms with exact time-domain values and
/// closed-form spectra.
///
/// Spectrum convention: W(f) = integral of w(t) exp(-j 2 pi f t) dt; the
/// time factor exp(+j 2 pi f t) is suppressed everywhere.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "borscat/constants.hpp"

namespace borscat {

enum class WaveformKind { gaussian_video, rect_video, rect_radio, impulse };

struct Waveform {
    WaveformKind kind = WaveformKind::gaussian_video;
    double tau = 0.0;       // gaussian: FWHM; rect: duration (s)
    double t0 = 0.0;        // gaussian peak time; rect variants: start time (s)
    double n_cycles = 0.0;  // rect_radio: carrier cycles f_c * tau
    double E0 = 1.0;        // amplitude, V/m

    /// Gaussian 1/e width parameter T such that tau is the FWHM.
    double gauss_T() const { return tau / (2.0 * std::sqrt(std::log(2.0))); }
    double carrier() const { return n_cycles / tau; }
};

inline Waveform gaussian_video(double tau, double t0, double E0 = 1.0) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
    if (t0 < 3.0 * tau * (1.0 - 1e-12))
        throw std::invalid_argument("gaussian t0 must be >= 3*tau so the "
                                    "truncated pre-history is negligible");
    return Waveform{WaveformKind::gaussian_video, tau, t0, 0.0, E0};
}

inline Waveform rect_video(double tau, double t0 = 0.0, double E0 = 1.0) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
    if (t0 < 0.0) throw std::invalid_argument("t0 must be >= 0");
    return Waveform{WaveformKind::rect_video, tau, t0, 0.0, E0};
}

inline Waveform rect_radio(double tau, double n_cycles, double t0 = 0.0,
                           double E0 = 1.0) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
    if (n_cycles < 0.0) throw std::invalid_argument("n_cycles must be >= 0");
    if (t0 < 0.0) throw std::invalid_argument("t0 must be >= 0");
    return Waveform{WaveformKind::rect_radio, tau, t0, n_cycles, E0};
}

/// Unit impulse, testing only: flat unit spectrum, unbounded bandwidth.
inline Waveform unit_impulse() {
    return Waveform{WaveformKind::impulse, 1.0, 0.0, 0.0, 1.0};
}

inline double waveform_value(const Waveform& w, double t) {
    switch (w.kind) {
        case WaveformKind::gaussian_video: {
            const double x = (t - w.t0) / w.gauss_T();
            return w.E0 * std::exp(-x * x);
        }
        case WaveformKind::rect_video:
            return (t >= w.t0 && t <= w.t0 + w.tau) ? w.E0 : 0.0;
        case WaveformKind::rect_radio:
            return (t >= w.t0 && t <= w.t0 + w.tau)
                ? w.E0 * std::sin(2.0 * pi * w.carrier() * (t - w.t0))
                : 0.0;
        case WaveformKind::impulse:
            return 0.0;  // distributional; defined via its spectrum
    }
    return 0.0;
}

/// Rectangular edges ramped linearly over `ramp` seconds (time-domain
/// backend only; the frequency-domain path uses the exact waveform).
inline double waveform_value_ramped(const Waveform& w, double t, double ramp) {
    if (ramp <= 0.0) return waveform_value(w, t);
    if (w.kind != WaveformKind::rect_video && w.kind != WaveformKind::rect_radio)
        return waveform_value(w, t);
    const double u = t - w.t0;
    if (u < 0.0 || u > w.tau + ramp) return 0.0;
    double env = 1.0;
    if (u < ramp) env = u / ramp;
    else if (u > w.tau) env = 1.0 - (u - w.tau) / ramp;
    const double carrier = (w.kind == WaveformKind::rect_radio)
        ? std::sin(2.0 * pi * w.carrier() * u) : 1.0;
    return w.E0 * env * carrier;
}

inline cplx waveform_spectrum(const Waveform& w, double f) {
    switch (w.kind) {
        case WaveformKind::gaussian_video: {
            const double T = w.gauss_T();
            const double x = pi * f * T;
            return w.E0 * T * std::sqrt(pi) * std::exp(-x * x) *
                   std::exp(cplx(0.0, -2.0 * pi * f * w.t0));
        }
        case WaveformKind::rect_video: {
            const double x = pi * f * w.tau;
            const double s = (std::abs(x) < 1e-8)
                ? 1.0 - x * x / 6.0
                : std::sin(x) / x;
            return w.E0 * w.tau * s * std::exp(cplx(0.0, -x)) *
                   std::exp(cplx(0.0, -2.0 * pi * f * w.t0));
        }
        case WaveformKind::rect_radio: {
            // modulation shifts the zero-start rect spectrum; the start
            // delay factors out in front
            Waveform base = w;
            base.kind = WaveformKind::rect_video;
            base.t0 = 0.0;
            const double fc = w.carrier();
            return (waveform_spectrum(base, f - fc) -
                    waveform_spectrum(base, f + fc)) / cplx(0.0, 2.0) *
                   std::exp(cplx(0.0, -2.0 * pi * f * w.t0));
        }
        case WaveformKind::impulse:
            return cplx(w.E0, 0.0);
    }
    return {};
}

/// Smallest f_max such that |W(f)| <= 10^(floor_db/20) * max|W| for all
/// f > f_max.  Exact inversion for the Gaussian; the 1/(pi f tau)
/// envelope bound for the rectangular variants (shifted by the carrier
/// for rect_radio).  Infinity for the testing impulse.
inline double effective_bandwidth(const Waveform& w, double floor_db) {
    if (floor_db >= 0.0) throw std::invalid_argument("floor_db must be < 0");
    const double floor_lin = std::pow(10.0, floor_db / 20.0);
    switch (w.kind) {
        case WaveformKind::gaussian_video:
            return std::sqrt(-std::log(floor_lin)) / (pi * w.gauss_T());
        case WaveformKind::rect_video:
            return 1.0 / (pi * w.tau * floor_lin);
        case WaveformKind::rect_radio:
            return w.carrier() + 1.0 / (pi * w.tau * floor_lin);
        case WaveformKind::impulse:
            return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

struct IncidentPlaneWavePulse {
    std::array<double, 3> k_hat{0, 0, -1};  // unit propagation direction
    std::array<double, 3> e_hat{1, 0, 0};   // unit polarization
    Waveform waveform;

    IncidentPlaneWavePulse() = default;
    IncidentPlaneWavePulse(std::array<double, 3> k, std::array<double, 3> e,
                           Waveform w)
        : k_hat(k), e_hat(e), waveform(w) {
        auto norm = [](const std::array<double, 3>& v) {
            return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        };
        if (std::abs(norm(k_hat) - 1.0) > 1e-12 ||
            std::abs(norm(e_hat) - 1.0) > 1e-12)
            throw std::invalid_argument("k_hat and e_hat must be unit vectors");
        const double dot = k_hat[0] * e_hat[0] + k_hat[1] * e_hat[1] +
                           k_hat[2] * e_hat[2];
        if (std::abs(dot) > 1e-12)
            throw std::invalid_argument("polarization must be orthogonal to "
                                        "the propagation direction");
    }

    std::array<double, 3> h_hat() const {
        // H = (k x e)/eta0 * E
        return {k_hat[1] * e_hat[2] - k_hat[2] * e_hat[1],
                k_hat[2] * e_hat[0] - k_hat[0] * e_hat[2],
                k_hat[0] * e_hat[1] - k_hat[1] * e_hat[0]};
    }

    /// Time-domain incident E at a point (ramped variant for the
    /// marching backend).
    std::array<double, 3> e_field(const std::array<double, 3>& r, double t,
                                  double ramp = 0.0) const {
        const double tr = t - (k_hat[0] * r[0] + k_hat[1] * r[1] +
                               k_hat[2] * r[2]) / c0;
        const double v = waveform_value_ramped(waveform, tr, ramp);
        return {e_hat[0] * v, e_hat[1] * v, e_hat[2] * v};
    }

    std::array<double, 3> h_field(const std::array<double, 3>& r, double t,
                                  double ramp = 0.0) const {
        const double tr = t - (k_hat[0] * r[0] + k_hat[1] * r[1] +
                               k_hat[2] * r[2]) / c0;
        const double v = waveform_value_ramped(waveform, tr, ramp) / eta0;
        const auto h = h_hat();
        return {h[0] * v, h[1] * v, h[2] * v};
    }
};

} // namespace borscat
