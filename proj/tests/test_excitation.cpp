#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "borscat/constants.hpp"
#include "borscat/excitation.hpp"

using namespace borscat;

TEST_CASE("waveform point values") {
    const double tau = 3.35e-9;
    const Waveform g = gaussian_video(tau, 3.0 * tau, 2.5);
    CHECK(waveform_value(g, g.t0) == 2.5);
    // FWHM: half amplitude at t0 +/- tau/2
    CHECK(waveform_value(g, g.t0 + tau / 2.0) ==
          Catch::Approx(1.25).epsilon(1e-12));

    const Waveform r = rect_video(tau, 0.0, 1.0);
    CHECK(waveform_value(r, tau / 2.0) == 1.0);
    CHECK(waveform_value(r, 2.0 * tau) == 0.0);

    const Waveform rr = rect_radio(tau, 2.0, 0.0, 1.0);
    // two carrier cycles: phase pi at a quarter of the duration
    CHECK(std::abs(waveform_value(rr, tau / 4.0)) < 1e-9);
    CHECK(waveform_value(rr, tau / 8.0) ==
          Catch::Approx(std::sin(pi / 2.0)).epsilon(1e-12));
}

TEST_CASE("waveform constructors validate their arguments") {
    CHECK_THROWS_AS(gaussian_video(-1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_video(1e-9, 2e-9), std::invalid_argument);
    CHECK_NOTHROW(gaussian_video(1e-9, 3e-9));
    CHECK_THROWS_AS(rect_video(0.0), std::invalid_argument);
    CHECK_THROWS_AS(rect_video(1e-9, -1e-9), std::invalid_argument);
    CHECK_THROWS_AS(rect_radio(1e-9, -1.0), std::invalid_argument);
}

TEST_CASE("rect spectrum at DC equals the pulse area") {
    const double tau = 7.5e-9;
    const Waveform r = rect_video(tau, 0.0, 3.0);
    CHECK(std::abs(waveform_spectrum(r, 0.0) - cplx(3.0 * tau, 0.0)) <
          1e-15 * tau);
}

TEST_CASE("gaussian -60 dB point: closed form and numeric value") {
    const double tau = 3.35e-9;
    const Waveform g = gaussian_video(tau, 3.0 * tau);
    const double T = g.gauss_T();
    const double f60 = std::sqrt(3.0 * std::log(10.0)) / (pi * T);
    CHECK(f60 == Catch::Approx(4.158e8).epsilon(2e-3));
    CHECK(std::abs(waveform_spectrum(g, f60)) /
              std::abs(waveform_spectrum(g, 0.0)) ==
          Catch::Approx(1e-3).epsilon(1e-9));
    CHECK(effective_bandwidth(g, -60.0) == Catch::Approx(f60).epsilon(1e-12));
}

TEST_CASE("effective_bandwidth formulas and floor contract") {
    const double tau = 2e-9;
    CHECK(effective_bandwidth(rect_video(tau), -40.0) ==
          Catch::Approx(100.0 / (pi * tau)).epsilon(1e-12));
    const Waveform rr = rect_radio(tau, 2.0);
    CHECK(effective_bandwidth(rr, -40.0) ==
          Catch::Approx(rr.carrier() + 100.0 / (pi * tau)).epsilon(1e-12));
    CHECK(std::isinf(effective_bandwidth(unit_impulse(), -60.0)));
    CHECK_THROWS_AS(effective_bandwidth(rect_video(tau), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(effective_bandwidth(rect_video(tau), 3.0),
                    std::invalid_argument);

    // the bound really is a bound for the rect family
    const double fmax = effective_bandwidth(rect_video(tau), -40.0);
    const double floor_lin = 1e-2 * std::abs(waveform_spectrum(
        rect_video(tau), 0.0));
    for (double f = fmax; f < 4.0 * fmax; f += fmax / 37.0)
        REQUIRE(std::abs(waveform_spectrum(rect_video(tau), f)) <=
                floor_lin * (1.0 + 1e-12));
}

TEST_CASE("closed-form spectra match a numeric DFT over the -60 dB band") {
    auto dft = [](const Waveform& w, double f, double t_lo, double t_hi,
                  std::size_t n) {
        cplx acc{};
        const double dt = (t_hi - t_lo) / double(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t_lo + (double(i) + 0.5) * dt;
            acc += waveform_value(w, t) *
                   std::exp(cplx(0.0, -2.0 * pi * f * t)) * dt;
        }
        return acc;
    };
    const double tau = 3.35e-9;
    const Waveform g = gaussian_video(tau, 5.0 * tau);
    const double band = effective_bandwidth(g, -60.0);
    const double w0 = std::abs(waveform_spectrum(g, 0.0));
    for (double f = 0.0; f <= band; f += band / 11.0) {
        const cplx num = dft(g, f, 0.0, 12.0 * tau, 60000);
        const cplx cls = waveform_spectrum(g, f);
        REQUIRE(std::abs(num - cls) < 1e-3 * w0);
    }
    // rect_radio with a start delay, against the same oracle
    const Waveform rr = rect_radio(tau, 2.0, 2.0 * tau);
    const double wr = std::abs(waveform_spectrum(rr, rr.carrier()));
    for (double f = 0.0; f <= 3.0 * rr.carrier(); f += rr.carrier() / 7.0) {
        const cplx num = dft(rr, f, 0.0, 4.0 * tau, 200000);
        const cplx cls = waveform_spectrum(rr, f);
        REQUIRE(std::abs(num - cls) < 1e-3 * wr);
    }
}

TEST_CASE("Parseval holds on a fine numeric grid") {
    const double tau = 2e-9;
    const Waveform g = gaussian_video(tau, 4.0 * tau);
    double et = 0.0;
    const double dt = tau / 2000.0;
    for (double t = 0.0; t < 10.0 * tau; t += dt)
        et += waveform_value(g, t) * waveform_value(g, t) * dt;
    double ef = 0.0;
    const double fb = effective_bandwidth(g, -120.0);
    const double df = fb / 50000.0;
    for (double f = df / 2.0; f < fb; f += df)
        ef += 2.0 * std::norm(waveform_spectrum(g, f)) * df;
    CHECK(ef == Catch::Approx(et).epsilon(1e-6));
}

TEST_CASE("plane-wave pulse validates geometry") {
    const Waveform g = gaussian_video(1e-9, 3e-9);
    CHECK_NOTHROW(IncidentPlaneWavePulse({0, 0, -1}, {1, 0, 0}, g));
    CHECK_THROWS_AS(IncidentPlaneWavePulse({0, 0, -2}, {1, 0, 0}, g),
                    std::invalid_argument);
    CHECK_THROWS_AS(IncidentPlaneWavePulse({0, 0, -1}, {0.5, 0, 0}, g),
                    std::invalid_argument);
    CHECK_THROWS_AS(IncidentPlaneWavePulse({0, 0, -1}, {0, 0, 1}, g),
                    std::invalid_argument);
    const IncidentPlaneWavePulse p({1, 0, 0}, {0, 0, 1}, g);
    const auto h = p.h_hat();
    CHECK(h[0] == 0.0);
    CHECK(h[1] == Catch::Approx(-1.0));
    CHECK(h[2] == 0.0);
}

TEST_CASE("rect start time shifts value and spectrum consistently") {
    const double tau = 2e-9, t0 = 5e-9;
    const Waveform r0 = rect_video(tau, 0.0);
    const Waveform rd = rect_video(tau, t0);
    CHECK(waveform_value(rd, t0 + 0.3 * tau) ==
          waveform_value(r0, 0.3 * tau));
    CHECK(waveform_value(rd, 0.3 * tau) == 0.0);
    const double f = 1.7e8;
    const cplx shift = std::exp(cplx(0.0, -2.0 * pi * f * t0));
    CHECK(std::abs(waveform_spectrum(rd, f) -
                   waveform_spectrum(r0, f) * shift) < 1e-18);
}
