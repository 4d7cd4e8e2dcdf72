#pragma once

/// FFT pulse synthesis: turns a frequency response H(f) and an incident
/// waveform spectrum W(f) into the real transient scattered field via a
/// Hermitian inverse DFT.  Grid planning ties the band to the waveform
/// spectrum and the time window to the body transit time.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "borscat/constants.hpp"
#include "borscat/excitation.hpp"
#include "borscat/fd_solver.hpp"
#include "borscat/fft.hpp"

namespace borscat {

struct FrequencyGrid {
    std::size_t N = 0;  // power of two
    double df = 0.0;    // Hz

    double f_max() const { return double(N / 2) * df; }
    double T() const { return 1.0 / df; }
    double dt_syn() const { return 1.0 / (double(N) * df); }

    /// Positive-frequency bins {df, 2df, ..., (N/2)df}.
    std::vector<double> positive_bins() const {
        std::vector<double> f(N / 2);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = df * double(i + 1);
        return f;
    }
};

/// Plan the synthesis grid for a waveform and a body of diameter D
/// meshed at h_mesh.  The band covers the waveform down to `floor_db`
/// (−60 dB default) but must stay below the mesh resolution cap
/// c/(10 h_mesh); the unbounded testing impulse takes the cap itself.
/// A positive f_max_override replaces the waveform band (used to force
/// two scenarios onto one shared, cache-identical grid).
inline FrequencyGrid plan_grid(const Waveform& w, double D, double h_mesh,
                               double floor_db = -60.0,
                               double f_max_override = 0.0) {
    if (D <= 0.0) throw std::invalid_argument("body diameter must be > 0");
    if (h_mesh <= 0.0) throw std::invalid_argument("h_mesh must be > 0");
    const double cap = c0 / (10.0 * h_mesh);
    double f_max = f_max_override > 0.0 ? f_max_override
                                        : effective_bandwidth(w, floor_db);
    if (w.kind == WaveformKind::impulse && f_max_override <= 0.0) {
        f_max = cap;
    } else if (f_max > cap) {
        throw std::invalid_argument(
            "waveform band " + std::to_string(f_max) +
            " Hz exceeds the mesh resolution cap " + std::to_string(cap) +
            " Hz; refine the mesh (h_max <= " +
            std::to_string(c0 / (10.0 * f_max)) + " m)");
    }
    const double T_min = w.t0 + w.tau + 10.0 * D / c0;
    FrequencyGrid g;
    g.df = 1.0 / T_min;
    std::size_t N = 2;
    while (double(N) * g.df < 2.0 * f_max) N *= 2;
    g.N = N;
    return g;
}

struct TransientField {
    std::vector<double> t;  // seconds
    std::vector<double> e;  // range-normalized r*E_scat, m*V/m per V/m
    double dt = 0.0;
};

struct SynthesisOptions {
    // raised-cosine spectral taper over the top 20% of the band, for
    // presentation only (rect pulses ring otherwise); default off so
    // fidelity comparisons see the honest truncation
    bool taper = false;
};

/// Inverse transform of S(f) = H(f) * W(f) with Hermitian symmetry.
/// The response must be sampled exactly on the grid's positive bins and
/// carry the library's convention tag.
inline TransientField synthesize(const FrequencyGrid& grid,
                                 const FrequencyResponse& H,
                                 const Waveform& w,
                                 const SynthesisOptions& opts = {}) {
    if (grid.N < 4 || !std::has_single_bit(grid.N))
        throw std::invalid_argument("grid N must be a power of two >= 4");
    if (H.convention != FrequencyResponse{}.convention)
        throw std::invalid_argument(
            "frequency response carries convention tag '" + H.convention +
            "'; refusing to synthesize against a mismatched convention");
    if (H.grid.size() != grid.N / 2)
        throw std::invalid_argument("response grid length does not match plan");
    for (std::size_t i = 0; i < H.grid.size(); ++i)
        if (std::abs(H.grid[i] - grid.df * double(i + 1)) >
            1e-9 * grid.df)
            throw std::invalid_argument(
                "response grid deviates from the plan's positive bins");

    const std::size_t N = grid.N;
    std::vector<cplx> S(N, cplx{});
    for (std::size_t i = 1; i <= N / 2; ++i) {
        const double f = grid.df * double(i);
        cplx v = H.values[i - 1] * waveform_spectrum(w, f);
        if (opts.taper) {
            const double edge = 0.8 * grid.f_max();
            if (f > edge)
                v *= 0.5 * (1.0 + std::cos(pi * (f - edge) /
                                           (grid.f_max() - edge)));
        }
        S[i] = v;
    }
    S[N / 2] = cplx(S[N / 2].real(), 0.0);  // real Nyquist bin
    for (std::size_t i = 1; i < N / 2; ++i) S[N - i] = std::conj(S[i]);

    fft_inplace(S, +1);  // sum S_k exp(+j 2 pi k n / N)

    double peak = 0.0, imax = 0.0;
    for (const auto& v : S) {
        peak = std::max(peak, std::abs(v.real()));
        imax = std::max(imax, std::abs(v.imag()));
    }
    if (peak > 0.0 && imax > 1e-10 * peak)
        throw std::runtime_error(
            "synthesis imaginary residue " + std::to_string(imax / peak) +
            " of peak; Hermitian symmetry is broken");

    TransientField out;
    out.dt = grid.dt_syn();
    out.t.resize(N);
    out.e.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        out.t[n] = out.dt * double(n);
        out.e[n] = S[n].real() * grid.df;  // Riemann factor of int S df
    }
    return out;
}

} // namespace borscat
