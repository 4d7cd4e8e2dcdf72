#pragma once

/// Time-series observables: envelopes, diffraction-pulse events, and
/// envelope-correlation scores.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "borscat/constants.hpp"
#include "borscat/fft.hpp"
#include "borscat/synthesis.hpp"

namespace borscat {

enum class EnvelopeMode { video, radio };

/// radio: magnitude of the analytic signal (spectral Hilbert transform);
/// video: |s| smoothed by a 3-sample moving average.
inline std::vector<double> envelope(const std::vector<double>& s,
                                    EnvelopeMode mode) {
    if (s.empty()) throw std::invalid_argument("empty series");
    std::vector<double> env(s.size());
    if (mode == EnvelopeMode::video) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double a = std::abs(s[i]);
            const double l = std::abs(s[i > 0 ? i - 1 : 0]);
            const double r = std::abs(s[i + 1 < s.size() ? i + 1 : i]);
            env[i] = (l + a + r) / 3.0;
        }
        return env;
    }
    // analytic signal: zero the negative-frequency half, double the
    // positive half
    std::vector<cplx> X(s.begin(), s.end());
    fft_inplace(X, -1);
    const std::size_t n = X.size();
    for (std::size_t k = 1; k < n; ++k) {
        if (2 * k < n) X[k] *= 2.0;
        else if (2 * k > n) X[k] = 0.0;
        // Nyquist bin (2k == n) stays as is
    }
    fft_inplace(X, +1);
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(X[i]) / double(n);
    return env;
}

struct PulseEvent {
    double t_peak = 0.0;     // seconds
    double amplitude = 0.0;  // envelope peak
    double width = 0.0;      // full width at half the event's own peak, s
};

/// Local envelope maxima above rel_threshold * global max, merged
/// within min_separation (larger peak wins; earlier wins ties).
inline std::vector<PulseEvent> detect_pulses(const std::vector<double>& env,
                                             double dt,
                                             double rel_threshold = 0.1,
                                             double min_separation = 0.0) {
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
        throw std::invalid_argument("rel_threshold must lie in (0, 1)");
    if (env.empty()) throw std::invalid_argument("empty envelope");
    double gmax = 0.0;
    for (double v : env) gmax = std::max(gmax, v);
    if (gmax <= 0.0) return {};
    const double floor = rel_threshold * gmax;

    struct Cand { std::size_t i; double v; };
    std::vector<Cand> cands;
    for (std::size_t i = 1; i + 1 < env.size(); ++i)
        if (env[i] >= floor && env[i] >= env[i - 1] && env[i] > env[i + 1])
            cands.push_back({i, env[i]});

    // merge within min_separation, keeping the larger peak
    std::vector<Cand> kept;
    for (const auto& c : cands) {
        bool absorbed = false;
        for (auto& k : kept) {
            if (std::abs(double(c.i) - double(k.i)) * dt < min_separation) {
                if (c.v > k.v) k = c;  // earlier wins ties via strict >
                absorbed = true;
                break;
            }
        }
        if (!absorbed) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Cand& a, const Cand& b) { return a.i < b.i; });

    std::vector<PulseEvent> events;
    for (const auto& k : kept) {
        const double half = 0.5 * k.v;
        std::size_t lo = k.i, hi = k.i;
        while (lo > 0 && env[lo] > half) --lo;
        while (hi + 1 < env.size() && env[hi] > half) ++hi;
        // linear interpolation of the half crossings
        double tl = double(lo), th = double(hi);
        if (env[lo] <= half && env[lo + 1] > half)
            tl = double(lo) + (half - env[lo]) / (env[lo + 1] - env[lo]);
        if (env[hi] <= half && env[hi - 1] > half)
            th = double(hi) - (half - env[hi]) / (env[hi - 1] - env[hi]);
        events.push_back({double(k.i) * dt, k.v, (th - tl) * dt});
    }
    return events;
}

/// Maximum over lags of the normalized cross-correlation of two
/// envelopes, the reference slid across the window of the test signal's
/// first detected event.
inline double envelope_correlation(const std::vector<double>& ref,
                                   const std::vector<double>& test,
                                   double dt, double rel_threshold = 0.1,
                                   double min_separation = 0.0) {
    if (ref.empty() || test.empty())
        throw std::invalid_argument("empty series");
    auto energy = [](const std::vector<double>& v, std::size_t a,
                     std::size_t b) {
        double e = 0.0;
        for (std::size_t i = a; i < b; ++i) e += v[i] * v[i];
        return e;
    };
    if (energy(ref, 0, ref.size()) <= 0.0 ||
        energy(test, 0, test.size()) <= 0.0)
        throw std::invalid_argument("zero-energy input");

    // restrict to the test signal's first event window (half-width
    // extended to the threshold crossings)
    auto events = detect_pulses(test, dt, rel_threshold, min_separation);
    std::size_t w0 = 0, w1 = test.size();
    if (!events.empty()) {
        const double floor = rel_threshold * events.front().amplitude;
        std::size_t p = std::size_t(events.front().t_peak / dt + 0.5);
        std::size_t lo = p, hi = p;
        while (lo > 0 && test[lo] > floor) --lo;
        while (hi + 1 < test.size() && test[hi] > floor) ++hi;
        w0 = lo;
        w1 = hi + 1;
    }
    const std::size_t wn = w1 - w0;

    // trim the reference to its own support above 1% of its peak so the
    // lag search is meaningful
    double rmax = 0.0;
    for (double v : ref) rmax = std::max(rmax, v);
    std::size_t r0 = 0, r1 = ref.size();
    while (r0 + 1 < r1 && ref[r0] < 0.01 * rmax) ++r0;
    while (r1 > r0 + 1 && ref[r1 - 1] < 0.01 * rmax) --r1;
    const std::size_t rn = r1 - r0;

    // slide the shorter slice across the longer one; the comparison
    // length is fixed at the shorter support so tiny overlaps cannot
    // score spuriously high
    const std::size_t n = std::min(wn, rn);
    const std::size_t span = std::max(wn, rn);
    const bool window_longer = wn >= rn;
    double best = 0.0;
    for (std::size_t off = 0; off + n <= span; ++off) {
        double num = 0.0, ea = 0.0, eb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ti = w0 + (window_longer ? off + i : i);
            const std::size_t ri = r0 + (window_longer ? i : off + i);
            if (ti >= test.size() || ri >= ref.size()) break;
            const double a = test[ti];
            const double b = ref[ri];
            num += a * b;
            ea += a * a;
            eb += b * b;
        }
        if (ea > 0.0 && eb > 0.0)
            best = std::max(best, num / std::sqrt(ea * eb));
    }
    return std::clamp(best, 0.0, 1.0);
}

/// Normalized correlation of two signed waveforms after aligning their
/// energy centroids. Unlike the lag-maximizing envelope correlation,
/// the alignment is fixed: the full record is compared at the single
/// centroid-matched shift, so a response that spreads its energy over
/// several displaced replicas scores low even if one replica matches
/// the reference shape well.
inline double pulse_shape_correlation(const std::vector<double>& ref,
                                      const std::vector<double>& test) {
    if (ref.empty() || test.empty())
        throw std::invalid_argument("empty series");
    auto centroid = [](const std::vector<double>& v) {
        double n = 0.0, d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            n += double(i) * v[i] * v[i];
            d += v[i] * v[i];
        }
        if (d <= 0.0) throw std::invalid_argument("zero-energy input");
        return n / d;
    };
    const std::ptrdiff_t s =
        std::ptrdiff_t(std::lround(centroid(test) - centroid(ref)));
    double num = 0.0, ea = 0.0, eb = 0.0;
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(test.size()); ++i) {
        const double a = test[std::size_t(i)];
        const std::ptrdiff_t ri = i - s;
        const double b = (ri >= 0 && ri < std::ptrdiff_t(ref.size()))
                             ? ref[std::size_t(ri)]
                             : 0.0;
        num += a * b;
        ea += a * a;
        eb += b * b;
    }
    if (!(ea > 0.0) || !(eb > 0.0)) return 0.0;
    return std::min(std::abs(num) / std::sqrt(ea * eb), 1.0);
}

/// Linear resampling of a (finer) series onto the time points of a
/// coarser grid; points outside the source span clamp to zero.
inline std::vector<double> resample_linear(const std::vector<double>& t_src,
                                           const std::vector<double>& v_src,
                                           const std::vector<double>& t_dst) {
    if (t_src.size() != v_src.size() || t_src.size() < 2)
        throw std::invalid_argument("bad source series");
    std::vector<double> out(t_dst.size(), 0.0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < t_dst.size(); ++i) {
        const double t = t_dst[i];
        if (t < t_src.front() || t > t_src.back()) continue;
        while (j + 2 < t_src.size() && t_src[j + 1] < t) ++j;
        while (j > 0 && t_src[j] > t) --j;
        const double span = t_src[j + 1] - t_src[j];
        const double f = span > 0 ? (t - t_src[j]) / span : 0.0;
        out[i] = v_src[j] + f * (v_src[j + 1] - v_src[j]);
    }
    return out;
}

/// Normalized RMS deviation of two series on a common grid, scaled by
/// the reference peak.
inline double nrms_deviation(const std::vector<double>& ref,
                             const std::vector<double>& test) {
    if (ref.size() != test.size() || ref.empty())
        throw std::invalid_argument("series size mismatch");
    double peak = 0.0, acc = 0.0;
    for (double v : ref) peak = std::max(peak, std::abs(v));
    if (peak <= 0.0) throw std::invalid_argument("zero reference");
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = ref[i] - test[i];
        acc += d * d;
    }
    return std::sqrt(acc / double(ref.size())) / peak;
}

} // namespace borscat
