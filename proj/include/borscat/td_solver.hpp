#pragma once

/// Explicit marching-on-in-time solution of the time-domain
/// magnetic-field integral equation on the revolved patch mesh:
///
///   J(r,t) = 2 n x H_inc(r,t)
///          + (1/2pi) n x int_S [ (1/(cR)) dJ/dt' + J/R^2 ]_{t'=t-R/c} x Rhat dS'
///
/// (principal value, self patch excluded; the 1/2 jump residue is
/// absorbed into the 2 n x H_inc form).  Each step depends only on
/// strictly earlier history, so the march is explicit and self-starting.
/// Bare perfectly conducting closed bodies only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "borscat/constants.hpp"
#include "borscat/excitation.hpp"
#include "borscat/geometry.hpp"

namespace borscat {

struct MOTConfig {
    double dt = 0.0;        // seconds
    double end_time = 0.0;  // seconds
    int smooth_every = 10;  // three-point time average period; 0 = off
    bool ramp_rect_edges = true;  // linear 2*dt edge ramp for rect pulses
};

/// Retarded pair interactions.  For each ordered pair (p, q != p) the
/// 3-D kernel n_p x (V x Rhat), V = w1*dJ/dt + w2*J, contracts to a 2x4
/// real map from (Jt, Jphi, dJt, dJphi) at q onto (Jt, Jphi) at p;
/// the delay R/c is split into whole steps plus a linear-interpolation
/// fraction.
struct InteractionTable {
    // Smoothing half-widths of the shared binomially filtered history
    // copies the retarded fetch reads from (see run_mot)
    static constexpr std::array<int, 10> levels{1, 2, 3,  5,  7,
                                                10, 15, 21, 30, 42};
    struct Entry {
        std::int32_t steps;  // integer delay, >= 1
        float frac;          // fractional delay in units of dt, [0,1)
        std::int32_t level;  // index into `levels`
        float m[8];          // row-major 2x4 coupling matrix
    };
    std::vector<Entry> entries;  // p-major: entries[p*(P-1) ... ]
    std::size_t n_patches = 0;
    std::size_t max_steps = 0;
    int half_width = 1;  // target smoothing half-width (largest used)
    double dt = 0.0;
};

inline InteractionTable build_tables(const PatchMesh& mesh, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    const std::size_t P = mesh.patches.size();
    if (P < 2) throw std::invalid_argument("mesh needs at least 2 patches");

    // explicitness bound: c*dt <= 0.8 * min centroid spacing (with a
    // relative slack so dt computed exactly at the bound is accepted
    // regardless of rounding order)
    const double spacing = mesh.min_centroid_spacing();
    if (c0 * dt > 0.8 * spacing * (1.0 + 1e-9)) {
        // name a violating pair for the error message
        std::size_t bp = 0, bq = 1;
        double best = 1e300;
        for (std::size_t s = 0; s < mesh.n_segments; ++s)
            for (std::size_t j = 0; j < mesh.n_phi; ++j) {
                const std::size_t p = s * mesh.n_phi + j;
                const std::size_t q = s * mesh.n_phi + (j + 1) % mesh.n_phi;
                auto d3 = [&](std::size_t x, std::size_t y) {
                    double acc = 0;
                    for (int i = 0; i < 3; ++i) {
                        const double d = mesh.patches[x].centroid[i] -
                                         mesh.patches[y].centroid[i];
                        acc += d * d;
                    }
                    return std::sqrt(acc);
                };
                if (d3(p, q) < best) { best = d3(p, q); bp = p; bq = q; }
                if (s + 1 < mesh.n_segments) {
                    const std::size_t r = (s + 1) * mesh.n_phi + j;
                    if (d3(p, r) < best) { best = d3(p, r); bp = p; bq = r; }
                }
            }
        throw std::invalid_argument(
            "c*dt = " + std::to_string(c0 * dt) +
            " m exceeds 0.8x the minimum centroid spacing " +
            std::to_string(spacing) + " m (patch pair " + std::to_string(bp) +
            ", " + std::to_string(bq) + "); reduce dt");
    }

    // per-patch generatrix data, reconstructed for near-field source
    // subdivision (the patch is a rho-linear strip of revolution)
    struct StripGeo {
        double rho_m, z_m, t_rho, t_z, len, phi, dphi;
    };
    const double dphi = 2.0 * pi / double(mesh.n_phi);
    std::vector<StripGeo> geo(P);
    for (std::size_t q = 0; q < P; ++q) {
        const Patch& s = mesh.patches[q];
        StripGeo g;
        g.phi = dphi * (double(s.iphi) + 0.5);
        g.dphi = dphi;
        g.rho_m = std::hypot(s.centroid[0], s.centroid[1]);
        g.z_m = s.centroid[2];
        const double cp = std::cos(g.phi), sp = std::sin(g.phi);
        g.t_rho = s.tangent_t[0] * cp + s.tangent_t[1] * sp;
        g.t_z = s.tangent_t[2];
        g.len = s.area / (g.rho_m * dphi);
        geo[q] = g;
    }

    auto dot3 = [](const std::array<double, 3>& a,
                   const std::array<double, 3>& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };

    InteractionTable tab;
    tab.n_patches = P;
    tab.dt = dt;
    // Target fetch-smoothing half-width.  The spurious oscillations an
    // explicit MFIE march grows sit at the largest unresolvable scale,
    // the patch-extent transit T = ext_max/(c dt) steps; a binomial
    // kernel of half-width kw damps period-T content by cos(pi/T)^(2kw),
    // so kw must scale with T^2 for mesh-independent damping.  Physical
    // content lives at periods >= 10 patches worth of transit and is
    // barely touched.
    double ext_max = 0.0;
    for (std::size_t q = 0; q < P; ++q)
        ext_max = std::max(ext_max,
                           std::max(geo[q].len, geo[q].rho_m * geo[q].dphi));
    const double T = ext_max / (c0 * dt);
    // A second floor keyed to the neighbour-spacing transit r covers
    // meshes whose patches are small but tightly packed (spurious
    // content at the neighbour-hop period rather than the extent
    // transit).
    const double r = spacing / (c0 * dt);
    const double target = std::max(0.09 * T * T, 1.28 * r * r);
    tab.half_width =
        std::clamp(int(std::lround(target)), 1,
                   InteractionTable::levels[InteractionTable::levels.size() -
                                            1]);
    const int kw = tab.half_width;
    tab.entries.resize(P * (P - 1));
    for (std::size_t p = 0; p < P; ++p) {
        const Patch& obs = mesh.patches[p];
        std::size_t idx = p * (P - 1);
        for (std::size_t q = 0; q < P; ++q) {
            if (q == p) continue;
            const Patch& src = mesh.patches[q];
            std::array<double, 3> Rv;
            double R2 = 0.0;
            for (int i = 0; i < 3; ++i) {
                Rv[i] = obs.centroid[i] - src.centroid[i];
                R2 += Rv[i] * Rv[i];
            }
            const double Rc = std::sqrt(R2);

            // subdivide the source strip when the centroid separation
            // does not dominate the source extent: a single-point rule
            // badly overestimates near couplings of elongated patches
            // (and that overestimate destabilizes the march)
            const StripGeo& g = geo[q];
            const double ext_l = g.len;
            const double ext_p = g.rho_m * g.dphi;
            const double d_src = std::max(ext_l, ext_p);
            std::size_t na = 1, nb = 1;
            if (Rc < 2.0 * d_src) {
                na = std::clamp<std::size_t>(
                    std::size_t(std::ceil(4.0 * ext_l / Rc)), 1, 8);
                nb = std::clamp<std::size_t>(
                    std::size_t(std::ceil(4.0 * ext_p / Rc)), 1, 8);
            }

            double m[8] = {0, 0, 0, 0, 0, 0, 0, 0};
            double Rbar = 0.0, Abar = 0.0;
            for (std::size_t ia = 0; ia < na; ++ia) {
                const double a = (double(ia) + 0.5) / double(na) - 0.5;
                const double rho_s = g.rho_m + a * g.len * g.t_rho;
                const double z_s = g.z_m + a * g.len * g.t_z;
                for (std::size_t ib = 0; ib < nb; ++ib) {
                    const double b =
                        (double(ib) + 0.5) / double(nb) - 0.5;
                    const double ph = g.phi + b * g.dphi;
                    const double cp = std::cos(ph), sp = std::sin(ph);
                    const std::array<double, 3> rs{rho_s * cp, rho_s * sp,
                                                   z_s};
                    std::array<double, 3> Rs;
                    double Rs2 = 0.0;
                    for (int i = 0; i < 3; ++i) {
                        Rs[i] = obs.centroid[i] - rs[i];
                        Rs2 += Rs[i] * Rs[i];
                    }
                    const double R = std::sqrt(Rs2);
                    const double dA = rho_s * (g.len / double(na)) *
                                      (g.dphi / double(nb));
                    Rbar += dA * R;
                    Abar += dA;
                    const std::array<double, 3> Rh{Rs[0] / R, Rs[1] / R,
                                                   Rs[2] / R};
                    const double w1 = dA / (2.0 * pi * c0 * R);
                    const double w2 = dA / (2.0 * pi * Rs2);
                    const double nRh = dot3(obs.normal, Rh);
                    // source tangents rotate with the sub-azimuth
                    const std::array<double, 3> ut{g.t_rho * cp,
                                                   g.t_rho * sp, g.t_z};
                    const std::array<double, 3> up{-sp, cp, 0.0};
                    for (int su = 0; su < 2; ++su) {
                        const auto& u = su == 0 ? ut : up;
                        const double nu = dot3(obs.normal, u);
                        const std::array<double, 3> K{
                            u[0] * nRh - Rh[0] * nu,
                            u[1] * nRh - Rh[1] * nu,
                            u[2] * nRh - Rh[2] * nu};
                        const double kt = dot3(obs.tangent_t, K);
                        const double kp = dot3(obs.tangent_phi, K);
                        m[0 * 4 + su] += kt * w2;
                        m[1 * 4 + su] += kp * w2;
                        m[0 * 4 + 2 + su] += kt * w1;
                        m[1 * 4 + 2 + su] += kp * w1;
                    }
                }
            }
            // Single retardation per pair: area-weighted mean distance
            // (sub-dt spread is unresolvable).  The smoothing width per
            // pair is the largest level not exceeding both the target
            // and delay-1, so short-delay couplings -- whose feedback
            // loops pass the filter many times per oscillation period
            // anyway -- keep accurate timing, while long-delay
            // couplings, whose loops filter only once per long transit,
            // get the full width.
            const double delay = Rbar / (Abar * c0 * dt);
            InteractionTable::Entry e;
            const std::int32_t sraw = std::int32_t(delay);
            // Sub-patch-distance (sliver) couplings tolerate -- and for
            // stability need -- smoothing wider than their delay, up to
            // ~3x (their timing error stays below the patch transit);
            // longer couplings must keep their arrival time, so their
            // width is capped by delay-1.
            const int whard = sraw <= 4 ? std::max(3 * int(sraw), 1)
                                        : int(sraw) - 1;
            const int wt = std::min(kw, whard);
            e.level = 0;
            for (std::size_t li = 0; li < InteractionTable::levels.size();
                 ++li) {
                const int w = InteractionTable::levels[li];
                if (w > whard) break;
                if (std::abs(w - wt) <=
                    std::abs(InteractionTable::levels[std::size_t(e.level)] -
                             wt))
                    e.level = std::int32_t(li);
            }
            const int w_e = InteractionTable::levels[std::size_t(e.level)];
            e.steps = std::max(sraw, std::int32_t(w_e) + 1);
            e.frac = float(std::max(delay - double(e.steps), 0.0));
            for (int i = 0; i < 8; ++i) e.m[i] = float(m[i]);
            tab.max_steps = std::max(tab.max_steps, std::size_t(e.steps) + 3);
            tab.entries[idx++] = e;
        }
    }
    return tab;
}

/// Incident waveforms are gated to exact zero before their causal start
/// so that discrete causality holds bit-exactly (the Gaussian tail cut
/// at t0 - 3*tau is below 2e-11 of peak).
inline double waveform_start_time(const Waveform& w) {
    switch (w.kind) {
        case WaveformKind::gaussian_video: return w.t0 - 3.0 * w.tau;
        default: return w.t0;  // rect variants start at t0 exactly
    }
}

struct SurfaceCurrentRecord {
    std::vector<double> t;    // seconds
    std::vector<double> J_l;  // t-hat (longitudinal) component, A/m
    std::vector<double> J_t;  // phi-hat (transverse) component, A/m
    std::size_t patch = 0;    // snapped patch index
    double snap_distance = 0.0;
};

struct ProbeSpec {
    double rho = 0, z = 0, phi = 0;
};

/// Full current history of a march (patch-major per step), retained for
/// far-field extraction.
struct CurrentHistory {
    std::vector<double> J;     // [step][patch][2]
    std::vector<double> Jdot;  // same layout, backward differences
    std::size_t n_patches = 0;
    std::size_t n_steps = 0;
    double dt = 0.0;

    double at(std::size_t step, std::size_t patch, int comp) const {
        return J[(step * n_patches + patch) * 2 + std::size_t(comp)];
    }
};

struct MOTResult {
    CurrentHistory history;
    std::vector<SurfaceCurrentRecord> probes;
};

inline MOTResult run_mot(const PatchMesh& mesh, const InteractionTable& tab,
                         const IncidentPlaneWavePulse& pulse,
                         const MOTConfig& cfg,
                         const std::vector<ProbeSpec>& probes = {}) {
    const std::size_t P = mesh.patches.size();
    if (tab.n_patches != P || tab.dt != cfg.dt)
        throw std::invalid_argument("interaction table does not match mesh/dt");
    if (cfg.end_time <= 0.0) throw std::invalid_argument("end_time must be > 0");
    const std::size_t n_steps = std::size_t(cfg.end_time / cfg.dt) + 1;

    const double ramp = cfg.ramp_rect_edges ? 2.0 * cfg.dt : 0.0;
    const double t_start = waveform_start_time(pulse.waveform);

    MOTResult res;
    CurrentHistory& h = res.history;
    h.n_patches = P;
    h.n_steps = n_steps;
    h.dt = cfg.dt;
    h.J.assign(n_steps * P * 2, 0.0);
    h.Jdot.assign(n_steps * P * 2, 0.0);

    // snap probes
    std::vector<std::size_t> probe_patch(probes.size());
    res.probes.resize(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double cp = std::cos(probes[i].phi), sp = std::sin(probes[i].phi);
        const std::array<double, 3> r{probes[i].rho * cp, probes[i].rho * sp,
                                      probes[i].z};
        double best = 1e300;
        std::size_t bp = 0;
        for (std::size_t p = 0; p < P; ++p) {
            double d2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double d = r[c] - mesh.patches[p].centroid[c];
                d2 += d * d;
            }
            if (d2 < best) { best = d2; bp = p; }
        }
        probe_patch[i] = bp;
        res.probes[i].patch = bp;
        res.probes[i].snap_distance = std::sqrt(best);
    }

    const auto hh = pulse.h_hat();
    // Incident wavefront arrival per patch.  The exact solution is
    // identically zero before it (every scattered path is longer than
    // the direct incident path), so values the surface-space filter
    // smears across the front are re-gated to exact zeros.
    std::vector<double> arrival(P);
    for (std::size_t p = 0; p < P; ++p) {
        const Patch& pa = mesh.patches[p];
        arrival[p] = t_start + (pulse.k_hat[0] * pa.centroid[0] +
                                pulse.k_hat[1] * pa.centroid[1] +
                                pulse.k_hat[2] * pa.centroid[2]) / c0;
    }
    std::vector<double> scratch(P * 2);

    // Shared binomially smoothed history copies, one per fetch level.
    // S_l[m] = sum_i C(2w,i)/4^w J[m-w+i] (w = levels[l]), computable
    // once step m+w is written; retarded reads of delay s use the
    // widest level with w < s, so every feedback path is low-pass
    // filtered once per loop transit.  Only the delay span is kept
    // (ring buffers).
    constexpr auto LV = InteractionTable::levels;
    const int w_max = LV[LV.size() - 1];
    const std::size_t ring_len = tab.max_steps + std::size_t(2 * w_max) + 8;
    std::vector<std::vector<double>> rings(
        LV.size(), std::vector<double>(ring_len * P * 2, 0.0));
    std::array<std::vector<double>, LV.size()> binom;
    for (std::size_t li = 0; li < LV.size(); ++li) {
        const int w = LV[li];
        std::vector<double> b{1.0};
        for (int i = 0; i < 2 * w; ++i) {
            std::vector<double> nb(b.size() + 1, 0.0);
            for (std::size_t k = 0; k < b.size(); ++k) {
                nb[k] += 0.5 * b[k];
                nb[k + 1] += 0.5 * b[k];
            }
            b.swap(nb);
        }
        binom[li] = std::move(b);
    }
    auto fill_ring = [&](std::size_t li, std::size_t m) {
        const int w = LV[li];
        double* dst = &rings[li][(m % ring_len) * P * 2];
        std::fill(dst, dst + P * 2, 0.0);
        for (int i = 0; i <= 2 * w; ++i) {
            const std::ptrdiff_t src = std::ptrdiff_t(m) - w + i;
            if (src < 0) continue;  // history is zero before the start
            const double bw = binom[li][std::size_t(i)];
            const double* J = &h.J[std::size_t(src) * P * 2];
            for (std::size_t k = 0; k < P * 2; ++k) dst[k] += bw * J[k];
        }
    };

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = cfg.dt * double(n);
        double* Jn = &h.J[n * P * 2];
        double* Dn = &h.Jdot[n * P * 2];
        for (std::size_t p = 0; p < P; ++p) {
            const Patch& pa = mesh.patches[p];
            // incident drive 2 n x H_inc, gated to its causal start
            const double tr = t - (pulse.k_hat[0] * pa.centroid[0] +
                                   pulse.k_hat[1] * pa.centroid[1] +
                                   pulse.k_hat[2] * pa.centroid[2]) / c0;
            double jt = 0.0, jp = 0.0;
            if (tr >= t_start) {
                const double hv =
                    waveform_value_ramped(pulse.waveform, tr, ramp) / eta0;
                if (hv != 0.0) {
                    const std::array<double, 3> H{hh[0] * hv, hh[1] * hv,
                                                  hh[2] * hv};
                    const std::array<double, 3> nxH{
                        pa.normal[1] * H[2] - pa.normal[2] * H[1],
                        pa.normal[2] * H[0] - pa.normal[0] * H[2],
                        pa.normal[0] * H[1] - pa.normal[1] * H[0]};
                    jt = 2.0 * (pa.tangent_t[0] * nxH[0] +
                                pa.tangent_t[1] * nxH[1] +
                                pa.tangent_t[2] * nxH[2]);
                    jp = 2.0 * (pa.tangent_phi[0] * nxH[0] +
                                pa.tangent_phi[1] * nxH[1] +
                                pa.tangent_phi[2] * nxH[2]);
                }
            }
            // Retarded scattering sum over strictly earlier history,
            // read from the smoothed copy at the entry's level; the
            // time derivative is the blended backward difference of
            // the same smoothed samples.
            const InteractionTable::Entry* ent = &tab.entries[p * (P - 1)];
            for (std::size_t q = 0; q < P; ++q) {
                if (q == p) continue;
                const auto& e = *ent++;
                const std::size_t s = std::size_t(e.steps);
                if (n < s + 2) continue;  // retarded time before start
                const double f = double(e.frac);
                const std::size_t m0 = n - s;
                const std::vector<double>& S = rings[std::size_t(e.level)];
                const double* A = &S[((m0 % ring_len) * P + q) * 2];
                const double* B = &S[(((m0 - 1) % ring_len) * P + q) * 2];
                const double* C = &S[(((m0 - 2) % ring_len) * P + q) * 2];
                const double jt_r = A[0] + f * (B[0] - A[0]);
                const double jp_r = A[1] + f * (B[1] - A[1]);
                const double dt_r =
                    ((1.0 - f) * (A[0] - B[0]) + f * (B[0] - C[0])) / cfg.dt;
                const double dp_r =
                    ((1.0 - f) * (A[1] - B[1]) + f * (B[1] - C[1])) / cfg.dt;
                jt += e.m[0] * jt_r + e.m[1] * jp_r + e.m[2] * dt_r +
                      e.m[3] * dp_r;
                jp += e.m[4] * jt_r + e.m[5] * jp_r + e.m[6] * dt_r +
                      e.m[7] * dp_r;
            }
            Jn[p * 2] = jt;
            Jn[p * 2 + 1] = jp;
        }
        // Spatial regularization of the freshly written step: [1 6 1]/8
        // along each ring (cyclic in phi) and along the generatrix
        // (interior rings).  Applied at write time it sits in every
        // feedback path, so patch-alternating patterns -- which no
        // resolved current on a lambda/10 mesh can contain -- lose half
        // their amplitude per step, while content spanning many patches
        // is attenuated by O((pi*h/lambda)^2/4) per scattering order.
        {
            const std::size_t S = mesh.n_segments, F = mesh.n_phi;
            std::copy(Jn, Jn + P * 2, scratch.begin());
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t j = 0; j < F; ++j) {
                    const std::size_t p0 = s * F + j;
                    const std::size_t pm = s * F + (j + F - 1) % F;
                    const std::size_t pp = s * F + (j + 1) % F;
                    for (int k = 0; k < 2; ++k)
                        Jn[p0 * 2 + k] = 0.125 * (scratch[pm * 2 + k] +
                                                  6.0 * scratch[p0 * 2 + k] +
                                                  scratch[pp * 2 + k]);
                }
            std::copy(Jn, Jn + P * 2, scratch.begin());
            for (std::size_t s = 1; s + 1 < S; ++s)
                for (std::size_t j = 0; j < F; ++j) {
                    const std::size_t p0 = s * F + j;
                    const std::size_t pm = (s - 1) * F + j;
                    const std::size_t pp = (s + 1) * F + j;
                    for (int k = 0; k < 2; ++k)
                        Jn[p0 * 2 + k] = 0.125 * (scratch[pm * 2 + k] +
                                                  6.0 * scratch[p0 * 2 + k] +
                                                  scratch[pp * 2 + k]);
                }
        }
        for (std::size_t p = 0; p < P; ++p)
            if (t < arrival[p]) Jn[p * 2] = Jn[p * 2 + 1] = 0.0;
        for (std::size_t li = 0; li < LV.size(); ++li)
            if (n >= std::size_t(LV[li]))
                fill_ring(li, n - std::size_t(LV[li]));
        if (n > 0) {
            const double* Jm = &h.J[(n - 1) * P * 2];
            for (std::size_t i = 0; i < P * 2; ++i)
                Dn[i] = (Jn[i] - Jm[i]) / cfg.dt;
        }
        // divergence detector
        double mx = 0.0;
        for (std::size_t i = 0; i < P * 2; ++i) {
            const double v = std::abs(Jn[i]);
            if (!std::isfinite(v))
                throw std::runtime_error("marching diverged (non-finite "
                                         "current) at step " +
                                         std::to_string(n));
            mx = std::max(mx, v);
        }
        if (mx > 1e9 * (pulse.waveform.E0 / eta0))
            throw std::runtime_error("marching diverged at step " +
                                     std::to_string(n));
        // periodic three-point time averaging of the previous step
        if (cfg.smooth_every > 0 && n >= 2 &&
            n % std::size_t(cfg.smooth_every) == 0) {
            double* a = &h.J[(n - 2) * P * 2];
            double* b = &h.J[(n - 1) * P * 2];
            double* c = &h.J[n * P * 2];
            const double tm = cfg.dt * double(n - 1);
            for (std::size_t p = 0; p < P; ++p)
                if (tm >= arrival[p])
                    for (int k = 0; k < 2; ++k)
                        b[p * 2 + k] = 0.25 * (a[p * 2 + k] +
                                               2.0 * b[p * 2 + k] +
                                               c[p * 2 + k]);
            // refresh the affected backward differences
            double* Dm = &h.Jdot[(n - 1) * P * 2];
            for (std::size_t i = 0; i < P * 2; ++i) {
                Dm[i] = (b[i] - a[i]) / cfg.dt;
                Dn[i] = (c[i] - b[i]) / cfg.dt;
            }
            // refresh smoothed-copy entries whose windows reach n - 1
            for (std::size_t li = 0; li < LV.size(); ++li) {
                const std::size_t w = std::size_t(LV[li]);
                if (n >= w + 1) fill_ring(li, n - 1 - w);
                if (n >= w) fill_ring(li, n - w);
            }
        }
    }

    for (std::size_t i = 0; i < probes.size(); ++i) {
        auto& rec = res.probes[i];
        rec.t.resize(n_steps);
        rec.J_l.resize(n_steps);
        rec.J_t.resize(n_steps);
        for (std::size_t n = 0; n < n_steps; ++n) {
            rec.t[n] = cfg.dt * double(n);
            rec.J_l[n] = h.at(n, probe_patch[i], 0);
            rec.J_t[n] = h.at(n, probe_patch[i], 1);
        }
    }
    return res;
}

/// Range-normalized far field r*E_scat(t) radiated by a current history
/// toward the unit direction rhat:
///   e(t) = -(mu0/4pi) sum_q A_q dJperp_q/dt (t + rhat.r_q / c)
/// sampled on the march's dt grid (emission-time convention: t = 0
/// corresponds to radiation passing the coordinate origin).
struct TransientFarField {
    std::vector<double> t;
    std::vector<double> e_x, e_y, e_z;  // vector components

    std::vector<double> copol(const std::array<double, 3>& e_hat) const {
        std::vector<double> out(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            out[i] = e_hat[0] * e_x[i] + e_hat[1] * e_y[i] +
                     e_hat[2] * e_z[i];
        return out;
    }
};

inline TransientFarField far_field_td(const PatchMesh& mesh,
                                      const CurrentHistory& h,
                                      const std::array<double, 3>& rhat) {
    const double nr = std::sqrt(rhat[0] * rhat[0] + rhat[1] * rhat[1] +
                                rhat[2] * rhat[2]);
    if (nr < 1e-12)
        throw std::invalid_argument("far-field direction is degenerate");
    const std::array<double, 3> rh{rhat[0] / nr, rhat[1] / nr, rhat[2] / nr};
    const std::size_t P = mesh.patches.size();
    if (h.n_patches != P)
        throw std::invalid_argument("history does not match mesh");

    TransientFarField out;
    out.t.resize(h.n_steps);
    out.e_x.assign(h.n_steps, 0.0);
    out.e_y.assign(h.n_steps, 0.0);
    out.e_z.assign(h.n_steps, 0.0);
    for (std::size_t n = 0; n < h.n_steps; ++n) out.t[n] = h.dt * double(n);

    const double pref = -mu0 / (4.0 * pi);
    for (std::size_t q = 0; q < P; ++q) {
        const Patch& pa = mesh.patches[q];
        const double adv = (rh[0] * pa.centroid[0] + rh[1] * pa.centroid[1] +
                            rh[2] * pa.centroid[2]) / (c0 * h.dt);
        const double w = pref * pa.area;
        for (std::size_t n = 0; n < h.n_steps; ++n) {
            // emission sample at step n + adv (advanced, since rhat.r_q
            // shortens the path); linear interpolation
            const double x = double(n) + adv;
            if (x < 0.0) continue;
            const std::size_t i0 = std::size_t(x);
            if (i0 + 1 >= h.n_steps) continue;
            const double f = x - double(i0);
            const double dt_t = h.Jdot[(i0 * P + q) * 2] * (1.0 - f) +
                                h.Jdot[((i0 + 1) * P + q) * 2] * f;
            const double dt_p = h.Jdot[(i0 * P + q) * 2 + 1] * (1.0 - f) +
                                h.Jdot[((i0 + 1) * P + q) * 2 + 1] * f;
            std::array<double, 3> dJ{
                dt_t * pa.tangent_t[0] + dt_p * pa.tangent_phi[0],
                dt_t * pa.tangent_t[1] + dt_p * pa.tangent_phi[1],
                dt_t * pa.tangent_t[2] + dt_p * pa.tangent_phi[2]};
            const double rad = rh[0] * dJ[0] + rh[1] * dJ[1] + rh[2] * dJ[2];
            out.e_x[n] += w * (dJ[0] - rad * rh[0]);
            out.e_y[n] += w * (dJ[1] - rad * rh[1]);
            out.e_z[n] += w * (dJ[2] - rad * rh[2]);
        }
    }
    return out;
}

} // namespace borscat
