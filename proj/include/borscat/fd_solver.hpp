#pragma once

/// Frequency-domain body-of-revolution integral-equation solver.
///
/// Surface currents are expanded per azimuthal mode m in triangle
/// functions along the generatrix, divided by rho (so that rho*J stays
/// bounded through the axis poles), for both the generatrix-tangent and
/// azimuthal components.  Galerkin testing with the same family reduces
/// the electric- and magnetic-field integral equations to dense 2(N-1)
/// systems per mode.  Closed bare-PEC bodies use the combined-field
/// weighting (alpha = 0.5) to suppress interior-resonance breakdown;
/// thin-coated bodies use the electric-field equation with a Leontovich
/// surface-impedance term.
///
/// Incidence is restricted to the two azimuthal symmetry classes of a
/// plane wave with k in the x-z plane: polarization in-plane ("even",
/// J_t ~ cos m phi, J_phi ~ sin m phi) or along y ("odd", swapped).
/// Negative modes follow from the positive ones exactly, so resummed
/// currents honor the parity zeros identically.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "borscat/constants.hpp"
#include "borscat/excitation.hpp"
#include "borscat/geometry.hpp"
#include "borscat/modal_kernel.hpp"

namespace borscat {

/// Counts dense per-frequency solves; the response cache demonstrates
/// its reuse contract through this counter.
inline std::atomic<std::uint64_t>& fd_solver_invocations() {
    static std::atomic<std::uint64_t> n{0};
    return n;
}

/// Thin dielectric layer on a conductor as a Leontovich surface
/// impedance Zs = j eta1 tan(k1 d), eta1 = eta0/sqrt(eps),
/// k1 = 2 pi f sqrt(eps)/c.
inline cplx layer_surface_impedance(double epsilon, double d, double f) {
    if (epsilon < 1.0) throw std::invalid_argument("epsilon must be >= 1");
    if (d <= 0.0) throw std::invalid_argument("thickness must be > 0");
    if (f < 0.0) throw std::invalid_argument("frequency must be >= 0");
    const double k1d = 2.0 * pi * f * std::sqrt(epsilon) / c0 * d;
    const double dist = std::abs(std::remainder(k1d - pi / 2.0, pi));
    if (dist < 1e-3)
        throw std::invalid_argument(
            "k1*d within 1e-3 of a tangent pole (pi/2 + n pi); use a "
            "thinner layer or a lower maximum frequency");
    return jimag * (eta0 / std::sqrt(epsilon)) * std::tan(k1d);
}

/// sigma = 4 pi |H|^2 for a range-normalized copolarized far-field
/// amplitude H in meters.
inline double rcs_from_H(cplx H) { return 4.0 * pi * std::norm(H); }

struct PlaneWaveDir {
    std::array<double, 3> k_hat{0, 0, -1};
    std::array<double, 3> e_hat{1, 0, 0};
};

enum class AzimuthalParity { even, odd };  // even: e in x-z plane; odd: e = y

struct FdOptions {
    double cfie_alpha = 0.5;   // combined-field weight for bare PEC
    int mode_cap = -1;         // override for the ceil(ka)+6 rule
    int test_order = 3;        // Gauss points per segment, testing side
    int src_order = 4;         // Gauss points per segment, source side
    int near_depth = 7;        // graded source-subdivision depth
    double near_factor = 1.5;  // near-pair classification threshold
    double cond_limit = 1e8;   // resonance-mitigation trigger
    std::function<void(const std::string&)> log;  // optional diagnostics
};

struct ModalCurrentSolution {
    std::vector<int> modes;                 // ascending, m >= 0
    std::vector<Eigen::VectorXcd> coeffs;   // per mode, size 2*(N-1)
    AzimuthalParity parity = AzimuthalParity::even;
    double f = 0.0;
    double max_residual = 0.0;   // max relative residual over modes
    double max_cond_est = 0.0;   // LU diagonal-ratio condition estimate
};

struct FrequencyResponse {
    std::string observation;  // "monostatic_far_field" | "probe:..."
    std::vector<double> grid;
    std::vector<cplx> values;
    // reproducibility metadata
    std::string geometry_hash;
    double h_max = 0.0;
    std::size_t n_segments = 0;
    std::string incidence;
    std::string convention =
        "time-factor exp(+j2pift) suppressed; W(f)=int w(t) exp(-j2pift) dt";
};

namespace detail {

inline double seg_distance_2d(const Segment& a, const Segment& b) {
    auto point_seg = [](double px, double pz, const Segment& s) {
        const double vx = s.rho1 - s.rho0, vz = s.z1 - s.z0;
        const double wx = px - s.rho0, wz = pz - s.z0;
        const double L2 = vx * vx + vz * vz;
        double t = L2 > 0 ? (wx * vx + wz * vz) / L2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return std::hypot(px - (s.rho0 + t * vx), pz - (s.z0 + t * vz));
    };
    double d = point_seg(a.rho0, a.z0, b);
    d = std::min(d, point_seg(a.rho1, a.z1, b));
    d = std::min(d, point_seg(a.rho_m, a.z_m, b));
    d = std::min(d, point_seg(b.rho0, b.z0, a));
    d = std::min(d, point_seg(b.rho1, b.z1, a));
    d = std::min(d, point_seg(b.rho_m, b.z_m, a));
    return d;
}

struct GaussRule {
    std::vector<double> x, w;  // on [0,1]
};

inline GaussRule gauss_rule(int n) {
    // Golub-Welsch is overkill for n <= 5; table the classical rules.
    static const double x2[] = {0.2113248654051871, 0.7886751345948129};
    static const double w2[] = {0.5, 0.5};
    static const double x3[] = {0.1127016653792583, 0.5, 0.8872983346207417};
    static const double w3[] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    static const double x4[] = {0.06943184420297371, 0.3300094782075719,
                                0.6699905217924281, 0.9305681557970263};
    static const double w4[] = {0.1739274225687269, 0.3260725774312731,
                                0.3260725774312731, 0.1739274225687269};
    static const double x5[] = {0.04691007703066800, 0.2307653449471585, 0.5,
                                0.7692346550528415, 0.9530899229693319};
    static const double w5[] = {0.1184634425280945, 0.2393143352496832,
                                0.2844444444444444, 0.2393143352496832,
                                0.1184634425280945};
    GaussRule r;
    auto fill = [&](const double* x, const double* w, int n) {
        r.x.assign(x, x + n);
        r.w.assign(w, w + n);
    };
    switch (n) {
        case 2: fill(x2, w2, 2); break;
        case 3: fill(x3, w3, 3); break;
        case 4: fill(x4, w4, 4); break;
        case 5: fill(x5, w5, 5); break;
        default: throw std::invalid_argument("gauss_rule supports n in [2,5]");
    }
    return r;
}

/// One quadrature point on a segment with the values of the (up to two)
/// triangle bases that live there.
struct SrcPoint {
    double rho, z, w;       // position and arc weight
    double fL, fR;          // basis values (left node, right node)
    double dL, dR;          // basis slopes
};

inline void segment_points(const Segment& seg, const GaussRule& rule,
                           std::vector<SrcPoint>& out) {
    out.clear();
    const double L = seg.length;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double t = rule.x[q];
        SrcPoint p;
        p.rho = seg.rho0 + t * (seg.rho1 - seg.rho0);
        p.z = seg.z0 + t * (seg.z1 - seg.z0);
        p.w = rule.w[q] * L;
        p.fL = 1.0 - t;
        p.fR = t;
        p.dL = -1.0 / L;
        p.dR = 1.0 / L;
        out.push_back(p);
    }
}

/// Graded source points toward the parameter s_star (arc fraction in
/// [0,1]) for near-singular pairs.
inline void graded_points(const Segment& seg, double s_star, int depth,
                          std::vector<SrcPoint>& out) {
    out.clear();
    const GaussRule g3 = gauss_rule(3);
    const double L = seg.length;
    auto add_interval = [&](double a, double b) {
        if (b - a < 1e-14) return;
        for (std::size_t q = 0; q < g3.x.size(); ++q) {
            const double t = a + (b - a) * g3.x[q];
            SrcPoint p;
            p.rho = seg.rho0 + t * (seg.rho1 - seg.rho0);
            p.z = seg.z0 + t * (seg.z1 - seg.z0);
            p.w = g3.w[q] * (b - a) * L;
            p.fL = 1.0 - t;
            p.fR = t;
            p.dL = -1.0 / L;
            p.dR = 1.0 / L;
            out.push_back(p);
        }
    };
    s_star = std::clamp(s_star, 0.0, 1.0);
    // left side: [0, s_star] graded toward s_star
    double prev = 0.0;
    for (int l = 1; l <= depth; ++l) {
        const double b = s_star * (1.0 - std::ldexp(1.0, -l));
        add_interval(prev, b);
        prev = b;
    }
    add_interval(prev, s_star);
    // right side
    prev = 1.0;
    for (int l = 1; l <= depth; ++l) {
        const double b = s_star + (1.0 - s_star) * std::ldexp(1.0, -l);
        add_interval(b, prev);
        prev = b;
    }
    add_interval(s_star, prev);
}

} // namespace detail

/// Dense per-mode assembly and solution for one frequency.
class BorSolver {
public:
    explicit BorSolver(SegmentMesh mesh, FdOptions opts = {})
        : mesh_(std::move(mesh)), opts_(std::move(opts)) {
        if (mesh_.segments.size() < 3)
            throw std::invalid_argument("mesh too coarse: need >= 3 segments");
        n_nodes_ = mesh_.segments.size() + 1;
        n_basis_ = n_nodes_ - 2;  // interior nodes only
        if (n_basis_ < 1)
            throw std::invalid_argument("mesh yields no interior basis nodes");
        test_rule_ = detail::gauss_rule(opts_.test_order);
        src_rule_ = detail::gauss_rule(opts_.src_order);
    }

    const SegmentMesh& mesh() const { return mesh_; }
    std::size_t n_basis() const { return n_basis_; }

    int default_mode_limit(double f) const {
        if (opts_.mode_cap >= 0) return opts_.mode_cap;
        const double ka = 2.0 * pi * f / c0 * mesh_.profile.max_rho();
        return int(std::ceil(ka)) + 6;
    }

    double max_segment_length() const {
        double h = 0.0;
        for (const auto& s : mesh_.segments) h = std::max(h, s.length);
        return h;
    }

    void check_mesh_for(double f) const {
        const double lambda = c0 / f;
        const double h = max_segment_length();
        if (h > lambda / 6.0)
            throw std::invalid_argument(
                "mesh too coarse: fewer than 6 segments per wavelength at " +
                std::to_string(f) + " Hz");
        if (h > lambda / 10.0 && opts_.log)
            opts_.log("warning: fewer than 10 segments per wavelength at " +
                      std::to_string(f) + " Hz");
    }

    static AzimuthalParity classify_parity(const PlaneWaveDir& inc) {
        if (std::abs(inc.k_hat[1]) > 1e-12)
            throw std::invalid_argument(
                "incidence must lie in the x-z plane (rotate the scenario)");
        const auto& e = inc.e_hat;
        if (std::abs(e[1]) <= 1e-12) return AzimuthalParity::even;
        if (std::abs(e[0]) <= 1e-12 && std::abs(e[2]) <= 1e-12)
            return AzimuthalParity::odd;
        throw std::invalid_argument(
            "polarization must be in the x-z plane or along y");
    }

    /// Modal excitation vectors (EFIE and MFIE testings) for modes
    /// 0..m_max; exact parity zeros are enforced structurally.
    void assemble_rhs(double f, const PlaneWaveDir& inc, int m_max,
                      std::vector<Eigen::VectorXcd>& bE,
                      std::vector<Eigen::VectorXcd>& bM) const {
        const double k = 2.0 * pi * f / c0;
        const AzimuthalParity parity = classify_parity(inc);
        const std::size_t nb = n_basis_;
        bE.assign(std::size_t(m_max) + 1, Eigen::VectorXcd::Zero(2 * nb));
        bM.assign(std::size_t(m_max) + 1, Eigen::VectorXcd::Zero(2 * nb));

        const double rho_max = mesh_.profile.max_rho();
        std::size_t n_phi = std::max<std::size_t>(
            {64, 8 * std::size_t(m_max + 2), std::size_t(4.0 * k * rho_max) + 16});
        n_phi = std::bit_ceil(n_phi);
        const double dphi = 2.0 * pi / double(n_phi);

        const auto& kh = inc.k_hat;
        const auto& eh = inc.e_hat;
        const std::array<double, 3> hh{
            kh[1] * eh[2] - kh[2] * eh[1], kh[2] * eh[0] - kh[0] * eh[2],
            kh[0] * eh[1] - kh[1] * eh[0]};

        std::vector<detail::SrcPoint> tq;
        std::vector<cplx> aE_t(std::size_t(m_max) + 1), aE_p(std::size_t(m_max) + 1),
            aM_t(std::size_t(m_max) + 1), aM_p(std::size_t(m_max) + 1);
        for (std::size_t s = 0; s < mesh_.segments.size(); ++s) {
            const Segment& seg = mesh_.segments[s];
            detail::segment_points(seg, test_rule_, tq);
            for (const auto& p : tq) {
                std::fill(aE_t.begin(), aE_t.end(), cplx{});
                std::fill(aE_p.begin(), aE_p.end(), cplx{});
                std::fill(aM_t.begin(), aM_t.end(), cplx{});
                std::fill(aM_p.begin(), aM_p.end(), cplx{});
                for (std::size_t i = 0; i < n_phi; ++i) {
                    const double phi = dphi * double(i);
                    const double cp = std::cos(phi), sp = std::sin(phi);
                    const std::array<double, 3> r{p.rho * cp, p.rho * sp, p.z};
                    const std::array<double, 3> th{seg.t_rho * cp,
                                                   seg.t_rho * sp, seg.t_z};
                    const std::array<double, 3> ph{-sp, cp, 0.0};
                    const std::array<double, 3> nh{seg.n_rho * cp,
                                                   seg.n_rho * sp, seg.n_z};
                    const double kr = k * (kh[0] * r[0] + kh[1] * r[1] +
                                           kh[2] * r[2]);
                    const cplx phase(std::cos(kr), -std::sin(kr));
                    // n x h
                    const std::array<double, 3> nxh{
                        nh[1] * hh[2] - nh[2] * hh[1],
                        nh[2] * hh[0] - nh[0] * hh[2],
                        nh[0] * hh[1] - nh[1] * hh[0]};
                    auto dot3 = [](const std::array<double, 3>& a,
                                   const std::array<double, 3>& b) {
                        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                    };
                    const cplx Et = dot3(th, eh) * phase;
                    const cplx Ep = dot3(ph, eh) * phase;
                    const cplx Mt = dot3(th, nxh) * phase / eta0;
                    const cplx Mp = dot3(ph, nxh) * phase / eta0;
                    // exp(-j m phi) recurrence
                    cplx e(dphi, 0.0);
                    const cplx step(cp, -sp);
                    for (int m = 0; m <= m_max; ++m) {
                        aE_t[std::size_t(m)] += e * Et;
                        aE_p[std::size_t(m)] += e * Ep;
                        aM_t[std::size_t(m)] += e * Mt;
                        aM_p[std::size_t(m)] += e * Mp;
                        e *= step;
                    }
                }
                for (int m = 0; m <= m_max; ++m) {
                    auto add = [&](Eigen::VectorXcd& b, cplx at, cplx ap) {
                        if (s >= 1) {  // left node basis falling: fL
                            b[long(s) - 1] += p.w * p.fL * at;
                            b[long(nb + s) - 1] += p.w * p.fL * ap;
                        }
                        if (s + 1 <= n_basis_) {
                            b[long(s)] += p.w * p.fR * at;
                            b[long(nb + s)] += p.w * p.fR * ap;
                        }
                    };
                    add(bE[std::size_t(m)], aE_t[std::size_t(m)], aE_p[std::size_t(m)]);
                    add(bM[std::size_t(m)], aM_t[std::size_t(m)], aM_p[std::size_t(m)]);
                }
            }
        }
        // structural parity zeros for m = 0
        for (std::size_t i = 0; i < nb; ++i) {
            if (parity == AzimuthalParity::even) {
                bE[0][long(nb + i)] = 0.0;
                bM[0][long(nb + i)] = 0.0;
            } else {
                bE[0][long(i)] = 0.0;
                bM[0][long(i)] = 0.0;
            }
        }
    }

    /// Assemble the EFIE and MFIE Galerkin matrices for the given modes.
    void assemble_matrices(double f, std::span<const int> modes, bool need_mfie,
                           std::vector<Eigen::MatrixXcd>& ZE,
                           std::vector<Eigen::MatrixXcd>& ZM) const {
        const double k = 2.0 * pi * f / c0;
        const double omega = 2.0 * pi * f;
        const std::size_t nb = n_basis_;
        const std::size_t nm = modes.size();
        ZE.assign(nm, Eigen::MatrixXcd::Zero(2 * nb, 2 * nb));
        ZM.assign(nm, Eigen::MatrixXcd::Zero(2 * nb, 2 * nb));

        int m_max = 0;
        for (int m : modes) m_max = std::max(m_max, m);

        std::vector<detail::SrcPoint> tq, sq;
        std::vector<RingPairMoments> mom(nm);
        std::vector<detail::PhiNode> scratch;

        const std::size_t ns = mesh_.segments.size();
        for (std::size_t st = 0; st < ns; ++st) {
            const Segment& segt = mesh_.segments[st];
            detail::segment_points(segt, test_rule_, tq);
            for (std::size_t ss = 0; ss < ns; ++ss) {
                const Segment& segs = mesh_.segments[ss];
                const double d2d = detail::seg_distance_2d(segt, segs);
                const bool near = d2d < opts_.near_factor *
                    std::max(segt.length, segs.length);
                if (!near) detail::segment_points(segs, src_rule_, sq);

                for (const auto& tp : tq) {
                    if (near) {
                        // project the test point onto the source chord
                        const double vx = segs.rho1 - segs.rho0;
                        const double vz = segs.z1 - segs.z0;
                        const double L2 = vx * vx + vz * vz;
                        const double sstar = L2 > 0
                            ? ((tp.rho - segs.rho0) * vx + (tp.z - segs.z0) * vz) / L2
                            : 0.5;
                        detail::graded_points(segs, sstar, opts_.near_depth, sq);
                    }
                    RingPairGeom g;
                    g.rho_t = tp.rho; g.z_t = tp.z;
                    g.sv_t = segt.t_rho; g.cv_t = segt.t_z;
                    g.nr_t = segt.n_rho; g.nz_t = segt.n_z;
                    g.sv_s = segs.t_rho; g.cv_s = segs.t_z;
                    for (const auto& sp : sq) {
                        g.rho_s = sp.rho; g.z_s = sp.z;
                        ring_pair_moments(g, k, modes, need_mfie,
                                          std::span<RingPairMoments>(mom),
                                          scratch);
                        const double wts = tp.w * sp.w;
                        for (std::size_t im = 0; im < nm; ++im) {
                            const int m = modes[im];
                            const RingPairMoments& M = mom[im];
                            const cplx jm(0.0, double(m));
                            Eigen::MatrixXcd& E = ZE[im];
                            Eigen::MatrixXcd& B = ZM[im];
                            // basis bookkeeping: test bases on segt are
                            // nodes st (fL) and st+1 (fR); same on segs
                            for (int a = 0; a < 2; ++a) {
                                const long it = (a == 0) ? long(st) - 1 : long(st);
                                if (it < 0 || it >= long(nb)) continue;
                                const double gv = (a == 0) ? tp.fL : tp.fR;
                                const double gd = (a == 0) ? tp.dL : tp.dR;
                                for (int b = 0; b < 2; ++b) {
                                    const long js = (b == 0) ? long(ss) - 1 : long(ss);
                                    if (js < 0 || js >= long(nb)) continue;
                                    const double fv = (b == 0) ? sp.fL : sp.fR;
                                    const double fd = (b == 0) ? sp.dL : sp.dR;
                                    const double gf = gv * fv;
                                    // EFIE blocks
                                    E(it, js) += wts * (gf * M.Vtt -
                                        (gd * fd / (k * k)) * M.G);
                                    E(it, long(nb) + js) += wts * (gf * M.Vtp -
                                        jm / (k * k) * gd * (fv / sp.rho) * M.G);
                                    E(long(nb) + it, js) += wts * (gf * M.Vpt +
                                        jm / (k * k) * (gv / tp.rho) * fd * M.G);
                                    E(long(nb) + it, long(nb) + js) += wts *
                                        (gf * M.Vpp - double(m) * double(m) /
                                         (k * k) * (gv / tp.rho) *
                                         (fv / sp.rho) * M.G);
                                    if (need_mfie) {
                                        B(it, js) -= wts * gf * M.Mtt;
                                        B(it, long(nb) + js) -= wts * gf * M.Mtp;
                                        B(long(nb) + it, js) -= wts * gf * M.Mpt;
                                        B(long(nb) + it, long(nb) + js) -=
                                            wts * gf * M.Mpp;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // prefactors and the MFIE identity term
        Eigen::MatrixXcd gram;
        if (need_mfie) gram = gram_matrix();
        for (std::size_t im = 0; im < nm; ++im) {
            ZE[im] *= cplx(0.0, omega * mu0) * 2.0 * pi;
            if (need_mfie) {
                ZM[im] *= 2.0 * pi;
                ZM[im] += 0.5 * gram;
            }
        }
    }

    /// Same-component overlap matrix 2 pi int g_i f_j / rho dt (both
    /// diagonal blocks; cross blocks vanish).
    Eigen::MatrixXcd gram_matrix() const {
        const std::size_t nb = n_basis_;
        Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(2 * nb, 2 * nb);
        std::vector<detail::SrcPoint> tq;
        for (std::size_t s = 0; s < mesh_.segments.size(); ++s) {
            detail::segment_points(mesh_.segments[s], src_rule_, tq);
            for (const auto& p : tq) {
                for (int a = 0; a < 2; ++a) {
                    const long i = (a == 0) ? long(s) - 1 : long(s);
                    if (i < 0 || i >= long(nb)) continue;
                    const double gi = (a == 0) ? p.fL : p.fR;
                    for (int b = 0; b < 2; ++b) {
                        const long j = (b == 0) ? long(s) - 1 : long(s);
                        if (j < 0 || j >= long(nb)) continue;
                        const double fj = (b == 0) ? p.fL : p.fR;
                        const double v = 2.0 * pi * p.w * gi * fj / p.rho;
                        G(i, j) += v;
                        G(long(nb) + i, long(nb) + j) += v;
                    }
                }
            }
        }
        return G;
    }

    /// Assemble and solve all excited modes at one frequency.  Zs = 0
    /// selects the combined-field equation; Zs != 0 the electric-field
    /// equation with the impedance term.
    ModalCurrentSolution solve(double f, const PlaneWaveDir& inc,
                               cplx Zs = cplx{}) const {
        check_mesh_for(f);
        const int m_limit = default_mode_limit(f);
        std::vector<Eigen::VectorXcd> bE, bM;
        assemble_rhs(f, inc, m_limit, bE, bM);

        const bool pec = (Zs == cplx{});
        const double alpha = opts_.cfie_alpha;

        // combined right-hand sides and excited-mode filtering
        std::vector<Eigen::VectorXcd> rhs(std::size_t(m_limit) + 1);
        double bmax = 0.0;
        for (int m = 0; m <= m_limit; ++m) {
            rhs[std::size_t(m)] = pec
                ? ((alpha / eta0) * bE[std::size_t(m)] +
                   (1.0 - alpha) * bM[std::size_t(m)]).eval()
                : bE[std::size_t(m)];
            bmax = std::max(bmax, rhs[std::size_t(m)].norm());
        }
        std::vector<int> modes;
        for (int m = 0; m <= m_limit; ++m)
            if (rhs[std::size_t(m)].norm() > 1e-10 * bmax) modes.push_back(m);
        if (modes.empty())
            throw std::runtime_error("incident field excites no modes");

        std::vector<Eigen::MatrixXcd> ZE, ZM;
        assemble_matrices(f, modes, pec, ZE, ZM);

        Eigen::MatrixXcd gram;
        if (!pec) gram = gram_matrix();

        ModalCurrentSolution sol;
        sol.modes = modes;
        sol.parity = classify_parity(inc);
        sol.f = f;
        sol.coeffs.resize(modes.size());
        for (std::size_t im = 0; im < modes.size(); ++im) {
            Eigen::MatrixXcd A = pec
                ? ((alpha / eta0) * ZE[im] + (1.0 - alpha) * ZM[im]).eval()
                : (ZE[im] + Zs * gram).eval();
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
            const auto diag = lu.matrixLU().diagonal();
            double dmin = 1e300, dmax = 0.0;
            for (long i = 0; i < diag.size(); ++i) {
                const double a = std::abs(diag[i]);
                dmin = std::min(dmin, a);
                dmax = std::max(dmax, a);
            }
            sol.max_cond_est = std::max(sol.max_cond_est,
                                        dmin > 0 ? dmax / dmin : 1e300);
            const Eigen::VectorXcd& b = rhs[std::size_t(modes[im])];
            Eigen::VectorXcd x = lu.solve(b);
            const double res = (A * x - b).norm() / b.norm();
            sol.max_residual = std::max(sol.max_residual, res);
            if (res > 1e-10)
                throw std::runtime_error(
                    "dense solve residual " + std::to_string(res) +
                    " exceeds 1e-10 (mode " + std::to_string(modes[im]) + ")");
            sol.coeffs[im] = std::move(x);
        }
        return sol;
    }

    /// rho * J (t-hat and phi-hat components) resummed at a segment
    /// midpoint and azimuth phi.  Triangle values at midpoints are 1/2
    /// for the two straddling node bases.
    std::pair<cplx, cplx> rho_current_at(const ModalCurrentSolution& sol,
                                         std::size_t seg, double phi) const {
        const std::size_t nb = n_basis_;
        cplx jt{}, jp{};
        for (std::size_t im = 0; im < sol.modes.size(); ++im) {
            const int m = sol.modes[im];
            const auto& x = sol.coeffs[im];
            cplx Ft{}, Fp{};
            if (seg >= 1) {
                Ft += 0.5 * x[long(seg) - 1];
                Fp += 0.5 * x[long(nb + seg) - 1];
            }
            if (seg + 1 <= nb) {
                Ft += 0.5 * x[long(seg)];
                Fp += 0.5 * x[long(nb + seg)];
            }
            const double c = std::cos(m * phi), s = std::sin(m * phi);
            if (sol.parity == AzimuthalParity::even) {
                if (m == 0) { jt += Ft; }
                else {
                    jt += 2.0 * c * Ft;
                    jp += 2.0 * jimag * s * Fp;
                }
            } else {
                if (m == 0) { jp += Fp; }
                else {
                    jt += 2.0 * jimag * s * Ft;
                    jp += 2.0 * c * Fp;
                }
            }
        }
        return {jt, jp};
    }

    struct ProbeResult {
        cplx J_t;         // t-hat (longitudinal) component, A/m
        cplx J_phi;       // phi-hat (transverse) component, A/m
        std::size_t seg;  // snapped segment
        double snap_distance;
    };

    /// Current at a surface probe (rho, z, phi); the probe is snapped to
    /// the nearest segment midpoint.
    ProbeResult probe_current(const ModalCurrentSolution& sol, double rho,
                              double z, double phi) const {
        double best = 1e300;
        std::size_t seg = 0;
        double off = 1e300;
        for (std::size_t s = 0; s < mesh_.segments.size(); ++s) {
            const auto& sg = mesh_.segments[s];
            const double d = std::hypot(rho - sg.rho_m, z - sg.z_m);
            if (d < best) { best = d; seg = s; }
            off = std::min(off, detail::seg_distance_2d(
                Segment{rho, z, rho, z, rho, z, 0, 1, 0, 0, 1}, sg));
        }
        if (off > mesh_.h_max / 2.0)
            throw std::invalid_argument(
                "probe lies off the discretized surface by more than h_max/2");
        auto [rjt, rjp] = rho_current_at(sol, seg, phi);
        const double rm = mesh_.segments[seg].rho_m;
        return {rjt / rm, rjp / rm, seg, best};
    }

    /// Range-normalized far-field vector amplitude (the transverse part
    /// of F = -j omega mu /(4 pi) int J exp(+j k rhat.r') dS') for the
    /// observation direction rhat.
    std::array<cplx, 3> far_field(const ModalCurrentSolution& sol,
                                  const std::array<double, 3>& rhat) const {
        const double k = 2.0 * pi * sol.f / c0;
        const double nr = std::sqrt(rhat[0] * rhat[0] + rhat[1] * rhat[1] +
                                    rhat[2] * rhat[2]);
        if (nr < 1e-12)
            throw std::invalid_argument("far-field direction is degenerate");
        const std::array<double, 3> rh{rhat[0] / nr, rhat[1] / nr, rhat[2] / nr};

        int m_max = 0;
        for (int m : sol.modes) m_max = std::max(m_max, m);
        const double rho_max = mesh_.profile.max_rho();
        std::size_t n_phi = std::max<std::size_t>(
            {64, 8 * std::size_t(m_max + 2), std::size_t(4.0 * k * rho_max) + 16});
        n_phi = std::bit_ceil(n_phi);
        const double dphi = 2.0 * pi / double(n_phi);

        const std::size_t nb = n_basis_;
        std::array<cplx, 3> F{};
        std::vector<detail::SrcPoint> tq;
        for (std::size_t s = 0; s < mesh_.segments.size(); ++s) {
            const Segment& seg = mesh_.segments[s];
            detail::segment_points(seg, src_rule_, tq);
            for (const auto& p : tq) {
                // modal coefficients of rho*J at this point
                for (std::size_t iphi = 0; iphi < n_phi; ++iphi) {
                    const double phi = dphi * (double(iphi) + 0.5);
                    cplx rjt{}, rjp{};
                    for (std::size_t im = 0; im < sol.modes.size(); ++im) {
                        const int m = sol.modes[im];
                        const auto& x = sol.coeffs[im];
                        cplx Ft{}, Fp{};
                        if (s >= 1) {
                            Ft += p.fL * x[long(s) - 1];
                            Fp += p.fL * x[long(nb + s) - 1];
                        }
                        if (s + 1 <= nb) {
                            Ft += p.fR * x[long(s)];
                            Fp += p.fR * x[long(nb + s)];
                        }
                        const double c = std::cos(m * phi);
                        const double sn = std::sin(m * phi);
                        if (sol.parity == AzimuthalParity::even) {
                            if (m == 0) rjt += Ft;
                            else {
                                rjt += 2.0 * c * Ft;
                                rjp += 2.0 * jimag * sn * Fp;
                            }
                        } else {
                            if (m == 0) rjp += Fp;
                            else {
                                rjt += 2.0 * jimag * sn * Ft;
                                rjp += 2.0 * c * Fp;
                            }
                        }
                    }
                    const double cp = std::cos(phi), sp = std::sin(phi);
                    const std::array<double, 3> r{p.rho * cp, p.rho * sp, p.z};
                    const std::array<cplx, 3> Jr{
                        rjt * seg.t_rho * cp - rjp * sp,
                        rjt * seg.t_rho * sp + rjp * cp,
                        rjt * seg.t_z};
                    const double kr = k * (rh[0] * r[0] + rh[1] * r[1] +
                                           rh[2] * r[2]);
                    const cplx phase(std::cos(kr), std::sin(kr));
                    const cplx wgt = phase * (p.w * dphi);
                    F[0] += wgt * Jr[0];
                    F[1] += wgt * Jr[1];
                    F[2] += wgt * Jr[2];
                }
            }
        }
        const cplx pref = -jimag * (2.0 * pi * sol.f) * mu0 / (4.0 * pi);
        for (auto& c : F) c *= pref;
        // transverse projection
        const cplx rdotF = rh[0] * F[0] + rh[1] * F[1] + rh[2] * F[2];
        for (int i = 0; i < 3; ++i) F[i] -= rdotF * rh[i];
        return F;
    }

    /// Monostatic copolarized amplitude H (meters): observation back
    /// along -k, projected on the incident polarization.
    cplx monostatic_H(const ModalCurrentSolution& sol,
                      const PlaneWaveDir& inc) const {
        const std::array<double, 3> back{-inc.k_hat[0], -inc.k_hat[1],
                                         -inc.k_hat[2]};
        const auto F = far_field(sol, back);
        return inc.e_hat[0] * F[0] + inc.e_hat[1] * F[1] + inc.e_hat[2] * F[2];
    }

    const FdOptions& options() const { return opts_; }

private:
    SegmentMesh mesh_;
    FdOptions opts_;
    std::size_t n_nodes_ = 0;
    std::size_t n_basis_ = 0;
    detail::GaussRule test_rule_, src_rule_;
};

struct SweepObservation {
    enum class Kind { monostatic_far_field, probe_current } kind =
        Kind::monostatic_far_field;
    // probe parameters (used when kind == probe_current)
    double probe_rho = 0, probe_z = 0, probe_phi = 0;
    enum class Component { t_hat, phi_hat } component = Component::t_hat;

    std::string describe() const {
        if (kind == Kind::monostatic_far_field) return "monostatic_far_field";
        std::ostringstream os;
        os << "probe:rho=" << probe_rho << ",z=" << probe_z
           << ",phi=" << probe_phi << ","
           << (component == Component::t_hat ? "t_hat" : "phi_hat");
        return os.str();
    }
};

/// Canonical incidence metadata text shared by sweeps and cache keys.
inline std::string incidence_descriptor(const PlaneWaveDir& inc) {
    std::ostringstream os;
    os.precision(17);
    os << "k=(" << inc.k_hat[0] << "," << inc.k_hat[1] << ","
       << inc.k_hat[2] << ");e=(" << inc.e_hat[0] << "," << inc.e_hat[1]
       << "," << inc.e_hat[2] << ")";
    return os.str();
}

/// Frequency sweep extracting several observables from the same dense
/// solves (one solver invocation per frequency regardless of how many
/// observations are requested).  The coating (if any) of the mesh
/// profile sets the per-frequency surface impedance.
inline std::vector<FrequencyResponse> sweep_multi(
    const BorSolver& solver, const PlaneWaveDir& inc,
    const std::vector<SweepObservation>& obs,
    const std::vector<double>& f_grid) {
    if (obs.empty()) throw std::invalid_argument("no observations requested");
    if (f_grid.empty()) throw std::invalid_argument("empty frequency grid");
    for (std::size_t i = 0; i + 1 < f_grid.size(); ++i)
        if (f_grid[i + 1] <= f_grid[i])
            throw std::invalid_argument("frequency grid must be ascending");
    if (f_grid.front() <= 0.0)
        throw std::invalid_argument("frequency grid must start above DC");
    solver.check_mesh_for(f_grid.back());

    const auto& coating = solver.mesh().profile.coating;
    std::vector<FrequencyResponse> resp(obs.size());
    for (std::size_t o = 0; o < obs.size(); ++o) {
        resp[o].observation = obs[o].describe();
        resp[o].grid = f_grid;
        resp[o].values.resize(f_grid.size());
        resp[o].h_max = solver.mesh().h_max;
        resp[o].n_segments = solver.mesh().segments.size();
        resp[o].incidence = incidence_descriptor(inc);
    }

    for (std::size_t i = 0; i < f_grid.size(); ++i) {
        double f = f_grid[i];
        cplx Zs{};
        if (coating)
            Zs = layer_surface_impedance(coating->epsilon,
                                         coating->thickness_d, f);
        ModalCurrentSolution sol = solver.solve(f, inc, Zs);
        if (sol.max_cond_est > solver.options().cond_limit) {
            // interior-resonance mitigation: nudge the frequency by 0.1%
            const double fp = f * 1.001;
            if (solver.options().log)
                solver.options().log(
                    "condition estimate " + std::to_string(sol.max_cond_est) +
                    " at " + std::to_string(f) + " Hz; re-solving at +0.1%");
            if (coating)
                Zs = layer_surface_impedance(coating->epsilon,
                                             coating->thickness_d, fp);
            sol = solver.solve(fp, inc, Zs);
        }
        fd_solver_invocations().fetch_add(1, std::memory_order_relaxed);
        for (std::size_t o = 0; o < obs.size(); ++o) {
            if (obs[o].kind == SweepObservation::Kind::monostatic_far_field) {
                resp[o].values[i] = solver.monostatic_H(sol, inc);
            } else {
                const auto pr = solver.probe_current(
                    sol, obs[o].probe_rho, obs[o].probe_z, obs[o].probe_phi);
                resp[o].values[i] =
                    obs[o].component == SweepObservation::Component::t_hat
                        ? pr.J_t : pr.J_phi;
            }
        }
    }
    return resp;
}

inline FrequencyResponse sweep(const BorSolver& solver,
                               const PlaneWaveDir& inc,
                               const SweepObservation& obs,
                               const std::vector<double>& f_grid) {
    return sweep_multi(solver, inc, {obs}, f_grid).front();
}

} // namespace borscat
