#pragma once

/// Azimuthal modal reduction of the free-space kernels between two
/// rings of a body of revolution.
///
/// For a source ring (rho', z') and an observation point on the ring
/// (rho, z) at azimuth 0, the scalar modal kernel is
///
///   G_m = int_0^{2pi} exp(-j k R(phi')) / (4 pi R(phi')) cos(m phi') dphi'
///
/// The same quadrature engine also produces the vector moments needed by
/// the electric- and magnetic-field integral operators: unit-vector dot
/// products against G and against grad G, projected onto exp(j m phi').
/// Near-singular ring pairs (R_min much smaller than the ring radius)
/// are integrated on a graded subdivision toward phi' = 0; well
/// separated pairs use the uniform periodic rule, which converges
/// spectrally.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "borscat/constants.hpp"

namespace borscat {

/// Geometry of one (test point, source point) ring pair.  Test-side
/// tangent/normal data is needed only for the operator moments, not for
/// the scalar kernel.
struct RingPairGeom {
    double rho_t = 0, z_t = 0;    // observation ring
    double sv_t = 0, cv_t = 1;    // test generatrix tangent (sin v, cos v)
    double nr_t = 0, nz_t = 0;    // test outward normal (rho, z)
    double rho_s = 0, z_s = 0;    // source ring
    double sv_s = 0, cv_s = 1;    // source generatrix tangent
};

/// Modal moments for one mode m of one ring pair.  V* are moments of
/// (unit dot) * G; M* are the magnetic-field operator moments
/// (u_a . grad G)(n . u_b') - (u_a . u_b')(n . grad G); G is the scalar
/// modal kernel.
struct RingPairMoments {
    cplx G{}, Vtt{}, Vtp{}, Vpt{}, Vpp{};
    cplx Mtt{}, Mtp{}, Mpt{}, Mpp{};
};

namespace detail {

struct PhiNode {
    double phi, w;
};

inline double ring_R(const RingPairGeom& g, double cphi) {
    const double dx = g.rho_t - g.rho_s * cphi;
    const double dz = g.z_t - g.z_s;
    const double ss = g.rho_s * g.rho_s * (1.0 - cphi * cphi);
    return std::sqrt(dx * dx + ss + dz * dz);
}

/// Build the azimuthal quadrature node set for one ring pair.
inline void build_phi_nodes(const RingPairGeom& g, double k, int m_max,
                            std::vector<PhiNode>& nodes) {
    nodes.clear();
    const double dz = g.z_t - g.z_s;
    const double d = std::hypot(g.rho_t - g.rho_s, dz);     // R at phi' = 0
    const double rmax = std::hypot(g.rho_t + g.rho_s, dz);  // R at phi' = pi
    const double rr = g.rho_t * g.rho_s;
    const double dpsi = k * (rmax - d);  // oscillation phase range
    if (d <= 0.0)
        throw std::invalid_argument(
            "coincident observation/source ring point; singular kernel");
    const double peak_w = (rr > 0.0) ? std::min(pi, d / std::sqrt(rr)) : pi;

    if (peak_w > 0.8) {
        // smooth kernel: uniform periodic rule
        std::size_t n = std::max<std::size_t>(
            24, std::max<std::size_t>(2 * std::size_t(m_max) + 18,
                                      std::size_t(3.0 * dpsi) + 8));
        n = (n + 7) / 8 * 8;
        const double w = 2.0 * pi / double(n);
        for (std::size_t i = 0; i < n; ++i)
            nodes.push_back({-pi + w * (double(i) + 0.5), w});
        return;
    }

    // graded subdivision of [0, pi] toward the near-singular peak at 0,
    // mirrored to [-pi, 0]
    static const double gx4[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
    static const double gw4[4] = {0.3478548451374538, 0.6521451548625461,
                                  0.6521451548625461, 0.3478548451374538};
    std::vector<double> bounds;
    bounds.push_back(pi);
    double b = pi;
    int depth = 0;
    while (b > 0.25 * peak_w && depth < 60) {
        b *= 0.5;
        bounds.push_back(b);
        ++depth;
    }
    bounds.push_back(0.0);
    const double osc_scale = std::max(1, m_max + 2);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const double hi = bounds[i], lo = bounds[i + 1];
        const double Rhi = ring_R(g, std::cos(hi));
        const double Rlo = ring_R(g, std::cos(lo));
        std::size_t nsub = 1 + std::size_t(k * std::abs(Rhi - Rlo) / 1.5)
                             + std::size_t((hi - lo) * osc_scale / 3.0);
        for (std::size_t s = 0; s < nsub; ++s) {
            const double a = lo + (hi - lo) * double(s) / double(nsub);
            const double c = lo + (hi - lo) * double(s + 1) / double(nsub);
            const double mid = 0.5 * (a + c), half = 0.5 * (c - a);
            for (int q = 0; q < 4; ++q) {
                const double phi = mid + half * gx4[q];
                const double w = half * gw4[q];
                nodes.push_back({phi, w});
                nodes.push_back({-phi, w});
            }
        }
    }
}

} // namespace detail

/// Compute modal moments of one ring pair for modes modes[0..n-1].
/// If `need_mfie` is false the M* members are left zero.
inline void ring_pair_moments(const RingPairGeom& g, double k,
                              std::span<const int> modes, bool need_mfie,
                              std::span<RingPairMoments> out,
                              std::vector<detail::PhiNode>& scratch) {
    int m_max = 0;
    for (int m : modes) m_max = std::max(m_max, m);
    detail::build_phi_nodes(g, k, m_max, scratch);
    for (auto& o : out) o = RingPairMoments{};

    std::vector<cplx> cis(std::size_t(m_max) + 1);
    const double dz = g.z_t - g.z_s;
    for (const auto& node : scratch) {
        const double cphi = std::cos(node.phi), sphi = std::sin(node.phi);
        const double rx = g.rho_t - g.rho_s * cphi;
        const double ry = -g.rho_s * sphi;
        const double R2 = rx * rx + ry * ry + dz * dz;
        const double R = std::sqrt(R2);
        const double kr = k * R;
        const double ckr = std::cos(kr), skr = std::sin(kr);
        const cplx ejkr(ckr, -skr);  // exp(-jkR)
        const cplx G = ejkr / (4.0 * pi * R);

        const double tt = g.sv_t * g.sv_s * cphi + g.cv_t * g.cv_s;
        const double tp = -g.sv_t * sphi;
        const double pt = g.sv_s * sphi;
        const double pp = cphi;

        cplx Mtt, Mtp, Mpt, Mpp;
        if (need_mfie) {
            // grad G = q * Rvec, q = -(1+jkR) exp(-jkR)/(4 pi R^3)
            const cplx q = -cplx(1.0, kr) * ejkr / (4.0 * pi * R2 * R);
            const double t_dot_R = g.sv_t * rx + g.cv_t * dz;
            const double p_dot_R = ry;  // test phi_hat = (0,1,0)
            const double n_dot_R = g.nr_t * rx + g.nz_t * dz;
            const double n_dot_ts = g.nr_t * g.sv_s * cphi + g.nz_t * g.cv_s;
            const double n_dot_ps = -g.nr_t * sphi;
            Mtt = q * (t_dot_R * n_dot_ts - tt * n_dot_R);
            Mtp = q * (t_dot_R * n_dot_ps - tp * n_dot_R);
            Mpt = q * (p_dot_R * n_dot_ts - pt * n_dot_R);
            Mpp = q * (p_dot_R * n_dot_ps - pp * n_dot_R);
        }

        // exp(j m phi') powers
        cis[0] = cplx(node.w, 0.0);
        const cplx e1(cphi, sphi);
        for (int m = 1; m <= m_max; ++m) cis[std::size_t(m)] = cis[std::size_t(m) - 1] * e1;

        for (std::size_t im = 0; im < modes.size(); ++im) {
            const cplx e = cis[std::size_t(modes[im])];
            RingPairMoments& o = out[im];
            o.G += e * G;
            o.Vtt += e * (tt * G);
            o.Vtp += e * (tp * G);
            o.Vpt += e * (pt * G);
            o.Vpp += e * (pp * G);
            if (need_mfie) {
                o.Mtt += e * Mtt;
                o.Mtp += e * Mtp;
                o.Mpt += e * Mpt;
                o.Mpp += e * Mpp;
            }
        }
    }
}

/// Scalar modal kernel G_m between a source ring point and an
/// observation ring point (spec operation).  k >= 0; the coincident
/// case throws.
inline cplx modal_kernel(int m, double rho_src, double z_src,
                         double rho_obs, double z_obs, double k) {
    if (m < 0) throw std::invalid_argument("mode m must be >= 0");
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    RingPairGeom g;
    g.rho_t = rho_obs; g.z_t = z_obs;
    g.rho_s = rho_src; g.z_s = z_src;
    const int modes[1] = {m};
    RingPairMoments mom[1];
    std::vector<detail::PhiNode> scratch;
    ring_pair_moments(g, k, std::span<const int>(modes, 1), false,
                      std::span<RingPairMoments>(mom, 1), scratch);
    return mom[0].G;
}

} // namespace borscat
