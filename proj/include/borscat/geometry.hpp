#pragma once

/// Body-of-revolution geometry: generatrix profiles for the canonical
/// shapes (cylinder, cone, sphere), arc-length discretization of the
/// generatrix, and revolution into a 3-D patch mesh.
///
/// Conventions: the symmetry axis is z; the generatrix lives in the
/// (rho, z) half-plane with rho >= 0.  Closed profiles run from the
/// bottom pole (rho = 0) to the top pole (rho = 0), counterclockwise in
/// the half-plane, so that the outward normal is n = (t_z, -t_rho).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "borscat/constants.hpp"

namespace borscat {

struct GeneratrixPoint {
    double rho = 0.0;  // radial coordinate, m, >= 0
    double z = 0.0;    // axial coordinate, m
    // Corner points must survive discretization as mesh nodes; points
    // sampled on a smooth arc (sphere) may be resampled freely.
    bool corner = true;
};

struct CoatingSpec {
    double epsilon = 1.0;      // relative permittivity, >= 1
    double thickness_d = 0.0;  // layer thickness, m, > 0
};

struct GeneratrixProfile {
    std::vector<GeneratrixPoint> points;
    std::optional<CoatingSpec> coating;

    double polyline_length() const {
        double s = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i)
            s += std::hypot(points[i].rho - points[i - 1].rho,
                            points[i].z - points[i - 1].z);
        return s;
    }

    /// Largest chord of the revolved surface (used for time windows).
    double diameter() const {
        double d2 = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i; j < points.size(); ++j) {
                const auto& p = points[i];
                const auto& q = points[j];
                const double dz = p.z - q.z;
                // opposite azimuths maximize the radial part
                const double s = p.rho + q.rho;
                d2 = std::max(d2, s * s + dz * dz);
            }
        return std::sqrt(d2);
    }

    double max_rho() const {
        double r = 0.0;
        for (const auto& p : points) r = std::max(r, p.rho);
        return r;
    }
};

namespace detail {

inline void validate_coating(const std::optional<CoatingSpec>& coating,
                             double max_rho) {
    if (!coating) return;
    if (coating->epsilon < 1.0)
        throw std::invalid_argument("coating epsilon must be >= 1");
    if (coating->thickness_d <= 0.0)
        throw std::invalid_argument("coating thickness must be > 0");
    if (coating->thickness_d > 0.2 * max_rho)
        throw std::invalid_argument(
            "coating thickness exceeds thin-layer bound d <= 0.2*max rho");
}

} // namespace detail

/// Closed cylinder of length L and radius a, axis along z, centered at
/// the origin: bottom cap, lateral wall, top cap.
inline GeneratrixProfile make_cylinder(double L, double a,
                                       std::optional<CoatingSpec> coating = {}) {
    if (L <= 0.0 || a <= 0.0)
        throw std::invalid_argument("cylinder requires L > 0 and a > 0");
    GeneratrixProfile p;
    p.points = {{0.0, -L / 2}, {a, -L / 2}, {a, L / 2}, {0.0, L / 2}};
    detail::validate_coating(coating, a);
    p.coating = coating;
    return p;
}

/// Cone with base disk of radius a in the plane z = 0 and vertex at
/// z = +h, h = a / tan(opening/2); `opening_deg` is the full opening
/// angle at the vertex.
inline GeneratrixProfile make_cone(double a, double opening_deg,
                                   std::optional<CoatingSpec> coating = {}) {
    if (a <= 0.0) throw std::invalid_argument("cone requires a > 0");
    if (!(opening_deg > 0.0 && opening_deg < 180.0))
        throw std::invalid_argument("cone opening angle must lie in (0, 180) degrees");
    const double half = opening_deg * pi / 360.0;
    const double h = a / std::tan(half);
    GeneratrixProfile p;
    p.points = {{0.0, 0.0}, {a, 0.0}, {0.0, h}};
    detail::validate_coating(coating, a);
    p.coating = coating;
    return p;
}

/// Sphere of radius a centered at the origin.  The arc is sampled as a
/// dense polyline; interior points are marked non-corner so that
/// discretize() may resample them at any h_max.
inline GeneratrixProfile make_sphere(double a,
                                     std::optional<CoatingSpec> coating = {},
                                     std::size_t n_arc = 720) {
    if (a <= 0.0) throw std::invalid_argument("sphere requires a > 0");
    GeneratrixProfile p;
    p.points.reserve(n_arc + 1);
    for (std::size_t i = 0; i <= n_arc; ++i) {
        // polar angle from the bottom pole
        const double th = pi * double(i) / double(n_arc);
        GeneratrixPoint pt{a * std::sin(th), -a * std::cos(th), false};
        if (i == 0 || i == n_arc) {
            pt.rho = 0.0;
            pt.corner = true;
        }
        p.points.push_back(pt);
    }
    detail::validate_coating(coating, a);
    p.coating = coating;
    return p;
}

enum class ShapeKind { cylinder, cone, sphere };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::sphere;
    double a = 1.0;            // radius (all shapes)
    double L = 0.0;            // cylinder length
    double opening_deg = 0.0;  // cone full opening angle
    std::optional<CoatingSpec> coating;
};

inline GeneratrixProfile make_shape(const ShapeSpec& s) {
    switch (s.kind) {
        case ShapeKind::cylinder: return make_cylinder(s.L, s.a, s.coating);
        case ShapeKind::cone: return make_cone(s.a, s.opening_deg, s.coating);
        case ShapeKind::sphere: return make_sphere(s.a, s.coating);
    }
    throw std::invalid_argument("unknown shape kind");
}

/// One generatrix segment.  Node positions are on the profile polyline;
/// `length` is the polyline arc length between the nodes so that the
/// total mesh length matches the profile length exactly.
struct Segment {
    double rho0 = 0, z0 = 0;   // start node
    double rho1 = 0, z1 = 0;   // end node
    double rho_m = 0, z_m = 0; // midpoint (on the chord)
    double length = 0;         // arc length along the polyline
    double t_rho = 0, t_z = 0; // unit tangent in the rho-z plane
    double n_rho = 0, n_z = 0; // outward unit normal
};

struct SegmentMesh {
    std::vector<Segment> segments;
    GeneratrixProfile profile;  // back-reference (by value; profiles are small)
    double h_max = 0.0;

    double total_length() const {
        double s = 0.0;
        for (const auto& seg : segments) s += seg.length;
        return s;
    }
};

/// Discretize the generatrix with segment lengths <= h_max.  Corner
/// points always become mesh nodes; smooth runs (sphere arc) are
/// resampled uniformly in arc length.
inline SegmentMesh discretize(const GeneratrixProfile& profile, double h_max) {
    if (h_max <= 0.0) throw std::invalid_argument("h_max must be > 0");
    if (profile.points.size() < 2)
        throw std::invalid_argument("profile needs at least 2 points");
    if (profile.points.front().rho != 0.0 || profile.points.back().rho != 0.0)
        throw std::invalid_argument("profile must start and end on the axis (rho = 0)");

    SegmentMesh mesh;
    mesh.profile = profile;
    mesh.h_max = h_max;

    const auto& pts = profile.points;
    std::size_t run_start = 0;
    while (run_start + 1 < pts.size()) {
        // A smooth run extends to the next corner point.
        std::size_t run_end = run_start + 1;
        while (run_end + 1 < pts.size() && !pts[run_end].corner) ++run_end;

        // cumulative arc length over the run's polyline
        std::vector<double> cum(run_end - run_start + 1, 0.0);
        for (std::size_t i = run_start + 1; i <= run_end; ++i)
            cum[i - run_start] = cum[i - run_start - 1] +
                std::hypot(pts[i].rho - pts[i - 1].rho, pts[i].z - pts[i - 1].z);
        const double run_len = cum.back();
        if (run_len <= 0.0)
            throw std::invalid_argument("profile has coincident consecutive points");

        const std::size_t nseg = std::max<std::size_t>(1,
            static_cast<std::size_t>(std::ceil(run_len / h_max - 1e-12)));

        auto point_at = [&](double s) -> std::array<double, 2> {
            // locate s in the cumulative table
            std::size_t lo = 0, hi = cum.size() - 1;
            while (lo + 1 < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (cum[mid] <= s) lo = mid; else hi = mid;
            }
            const double seg_len = cum[lo + 1] - cum[lo];
            const double f = seg_len > 0 ? (s - cum[lo]) / seg_len : 0.0;
            const auto& A = pts[run_start + lo];
            const auto& B = pts[run_start + lo + 1];
            return {A.rho + f * (B.rho - A.rho), A.z + f * (B.z - A.z)};
        };

        for (std::size_t i = 0; i < nseg; ++i) {
            const double s0 = run_len * double(i) / double(nseg);
            const double s1 = run_len * double(i + 1) / double(nseg);
            auto P0 = (i == 0)
                ? std::array<double, 2>{pts[run_start].rho, pts[run_start].z}
                : point_at(s0);
            auto P1 = (i + 1 == nseg)
                ? std::array<double, 2>{pts[run_end].rho, pts[run_end].z}
                : point_at(s1);
            Segment seg;
            seg.rho0 = P0[0]; seg.z0 = P0[1];
            seg.rho1 = P1[0]; seg.z1 = P1[1];
            seg.rho_m = 0.5 * (P0[0] + P1[0]);
            seg.z_m = 0.5 * (P0[1] + P1[1]);
            seg.length = s1 - s0;
            const double chord = std::hypot(P1[0] - P0[0], P1[1] - P0[1]);
            if (chord <= 0.0)
                throw std::invalid_argument("degenerate segment in discretization");
            seg.t_rho = (P1[0] - P0[0]) / chord;
            seg.t_z = (P1[1] - P0[1]) / chord;
            seg.n_rho = seg.t_z;
            seg.n_z = -seg.t_rho;
            mesh.segments.push_back(seg);
        }
        run_start = run_end;
    }

    // Outward orientation check via the divergence-theorem volume.
    double vol = 0.0;
    for (const auto& s : mesh.segments)
        vol += s.rho_m * s.length * (s.n_rho * s.rho_m + s.n_z * s.z_m);
    vol *= 2.0 * pi / 3.0;
    if (vol <= 0.0)
        throw std::invalid_argument(
            "profile orientation yields inward normals; order points "
            "bottom pole to top pole, counterclockwise");
    return mesh;
}

struct Patch {
    std::array<double, 3> centroid{};
    double area = 0.0;
    std::array<double, 3> normal{};     // outward n
    std::array<double, 3> tangent_t{};  // generatrix tangent
    std::array<double, 3> tangent_phi{};
    std::size_t segment = 0;  // originating generatrix segment
    std::size_t iphi = 0;     // azimuth index
};

struct PatchMesh {
    std::vector<Patch> patches;
    std::size_t n_phi = 0;
    std::size_t n_segments = 0;

    double total_area() const {
        double a = 0.0;
        for (const auto& p : patches) a += p.area;
        return a;
    }

    /// Minimum distance between any two patch centroids (sets the
    /// explicit marching time-step bound).
    double min_centroid_spacing() const {
        // nearest neighbours are either adjacent along the generatrix or
        // adjacent in azimuth on the same ring; checking the full ring
        // pair set of neighbouring segments is cheap and safe
        double best = 1e300;
        auto d2 = [](const Patch& p, const Patch& q) {
            double s = 0;
            for (int i = 0; i < 3; ++i) {
                const double d = p.centroid[i] - q.centroid[i];
                s += d * d;
            }
            return s;
        };
        for (std::size_t s = 0; s < n_segments; ++s)
            for (std::size_t j = 0; j < n_phi; ++j) {
                const Patch& p = patches[s * n_phi + j];
                const Patch& qphi = patches[s * n_phi + (j + 1) % n_phi];
                best = std::min(best, d2(p, qphi));
                if (s + 1 < n_segments) {
                    const Patch& qseg = patches[(s + 1) * n_phi + j];
                    best = std::min(best, d2(p, qseg));
                }
            }
        return std::sqrt(best);
    }
};

/// Revolve a segment mesh into a 3-D patch mesh with n_phi azimuthal
/// divisions; azimuth sample j is centered at phi_j = 2*pi*(j+0.5)/n_phi.
inline PatchMesh revolve(const SegmentMesh& mesh, std::size_t n_phi) {
    if (n_phi < 8) throw std::invalid_argument("n_phi must be >= 8");
    PatchMesh pm;
    pm.n_phi = n_phi;
    pm.n_segments = mesh.segments.size();
    pm.patches.reserve(pm.n_segments * n_phi);
    const double dphi = 2.0 * pi / double(n_phi);
    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        const Segment& seg = mesh.segments[s];
        for (std::size_t j = 0; j < n_phi; ++j) {
            const double phi = dphi * (double(j) + 0.5);
            const double cp = std::cos(phi), sp = std::sin(phi);
            Patch p;
            p.centroid = {seg.rho_m * cp, seg.rho_m * sp, seg.z_m};
            // exact area of the revolved strip for linear rho(t)
            p.area = seg.length * seg.rho_m * dphi;
            p.normal = {seg.n_rho * cp, seg.n_rho * sp, seg.n_z};
            p.tangent_t = {seg.t_rho * cp, seg.t_rho * sp, seg.t_z};
            p.tangent_phi = {-sp, cp, 0.0};
            p.segment = s;
            p.iphi = j;
            pm.patches.push_back(p);
        }
    }
    return pm;
}

} // namespace borscat
