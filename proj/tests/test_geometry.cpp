#include <catch_amalgamated.hpp>

#include <cmath>

#include "borscat/constants.hpp"
#include "borscat/geometry.hpp"

using namespace borscat;

TEST_CASE("cylinder profile matches the closed generatrix contract") {
    const auto p = make_cylinder(5.0, 1.0);
    REQUIRE(p.points.size() == 4);
    CHECK(p.points[0].rho == 0.0);
    CHECK(p.points[0].z == -2.5);
    CHECK(p.points[1].rho == 1.0);
    CHECK(p.points[1].z == -2.5);
    CHECK(p.points[2].rho == 1.0);
    CHECK(p.points[2].z == 2.5);
    CHECK(p.points[3].rho == 0.0);
    CHECK(p.points[3].z == 2.5);
    CHECK(p.polyline_length() == Catch::Approx(7.0).epsilon(1e-14));
    // revolved area: two caps (pi a^2 each) + wall (2 pi a L) = 12 pi
    const auto mesh = discretize(p, 0.25);
    const auto pm = revolve(mesh, 64);
    CHECK(pm.total_area() == Catch::Approx(12.0 * pi).epsilon(1e-3));
}

TEST_CASE("cone vertex height follows from the opening angle") {
    const auto p = make_cone(1.0, 23.0);
    REQUIRE(p.points.size() == 3);
    CHECK(p.points.back().z ==
          Catch::Approx(1.0 / std::tan(11.5 * pi / 180.0)).epsilon(1e-12));
    CHECK(p.points.back().z == Catch::Approx(4.9152).epsilon(1e-4));
}

TEST_CASE("shape constructors reject invalid parameters") {
    CHECK_THROWS_AS(make_cylinder(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cylinder(5.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cone(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cone(1.0, 180.0), std::invalid_argument);
    CHECK_THROWS_AS(make_sphere(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cylinder(5.0, 1.0, CoatingSpec{0.5, 0.01}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_cylinder(5.0, 1.0, CoatingSpec{2.0, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_cylinder(5.0, 1.0, CoatingSpec{2.0, 0.5}),
                    std::invalid_argument);  // d > 0.2 * a
}

TEST_CASE("discretize honors h_max, corners, and length conservation") {
    const auto p = make_cylinder(5.0, 1.0);
    const auto mesh = discretize(p, 0.5);
    // bottom cap 2, wall 10, top cap 2
    CHECK(mesh.segments.size() == 14);
    for (const auto& s : mesh.segments) CHECK(s.length <= 0.5 + 1e-12);
    // the corner (1, -2.5) survives as a node
    bool corner_found = false;
    for (const auto& s : mesh.segments)
        if (std::abs(s.rho0 - 1.0) < 1e-14 && std::abs(s.z0 + 2.5) < 1e-14)
            corner_found = true;
    CHECK(corner_found);
    CHECK(std::abs(mesh.total_length() - 7.0) <= 1e-12 * 7.0);

    CHECK_THROWS_AS(discretize(p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(discretize(p, -1.0), std::invalid_argument);
}

TEST_CASE("discretize is deterministic") {
    const auto p = make_sphere(1.0);
    const auto a = discretize(p, 0.1);
    const auto b = discretize(p, 0.1);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].rho0 == b.segments[i].rho0);
        CHECK(a.segments[i].z0 == b.segments[i].z0);
        CHECK(a.segments[i].length == b.segments[i].length);
    }
}

TEST_CASE("revolved sphere mesh: area, count, orientation") {
    const auto p = make_sphere(1.0);
    const auto mesh = discretize(p, 1.0 / 16.0);
    const auto pm = revolve(mesh, 64);
    CHECK(pm.patches.size() == mesh.segments.size() * 64);
    CHECK(pm.total_area() == Catch::Approx(4.0 * pi).epsilon(0.01));
    for (const auto& patch : pm.patches) {
        const double ndotr = patch.normal[0] * patch.centroid[0] +
                             patch.normal[1] * patch.centroid[1] +
                             patch.normal[2] * patch.centroid[2];
        REQUIRE(ndotr > 0.0);
    }
    CHECK_THROWS_AS(revolve(mesh, 7), std::invalid_argument);
}

TEST_CASE("patch area error decreases under refinement") {
    const auto sphere = make_sphere(1.0);
    const auto cyl = make_cylinder(5.0, 1.0);
    auto area_err = [](const GeneratrixProfile& p, double h, std::size_t nphi,
                       double exact) {
        return std::abs(revolve(discretize(p, h), nphi).total_area() - exact) /
               exact;
    };
    const double s1 = area_err(sphere, 0.25, 16, 4.0 * pi);
    const double s2 = area_err(sphere, 0.125, 32, 4.0 * pi);
    const double s3 = area_err(sphere, 0.0625, 64, 4.0 * pi);
    CHECK(s2 < s1);
    CHECK(s3 < s2);
    const double c1 = area_err(cyl, 0.5, 16, 12.0 * pi);
    const double c2 = area_err(cyl, 0.25, 32, 12.0 * pi);
    CHECK(c2 <= c1 + 1e-12);
}

TEST_CASE("profile closedness is enforced") {
    GeneratrixProfile open;
    open.points = {{0.5, 0.0}, {1.0, 1.0}, {0.0, 2.0}};
    CHECK_THROWS_AS(discretize(open, 0.1), std::invalid_argument);
    // inward orientation (clockwise profile) is rejected
    GeneratrixProfile cw;
    cw.points = {{0.0, 2.5}, {1.0, 2.5}, {1.0, -2.5}, {0.0, -2.5}};
    CHECK_THROWS_AS(discretize(cw, 0.25), std::invalid_argument);
}

TEST_CASE("diameter is the largest chord of the revolved body") {
    const auto cyl = make_cylinder(5.0, 1.0);
    CHECK(cyl.diameter() == Catch::Approx(std::sqrt(29.0)).epsilon(1e-12));
    const auto sph = make_sphere(2.0);
    CHECK(sph.diameter() == Catch::Approx(4.0).epsilon(1e-6));
}
