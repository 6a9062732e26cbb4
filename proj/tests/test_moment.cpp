#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "reparam/errors.hpp"
#include "reparam/moment.hpp"

using namespace reparam;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 rodrigues(const Vec3& axis, double angle, const Vec3& p) {
    const Vec3 n = normalized(axis);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return p * c + cross(n, p) * s + n * (dot(n, p) * (1.0 - c));
}

std::array<double, 3> rotate_components(const Vec3& axis, double angle,
                                        const std::array<double, 3>& m) {
    // components transform by the inverse rotation
    const Vec3 r = rodrigues(axis, -angle, Vec3{m[0], m[1], m[2]});
    return {r.x, r.y, r.z};
}

}  // namespace

TEST_CASE("oriented rotation: validation and axis normalization") {
    const OrientedRotation r(Vec3{0.0, 0.0, 2.5}, 0.7);
    CHECK(std::abs(r.axis.z - 1.0) <= 1e-15);
    CHECK(r.angle == 0.7);
    CHECK_NOTHROW(OrientedRotation(Vec3{1.0, 0.0, 0.0}, 0.0));
    CHECK_NOTHROW(OrientedRotation(Vec3{1.0, 0.0, 0.0}, kPi));
    CHECK_THROWS_AS(OrientedRotation(Vec3{0.0, 0.0, 0.0}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(OrientedRotation(Vec3{1.0, 0.0, 0.0}, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(OrientedRotation(Vec3{1.0, 0.0, 0.0}, kPi + 0.1), std::invalid_argument);
}

TEST_CASE("pair depends on the rotation through the axis alone") {
    const auto mesh = make_mesh(4);
    const DiscreteMap f = pullback(identity_map(mesh), MobiusElement::diagonal(Complex(3.0, 0.0)));
    const Vec3 axis = normalized(Vec3{0.2, -0.5, 0.9});
    const double at_small = pseudo_moment_pair(f, OrientedRotation(axis, 0.2));
    const double at_large = pseudo_moment_pair(f, OrientedRotation(axis, 2.9));
    CHECK(at_small == at_large);
}

TEST_CASE("identity and constant moments") {
    const auto mesh = make_mesh(5);
    const DiscreteMap id = identity_map(mesh);
    const double v = volume(id);
    const MomentVector m = pseudo_moment(id);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(m.components[i]) <= 0.01 * (v / 2.0));
    }

    const DiscreteMap c = constant_map(mesh, Vec3{0.0, 0.8, 0.6});
    for (int i = 0; i < 3; ++i) {
        CHECK(pseudo_moment(c).components[i] == 0.0);
    }
}

TEST_CASE("dilation closed forms") {
    const auto mesh = make_mesh(5);
    const DiscreteMap id = identity_map(mesh);

    // chart multiplier M sends the lower half-domain to the chart disc of
    // radius M, whose spherical area is 4 pi M^2 / (1 + M^2)
    const DiscreteMap f2 = pullback(id, MobiusElement::diagonal(Complex(2.0, 0.0)));
    const double expect2 = 2.0 * kPi - 4.0 * kPi * (4.0 / 5.0);  // -6 pi / 5
    const double mz2 = pseudo_moment(f2).components[2];
    CHECK(std::abs(mz2 - expect2) <= 0.03 * std::abs(expect2));

    const DiscreteMap f4 = pullback(id, MobiusElement::diagonal(Complex(4.0, 0.0)));
    const double expect4 = 2.0 * kPi - 4.0 * kPi * (16.0 / 17.0);  // -30 pi / 17
    const MomentVector m4 = pseudo_moment(f4);
    CHECK(std::abs(m4.components[2] - expect4) <= 0.03 * std::abs(expect4));

    // rotational symmetry about z kills the other two components, up to
    // restriction noise along the cap boundary where the mass piles up
    CHECK(std::abs(m4.components[0]) <= 0.03 * (volume(f4) / 2.0));
    CHECK(std::abs(m4.components[1]) <= 0.03 * (volume(f4) / 2.0));
}

TEST_CASE("hemisphere split discrepancy equals the straddling-face volume") {
    const auto mesh = make_mesh(5);
    const DiscreteMap id = identity_map(mesh);
    const Vec3 axis{0.0, 0.0, 1.0};

    const double up = pseudo_moment_pair(id, OrientedRotation(axis, 1.0));
    const double down = pseudo_moment_pair(id, OrientedRotation(-axis, 1.0));
    const double discrepancy = up + down;

    // for the identity the per-face image area is exactly the flat face
    // area, so the split defect is the flat area of the straddling faces
    double straddle_area = 0.0;
    int straddle_count = 0;
    for (std::size_t i = 0; i < mesh->faces.size(); ++i) {
        const Face& fc = mesh->faces[i];
        bool all_low = true;
        bool all_up = true;
        for (int e = 0; e < 3; ++e) {
            const double z = mesh->vertices[fc[e]].z;
            if (!(z <= 1e-12)) all_low = false;
            if (!(-z <= 1e-12)) all_up = false;
        }
        if (!all_low && !all_up) {
            straddle_area += mesh->face_areas[i];
            ++straddle_count;
        }
    }
    CHECK(straddle_count > 0);
    CHECK(discrepancy >= -1e-12);
    CHECK(std::abs(discrepancy - straddle_area) <= 1e-10);
}

TEST_CASE("components are bounded by half the volume") {
    const auto mesh = make_mesh(4);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap maps[] = {
        id,
        power_map(mesh, 2),
        pullback(id, MobiusElement::diagonal(Complex(4.0, 0.0))),
        bump_perturb(id, Vec3{0.0, 0.6, 0.8}, 0.9, 0.4, 11u),
    };
    for (const DiscreteMap& f : maps) {
        const double v = volume(f);
        const MomentVector m = pseudo_moment(f);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(m.components[i]) <= v / 2.0 + 1e-9);
        }
    }
}

TEST_CASE("rotation equivariance") {
    const auto mesh = make_mesh(5);
    const DiscreteMap base = power_map(mesh, 2);
    const DiscreteMap f = bump_perturb(base, Vec3{0.6, 0.0, 0.8}, 0.8, 0.35, 7u);
    const double v = volume(f);

    const Vec3 axis = normalized(Vec3{3.0, 4.0, 12.0});
    const double angle = 0.7;
    const MobiusElement u = MobiusElement::rotation(axis, angle);

    const MomentVector m0 = pseudo_moment(f);
    const MomentVector m1 = pseudo_moment(pullback(f, u));
    const auto expected = rotate_components(axis, angle, m0.components);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(m1.components[i] - expected[i]) <= 0.02 * v);
    }
}

TEST_CASE("cap level sensitivity probe") {
    const auto mesh = make_mesh(5);
    const DiscreteMap id = identity_map(mesh);
    const MomentPairProbe probe = pseudo_moment_pair_probe(id, OrientedRotation(Vec3{0, 0, 1}, 0.4));
    CHECK(probe.value == pseudo_moment_pair(id, OrientedRotation(Vec3{0, 0, 1}, 0.4)));
    // moving the equator by one edge length sweeps a band of area about
    // 2 pi h; the probe should land within a broad factor of that
    double h = 0.0;
    for (const Face& fc : mesh->faces) {
        for (int e = 0; e < 3; ++e) {
            h = std::max(h, distance(mesh->vertices[fc[e]], mesh->vertices[fc[(e + 1) % 3]]));
        }
    }
    CHECK(probe.sensitivity > 0.2 * 2.0 * kPi * h);
    CHECK(probe.sensitivity < 3.0 * 2.0 * kPi * h);
    MESSAGE("pair sensitivity to one-edge cap shift: " << probe.sensitivity
                                                       << " (band area " << 2.0 * kPi * h << ")");
}

TEST_CASE("center_map: identity is already centered") {
    const auto mesh = make_mesh(5);
    const DiscreteMap id = identity_map(mesh);

    const CenteringResult coarse = center_map(id, 0.2);
    CHECK(coarse.converged);
    CHECK(coarse.iterations == 0);
    CHECK(coarse.g == MobiusElement::identity());

    const CenteringResult fine = center_map(id, 0.02);
    CHECK(fine.converged);
    CHECK(fine.residual <= 0.02);
    CHECK(kak_decompose(fine.g).a <= 1.05);
}

TEST_CASE("center_map: recovers the inverse dilation") {
    const auto mesh = make_mesh(5);
    const DiscreteMap f = pullback(identity_map(mesh), MobiusElement::diagonal(Complex(4.0, 0.0)));
    const double tol = 1e-3 * volume(f);

    const CenteringResult res = center_map(f, tol);
    CHECK(res.converged);
    CHECK(res.residual <= tol);

    const double a = kak_decompose(res.g).a;
    CHECK(std::abs(a - 2.0) <= 0.05 * 2.0);

    // the centering element is self-adjoint: no rotational part
    const Mat2 g = res.g.matrix();
    const Mat2 ga = g.adjoint();
    CHECK(std::abs(g.a - ga.a) <= 1e-10);
    CHECK(std::abs(g.b - ga.b) <= 1e-10);
    CHECK(std::abs(g.c - ga.c) <= 1e-10);
    CHECK(std::abs(g.d - ga.d) <= 1e-10);

    // reported residual matches a fresh evaluation on the centered map
    CHECK(res.residual == pseudo_moment(res.f_centered).norm());

    // centering again is a no-op at the same tolerance
    const CenteringResult again = center_map(res.f_centered, tol);
    CHECK(again.iterations == 0);
    CHECK(kak_decompose(again.g).a <= 1.0 + 1e-3);
}

TEST_CASE("center_map: guards and non-convergence reporting") {
    const auto mesh = make_mesh(4);
    const DiscreteMap c = constant_map(mesh, Vec3{1.0, 0.0, 0.0});
    CHECK_THROWS_AS(center_map(c, 1e-3), NotVStable);

    const DiscreteMap id = identity_map(mesh);
    CHECK_THROWS_AS(center_map(id, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(center_map(id, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(center_map(id, 1e-3, 0), std::invalid_argument);

    const DiscreteMap f = pullback(id, MobiusElement::diagonal(Complex(4.0, 0.0)));
    const CenteringResult res = center_map(f, 1e-12, 2);
    CHECK(!res.converged);
    CHECK(res.iterations == 2);
    CHECK(res.residual > 0.0);
    CHECK(res.residual == pseudo_moment(res.f_centered).norm());
    // the best iterate still improves on the starting point
    CHECK(res.residual < pseudo_moment(f).norm());
}
