#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "reparam/errors.hpp"
#include "reparam/mapspace.hpp"
#include "reparam/rng.hpp"

using namespace reparam;

namespace {

double c0_diff(const DiscreteMap& f, const DiscreteMap& h) {
    const std::vector<double> d = map_difference(f, h);
    const int m = f.target.dim;
    double worst = 0.0;
    for (int v = 0; v < f.vertex_count(); ++v) {
        double n2 = 0.0;
        for (int k = 0; k < m; ++k) n2 += d[v * m + k] * d[v * m + k];
        worst = std::max(worst, std::sqrt(n2));
    }
    return worst;
}

double lipschitz_estimate(const DiscreteMap& f) {
    double worst = 0.0;
    const int m = f.target.dim;
    for (const Face& fc : f.mesh->faces) {
        for (int e = 0; e < 3; ++e) {
            const int i = fc[e], j = fc[(e + 1) % 3];
            double n2 = 0.0;
            for (int k = 0; k < m; ++k) {
                const double d = f.values[i * m + k] - f.values[j * m + k];
                n2 += d * d;
            }
            worst = std::max(worst, std::sqrt(n2) / distance(f.mesh->vertices[i], f.mesh->vertices[j]));
        }
    }
    return worst;
}

double mesh_size(const SphereMesh& mesh) {
    double h = 0.0;
    for (const Face& fc : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            h = std::max(h, distance(mesh.vertices[fc[e]], mesh.vertices[fc[(e + 1) % 3]]));
        }
    }
    return h;
}

}  // namespace

TEST_CASE("target projections are nearest points and idempotent") {
    Rng rng(2);
    for (const TargetManifold target :
         {TargetManifold::unit_sphere(), TargetManifold::flat_torus(), TargetManifold::ambient(5)}) {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> x(target.dim);
            for (double& v : x) v = rng.normal() * 2.0;
            std::vector<double> p = x;
            target.project(p);
            CHECK(target.distance_to(p) <= 1e-12);

            // projecting twice changes nothing
            std::vector<double> p2 = p;
            target.project(p2);
            CHECK(p2 == p);

            // no sampled target point is closer than the projection
            double moved = 0.0;
            for (int k = 0; k < target.dim; ++k) moved += (p[k] - x[k]) * (p[k] - x[k]);
            for (int s = 0; s < 100; ++s) {
                std::vector<double> t(target.dim);
                for (double& v : t) v = rng.normal();
                target.project(t);
                double d = 0.0;
                for (int k = 0; k < target.dim; ++k) d += (t[k] - x[k]) * (t[k] - x[k]);
                CHECK(d >= moved - 1e-12);
            }
        }
    }
}

TEST_CASE("sobolev params validate their regime") {
    const SobolevParams sp(2, 4.0);
    CHECK(sp.m0() == doctest::Approx(1.5));
    CHECK(sp.strong_regime());
    CHECK_FALSE(SobolevParams(1, 2.0).strong_regime());
    CHECK_THROWS_AS(SobolevParams(3, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(SobolevParams(0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(SobolevParams(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SobolevParams(1, 0.5), std::invalid_argument);
}

TEST_CASE("stock generators produce on-target maps") {
    auto mesh = make_mesh(3);
    const std::vector<Vec3> profile = {{0.0, 0.0, -1.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    for (const DiscreteMap& f : {identity_map(mesh), constant_map(mesh, {0.3, -2.0, 0.4}), power_map(mesh, 3),
                                 axis_map(mesh, profile)}) {
        CHECK(f.vertex_count() == 642);
        for (int v = 0; v < f.vertex_count(); ++v) CHECK(f.target.distance_to(f.value(v)) <= 1e-9);
    }
    CHECK_THROWS_AS(power_map(mesh, 0), std::invalid_argument);
    CHECK_THROWS_AS(axis_map(mesh, {{1.0, 0.0, 0.0}}), BadProfile);
    CHECK_THROWS_AS(axis_map(mesh, {{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}), BadProfile);
}

TEST_CASE("power map matches z^d in the chart at every vertex") {
    auto mesh = make_mesh(3);
    for (int d : {1, 2, 3, 5}) {
        const DiscreteMap f = power_map(mesh, d);
        for (int v = 0; v < f.vertex_count(); ++v) {
            const Complex z = sphere_to_stereo(mesh->vertices[v]);
            const Complex w = sphere_to_stereo(f.value3(v));
            if (std::isinf(z.real()) || std::abs(z) > 1e6) continue;
            Complex zd(1.0);
            for (int e = 0; e < d; ++e) zd *= z;
            if (std::abs(zd) > 1e6) continue;
            CHECK(std::abs(w - zd) <= 1e-9 * (1.0 + std::abs(zd)));
        }
    }

    // degree 1 is the identity map up to roundoff
    const DiscreteMap p1 = power_map(mesh, 1);
    const DiscreteMap id = identity_map(mesh);
    CHECK(c0_diff(p1, id) <= 1e-14);
}

TEST_CASE("axis map with a constant profile is the constant map") {
    auto mesh = make_mesh(2);
    const Vec3 q{0.0, 0.6, 0.8};
    const DiscreteMap a = axis_map(mesh, {q, q, q, q});
    const DiscreteMap c = constant_map(mesh, q);
    CHECK(a.values == c.values);
}

TEST_CASE("pullback by the identity returns the map unchanged") {
    auto mesh = make_mesh(3);
    const DiscreteMap f = power_map(mesh, 2);
    const DiscreteMap g = pullback(f, MobiusElement::identity());
    CHECK(g.values == f.values);
}

TEST_CASE("constants are exact fixed points of every pullback") {
    auto mesh = make_mesh(3);
    const DiscreteMap c = constant_map(mesh, {-0.2, 0.1, 0.97});
    for (int i = 0; i < 10; ++i) {
        const MobiusElement g = random_element(6.0, GroupFamily::G0, 10 + i);
        CHECK(pullback(c, g).values == c.values);
    }
    for (int n = 1; n <= 6; ++n) {
        const MobiusElement g = escape_sequence(GroupFamily::G0, EscapeMode::translate_to_inf, n);
        CHECK(pullback(c, g).values == c.values);
    }
}

TEST_CASE("pullback of the identity map is the pointwise action") {
    auto mesh = make_mesh(4);
    const DiscreteMap id = identity_map(mesh);
    Rng rng(71);
    for (int trial = 0; trial < 8; ++trial) {
        const MobiusElement g = random_element(4.0, GroupFamily::G0, 500 + trial);
        const DiscreteMap fg = pullback(id, g);
        double worst = 0.0;
        for (int v = 0; v < fg.vertex_count(); ++v) {
            worst = std::max(worst, distance(fg.value3(v), apply(g, mesh->vertices[v])));
        }
        // the interpolant of the identity re-normalizes to the sample point
        // itself, so only roundoff remains
        CHECK(worst <= 1e-9);
    }
    const MobiusElement u = MobiusElement::rotation(rng.unit_vector(), 1.3);
    const DiscreteMap fu = pullback(id, u);
    double worst = 0.0;
    for (int v = 0; v < fu.vertex_count(); ++v) {
        worst = std::max(worst, distance(fu.value3(v), apply(u, mesh->vertices[v])));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("pullbacks compose up to interpolation error") {
    auto mesh = make_mesh(4);
    const double h = mesh_size(*mesh);
    const std::vector<Vec3> profile = {{0.0, 0.0, -1.0}, {0.8, 0.0, -0.6}, {0.0, 0.8, 0.6}, {0.0, 0.0, 1.0}};
    const DiscreteMap stocks[] = {identity_map(mesh), power_map(mesh, 2), axis_map(mesh, profile),
                                  bump_perturb(identity_map(mesh), {1.0, 0.0, 0.0}, 0.8, 0.35, 9)};
    int trial = 0;
    for (const DiscreteMap& f : stocks) {
        for (int rep = 0; rep < 13; ++rep, ++trial) {
            const MobiusElement g1 = random_element(2.0, GroupFamily::G0, 900 + 2 * trial);
            const MobiusElement g2 = random_element(2.0, GroupFamily::G0, 901 + 2 * trial);
            const DiscreteMap fg2 = pullback(f, g2);
            const DiscreteMap two_step = pullback(fg2, g1);
            const DiscreteMap one_step = pullback(f, compose(g2, g1));
            const double lip = std::max(lipschitz_estimate(f), lipschitz_estimate(fg2));
            CHECK(c0_diff(two_step, one_step) <= 5.0 * h * lip);
        }
    }
}

TEST_CASE("values stay on the target through long pullback pipelines") {
    auto mesh = make_mesh(3);
    DiscreteMap f = power_map(mesh, 2);
    for (int i = 0; i < 10; ++i) {
        f = pullback(f, random_element(3.0, GroupFamily::G0, 40 + i));
        for (int v = 0; v < f.vertex_count(); ++v) CHECK(f.target.distance_to(f.value(v)) <= 1e-8);
    }
}

TEST_CASE("map difference and mismatch guards") {
    auto mesh = make_mesh(3);
    const DiscreteMap id = identity_map(mesh);

    DiscreteMap anti = id;
    for (double& v : anti.values) v = -v;

    const std::vector<double> d = map_difference(id, anti);
    for (int v = 0; v < id.vertex_count(); ++v) {
        const double mag = std::sqrt(d[3 * v] * d[3 * v] + d[3 * v + 1] * d[3 * v + 1] + d[3 * v + 2] * d[3 * v + 2]);
        CHECK(mag == doctest::Approx(2.0).epsilon(1e-12));
    }
    CHECK(c0_diff(id, id) == 0.0);

    const DiscreteMap other = identity_map(make_mesh(2));
    CHECK_THROWS_AS(map_difference(id, other), MeshMismatch);

    DiscreteMap torus;
    torus.mesh = mesh;
    torus.target = TargetManifold::flat_torus();
    torus.values.assign(static_cast<std::size_t>(id.vertex_count()) * 4, 0.5);
    CHECK_THROWS_AS(map_difference(id, torus), MeshMismatch);
}

TEST_CASE("bump perturbation is local, seeded, and on target") {
    auto mesh = make_mesh(3);
    const DiscreteMap id = identity_map(mesh);
    const Vec3 center{0.0, 0.0, -1.0};
    const DiscreteMap b1 = bump_perturb(id, center, 0.6, 0.2, 11);
    const DiscreteMap b2 = bump_perturb(id, center, 0.6, 0.2, 11);
    const DiscreteMap b3 = bump_perturb(id, center, 0.6, 0.2, 12);
    CHECK(b1.values == b2.values);
    CHECK(c0_diff(b1, b3) > 0.0);

    int changed = 0;
    for (int v = 0; v < id.vertex_count(); ++v) {
        const bool outside = geodesic_distance(mesh->vertices[v], center) >= 0.6;
        const bool same = b1.value3(v).x == id.value3(v).x && b1.value3(v).y == id.value3(v).y &&
                          b1.value3(v).z == id.value3(v).z;
        if (outside) CHECK(same);
        if (!same) ++changed;
        CHECK(b1.target.distance_to(b1.value(v)) <= 1e-9);
    }
    CHECK(changed > 0);
}
