#include "reparam/mapspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reparam/errors.hpp"
#include "reparam/parallel.hpp"
#include "reparam/rng.hpp"

namespace reparam {

namespace {

constexpr double kOnTargetTol = 1e-13;

// normalize (x, y) to the unit circle, bitwise no-op when already there
void project_pair(double& x, double& y) {
    const double n2 = x * x + y * y;
    if (std::abs(n2 - 1.0) <= kOnTargetTol) return;
    if (n2 < 1e-30) {
        x = 1.0;
        y = 0.0;
        return;
    }
    const double inv = 1.0 / std::sqrt(n2);
    x *= inv;
    y *= inv;
}

}  // namespace

TargetManifold TargetManifold::unit_sphere() { return {Tag::unit_sphere_in_R3, 3}; }

TargetManifold TargetManifold::flat_torus() { return {Tag::flat_torus_in_R4, 4}; }

TargetManifold TargetManifold::ambient(int m) {
    if (m < 1) throw std::invalid_argument("TargetManifold::ambient: dimension must be positive");
    return {Tag::ambient_Rm, m};
}

void TargetManifold::project(std::span<double> point) const {
    switch (tag) {
        case Tag::unit_sphere_in_R3: {
            const double n2 = point[0] * point[0] + point[1] * point[1] + point[2] * point[2];
            if (std::abs(n2 - 1.0) <= kOnTargetTol) return;
            if (n2 < 1e-30) {
                point[0] = 0.0;
                point[1] = 0.0;
                point[2] = 1.0;
                return;
            }
            const double inv = 1.0 / std::sqrt(n2);
            for (double& x : point) x *= inv;
            return;
        }
        case Tag::flat_torus_in_R4:
            project_pair(point[0], point[1]);
            project_pair(point[2], point[3]);
            return;
        case Tag::ambient_Rm:
            return;
    }
}

double TargetManifold::distance_to(std::span<const double> point) const {
    switch (tag) {
        case Tag::unit_sphere_in_R3: {
            const double n = std::sqrt(point[0] * point[0] + point[1] * point[1] + point[2] * point[2]);
            return std::abs(n - 1.0);
        }
        case Tag::flat_torus_in_R4: {
            const double r1 = std::hypot(point[0], point[1]);
            const double r2 = std::hypot(point[2], point[3]);
            return std::hypot(r1 - 1.0, r2 - 1.0);
        }
        case Tag::ambient_Rm:
            return 0.0;
    }
    return 0.0;
}

SobolevParams::SobolevParams(int k_, double p_) : k(k_), p(p_) {
    if (k != 1 && k != 2) throw std::invalid_argument("SobolevParams: k must be 1 or 2");
    if (!(p > 1.0)) throw std::invalid_argument("SobolevParams: p must exceed 1");
}

std::shared_ptr<const SphereMesh> make_mesh(int level) {
    return std::make_shared<const SphereMesh>(build_icosphere(level));
}

void require_same_space(const DiscreteMap& f, const DiscreteMap& h) {
    if (!f.mesh || !h.mesh || f.mesh->level != h.mesh->level ||
        f.mesh->vertices.size() != h.mesh->vertices.size()) {
        throw MeshMismatch("maps live on different meshes");
    }
    if (!(f.target == h.target)) throw MeshMismatch("maps have different targets");
}

DiscreteMap pullback(const DiscreteMap& f, const MobiusElement& g) {
    if (g == MobiusElement::identity()) return f;

    const SphereMesh& mesh = *f.mesh;
    const int m = f.target.dim;
    DiscreteMap out;
    out.mesh = f.mesh;
    out.target = f.target;
    out.values.resize(f.values.size());

    parallel_for(mesh.vertices.size(), [&](std::size_t i) {
        const Vec3 q = apply(g, mesh.vertices[i]);
        const BarycentricPoint loc = locate(mesh, q);
        const Face& fc = mesh.faces[loc.face];
        const double b1 = loc.weights[1], b2 = loc.weights[2];
        double* dst = out.values.data() + i * m;
        const double* v0 = f.values.data() + static_cast<std::size_t>(fc[0]) * m;
        const double* v1 = f.values.data() + static_cast<std::size_t>(fc[1]) * m;
        const double* v2 = f.values.data() + static_cast<std::size_t>(fc[2]) * m;
        // base-corner form: equal corner values pass through bitwise
        for (int d = 0; d < m; ++d) dst[d] = v0[d] + b1 * (v1[d] - v0[d]) + b2 * (v2[d] - v0[d]);
        f.target.project({dst, static_cast<std::size_t>(m)});
    });
    return out;
}

std::vector<double> map_difference(const DiscreteMap& f, const DiscreteMap& h) {
    require_same_space(f, h);
    std::vector<double> diff(f.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = f.values[i] - h.values[i];
    return diff;
}

DiscreteMap identity_map(std::shared_ptr<const SphereMesh> mesh) {
    DiscreteMap f;
    f.target = TargetManifold::unit_sphere();
    f.values.reserve(mesh->vertices.size() * 3);
    for (const Vec3& v : mesh->vertices) {
        f.values.push_back(v.x);
        f.values.push_back(v.y);
        f.values.push_back(v.z);
    }
    f.mesh = std::move(mesh);
    return f;
}

DiscreteMap constant_map(std::shared_ptr<const SphereMesh> mesh, const Vec3& q) {
    DiscreteMap f;
    f.target = TargetManifold::unit_sphere();
    double point[3] = {q.x, q.y, q.z};
    f.target.project({point, 3});
    f.values.resize(mesh->vertices.size() * 3);
    for (std::size_t i = 0; i < mesh->vertices.size(); ++i) {
        f.values[3 * i] = point[0];
        f.values[3 * i + 1] = point[1];
        f.values[3 * i + 2] = point[2];
    }
    f.mesh = std::move(mesh);
    return f;
}

DiscreteMap power_map(std::shared_ptr<const SphereMesh> mesh, int d) {
    if (d < 1) throw std::invalid_argument("power_map: degree must be at least 1");
    DiscreteMap f;
    f.target = TargetManifold::unit_sphere();
    f.values.resize(mesh->vertices.size() * 3);
    for (std::size_t i = 0; i < mesh->vertices.size(); ++i) {
        auto [Z, W] = sphere_to_homog(mesh->vertices[i]);
        // [Z:W] -> [Z^d:W^d]; rescale so powers of the larger entry stay at 1
        const double s = std::max(std::abs(Z), std::abs(W));
        Z /= s;
        W /= s;
        Complex Zp(1.0), Wp(1.0);
        for (int e = 0; e < d; ++e) {
            Zp *= Z;
            Wp *= W;
        }
        const Vec3 q = homog_to_sphere(Zp, Wp);
        f.values[3 * i] = q.x;
        f.values[3 * i + 1] = q.y;
        f.values[3 * i + 2] = q.z;
        f.target.project({f.values.data() + 3 * i, 3});
    }
    f.mesh = std::move(mesh);
    return f;
}

DiscreteMap axis_map(std::shared_ptr<const SphereMesh> mesh, const std::vector<Vec3>& profile) {
    if (profile.size() < 2) throw BadProfile("axis_map: profile needs at least two samples");
    std::vector<Vec3> path;
    path.reserve(profile.size());
    const TargetManifold sphere = TargetManifold::unit_sphere();
    for (const Vec3& q : profile) {
        if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z) || norm(q) < 1e-9) {
            throw BadProfile("axis_map: profile sample is not a usable target point");
        }
        double point[3] = {q.x, q.y, q.z};
        sphere.project({point, 3});
        path.push_back({point[0], point[1], point[2]});
    }

    DiscreteMap f;
    f.target = sphere;
    f.values.resize(mesh->vertices.size() * 3);
    const int n = static_cast<int>(path.size());
    for (std::size_t i = 0; i < mesh->vertices.size(); ++i) {
        const double t = std::clamp(mesh->vertices[i].z, -1.0, 1.0);
        const double s = 0.5 * (t + 1.0) * (n - 1);
        const int i0 = std::min(static_cast<int>(s), n - 2);
        const double frac = s - i0;
        const Vec3 q = path[i0] + (path[i0 + 1] - path[i0]) * frac;
        f.values[3 * i] = q.x;
        f.values[3 * i + 1] = q.y;
        f.values[3 * i + 2] = q.z;
        f.target.project({f.values.data() + 3 * i, 3});
    }
    f.mesh = std::move(mesh);
    return f;
}

DiscreteMap bump_perturb(const DiscreteMap& f, const Vec3& center, double radius, double amplitude,
                         std::uint64_t seed) {
    if (!(radius > 0.0)) throw std::invalid_argument("bump_perturb: radius must be positive");
    Rng rng(seed);
    const int m = f.target.dim;
    std::vector<double> dir(m);
    double n2 = 0.0;
    for (double& x : dir) {
        x = rng.normal();
        n2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : dir) x *= inv;

    const Vec3 c = normalized(center);
    DiscreteMap out = f;
    for (std::size_t i = 0; i < f.mesh->vertices.size(); ++i) {
        const double t = geodesic_distance(f.mesh->vertices[i], c) / radius;
        if (t >= 1.0) continue;
        const double w = amplitude * 0.5 * (1.0 + std::cos(M_PI * t));
        double* dst = out.values.data() + i * m;
        for (int d = 0; d < m; ++d) dst[d] += w * dir[d];
        f.target.project({dst, static_cast<std::size_t>(m)});
    }
    return out;
}

}  // namespace reparam
