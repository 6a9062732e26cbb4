#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "reparam/mobius.hpp"
#include "reparam/sphere.hpp"

namespace reparam {

// Embedded target M. Maps live in the ambient R^m; the projection pins
// values back onto M after interpolation.
struct TargetManifold {
    enum class Tag { unit_sphere_in_R3, flat_torus_in_R4, ambient_Rm };

    Tag tag = Tag::unit_sphere_in_R3;
    int dim = 3;

    static TargetManifold unit_sphere();
    // product of two unit circles, (x1,x2) and (x3,x4)
    static TargetManifold flat_torus();
    static TargetManifold ambient(int m);

    // Nearest-point projection. Points already on the target to working
    // precision are left bitwise untouched, so projecting is idempotent.
    void project(std::span<double> point) const;
    double distance_to(std::span<const double> point) const;

    bool operator==(const TargetManifold& o) const { return tag == o.tag && dim == o.dim; }
};

// Per-vertex samples of a map f: sphere -> M over a fixed mesh.
struct DiscreteMap {
    std::shared_ptr<const SphereMesh> mesh;
    TargetManifold target;
    std::vector<double> values;  // vertex-major, target.dim entries per vertex

    int vertex_count() const { return static_cast<int>(mesh->vertices.size()); }
    std::span<const double> value(int v) const { return {values.data() + static_cast<std::size_t>(v) * target.dim, static_cast<std::size_t>(target.dim)}; }
    std::span<double> value(int v) { return {values.data() + static_cast<std::size_t>(v) * target.dim, static_cast<std::size_t>(target.dim)}; }
    Vec3 value3(int v) const {
        const auto s = value(v);
        return {s[0], s[1], s[2]};
    }
};

// Sobolev exponents (k, p). k is the number of derivatives entering the
// norm, p the integrability exponent.
struct SobolevParams {
    SobolevParams(int k, double p);

    int k;
    double p;

    double m0() const { return k - 2.0 / p; }
    // scaling regime m0 > 1 under which the group action stays proper
    bool strong_regime() const { return m0() > 1.0; }
};

std::shared_ptr<const SphereMesh> make_mesh(int level);

// f composed with g, computed by resampling: vertex i of the result takes
// the interpolated value of f at apply(g, vertex_i), projected to the
// target. Constants are exact fixed points; g = identity returns f as is.
DiscreteMap pullback(const DiscreteMap& f, const MobiusElement& g);

// Ambient difference field values(f) - values(h); throws MeshMismatch.
std::vector<double> map_difference(const DiscreteMap& f, const DiscreteMap& h);

// Throws MeshMismatch unless f and h share mesh resolution and target.
void require_same_space(const DiscreteMap& f, const DiscreteMap& h);

DiscreteMap identity_map(std::shared_ptr<const SphereMesh> mesh);
DiscreteMap constant_map(std::shared_ptr<const SphereMesh> mesh, const Vec3& q);
// chart self-map z -> z^d, poles fixed by continuity
DiscreteMap power_map(std::shared_ptr<const SphereMesh> mesh, int d);
// constant on latitude circles about the z axis: the profile samples a path
// in the target at uniform parameters over z in [-1, 1]
DiscreteMap axis_map(std::shared_ptr<const SphereMesh> mesh, const std::vector<Vec3>& profile);
// adds a smooth bump supported in the geodesic ball (center, radius) along
// a seeded random ambient direction, then reprojects
DiscreteMap bump_perturb(const DiscreteMap& f, const Vec3& center, double radius, double amplitude,
                         std::uint64_t seed);

}  // namespace reparam
