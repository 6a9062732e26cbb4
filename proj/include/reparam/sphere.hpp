#pragma once

#include <array>
#include <vector>

#include "reparam/stereo.hpp"
#include "reparam/vec3.hpp"

namespace reparam {

using Face = std::array<int, 3>;

// Triangulated unit sphere: subdivided icosahedron with vertices pushed back
// to the sphere. Vertex quadrature weight is one third of the flat area of
// the incident faces (P1 lumped mass).
struct SphereMesh {
    int level = 0;
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<double> vertex_weights;
    std::vector<double> face_areas;

    // Faces of every subdivision stage, coarsest first; the children of
    // stage-l face i are faces 4i..4i+3 of stage l+1. Vertex indices of all
    // stages point into the one shared vertex array. Used by locate.
    std::vector<std::vector<Face>> face_tree;

    double total_area() const;
};

// level <= 8; throws LevelTooLarge beyond that.
SphereMesh build_icosphere(int level);

// Fixed stereographic chart: projection from the north pole (0,0,1).
// z = 0 is the south pole, |z| = 1 the equator, z = infinity the north pole.
Vec3 stereo_to_sphere(Complex z);
Complex sphere_to_stereo(const Vec3& p);

// Great-circle distance between unit vectors.
double geodesic_distance(const Vec3& a, const Vec3& b);

// Closed regions of the sphere used to restrict functionals: a disc in the
// chart metric, its complement, or a spherical cap {p : <p, axis> <= c}.
struct SphericalRegion {
    enum class Kind { chart_disc, chart_disc_complement, cap };

    Kind kind = Kind::cap;
    Complex center;       // chart_disc / chart_disc_complement
    double radius = 0.0;  // chart metric, may be infinity
    Vec3 axis{0.0, 0.0, 1.0};
    double c = 0.0;  // cap level in (-1, 1)

    static SphericalRegion chart_disc(Complex center, double radius);
    static SphericalRegion chart_disc_complement(Complex center, double radius);
    static SphericalRegion cap(const Vec3& axis, double c);
};

// Vertices belonging to the region, ascending. Boundary vertices belong to
// the closed region, so a region and its complement partition the mesh.
std::vector<int> region_vertices(const SphereMesh& mesh, const SphericalRegion& region);

// Sum of the quadrature weights of the region's vertices.
double region_weight(const SphereMesh& mesh, const SphericalRegion& region);

struct BarycentricPoint {
    int face = -1;
    std::array<double, 3> weights{0.0, 0.0, 0.0};
};

// Face containing p (ties on shared edges broken arbitrarily) and the
// barycentric coordinates of the radial projection of p onto that face.
// Throws LocateFailure if p is not a unit vector to 1e-9.
BarycentricPoint locate(const SphereMesh& mesh, const Vec3& p);

}  // namespace reparam
