#include "reparam/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "reparam/errors.hpp"

namespace reparam {

namespace {

std::vector<Vec3> icosahedron_vertices() {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Vec3> raw;
    for (double s1 : {-1.0, 1.0}) {
        for (double s2 : {-1.0, 1.0}) {
            raw.push_back({0.0, s1, s2 * phi});
            raw.push_back({s1, s2 * phi, 0.0});
            raw.push_back({s1 * phi, 0.0, s2});
        }
    }
    return raw;
}

std::vector<Face> icosahedron_faces(const std::vector<Vec3>& raw) {
    // edges of the raw solid all have squared length 4; faces are exactly
    // the triangles formed by mutually adjacent vertices
    auto adjacent = [&](int i, int j) { return norm2(raw[i] - raw[j]) < 4.5; };
    std::vector<Face> faces;
    const int n = static_cast<int>(raw.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!adjacent(i, j)) continue;
            for (int k = j + 1; k < n; ++k) {
                if (adjacent(i, k) && adjacent(j, k)) {
                    Face f{i, j, k};
                    if (triple(raw[f[0]], raw[f[1]], raw[f[2]]) < 0.0) std::swap(f[1], f[2]);
                    faces.push_back(f);
                }
            }
        }
    }
    return faces;
}

// Barycentric coordinates of the radial projection of p onto the plane of
// (a, b, c), by Cramer's rule. Negative entries mean p is outside. s <= 0
// means the ray from the origin through p exits through the opposite
// hemisphere; normalizing would flip every sign and make the antipodal face
// look perfectly contained, so reject it outright.
std::array<double, 3> central_barycentric(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
    const double wa = triple(p, b, c);
    const double wb = triple(a, p, c);
    const double wc = triple(a, b, p);
    const double s = wa + wb + wc;
    if (s <= 0.0) return {-1.0, -1.0, -1.0};
    return {wa / s, wb / s, wc / s};
}

double min3(const std::array<double, 3>& w) { return std::min({w[0], w[1], w[2]}); }

}  // namespace

double SphereMesh::total_area() const {
    return std::accumulate(face_areas.begin(), face_areas.end(), 0.0);
}

SphereMesh build_icosphere(int level) {
    if (level < 0) throw LevelTooLarge("build_icosphere: level must be non-negative");
    if (level > 8) throw LevelTooLarge("build_icosphere: level " + std::to_string(level) + " exceeds the guard (8)");

    SphereMesh mesh;
    mesh.level = level;
    for (const Vec3& v : icosahedron_vertices()) mesh.vertices.push_back(normalized(v));
    mesh.face_tree.push_back(icosahedron_faces(icosahedron_vertices()));

    for (int l = 0; l < level; ++l) {
        const std::vector<Face>& coarse = mesh.face_tree.back();
        std::vector<Face> fine;
        fine.reserve(coarse.size() * 4);
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int i, int j) {
            const auto key = std::minmax(i, j);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(normalized(mesh.vertices[i] + mesh.vertices[j]));
            midpoint.emplace(key, idx);
            return idx;
        };
        for (const Face& f : coarse) {
            const int m01 = mid(f[0], f[1]), m12 = mid(f[1], f[2]), m02 = mid(f[0], f[2]);
            fine.push_back({f[0], m01, m02});
            fine.push_back({m01, f[1], m12});
            fine.push_back({m02, m12, f[2]});
            fine.push_back({m01, m12, m02});
        }
        mesh.face_tree.push_back(std::move(fine));
    }

    mesh.faces = mesh.face_tree.back();
    mesh.face_areas.resize(mesh.faces.size());
    mesh.vertex_weights.assign(mesh.vertices.size(), 0.0);
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        const Vec3 &a = mesh.vertices[f[0]], &b = mesh.vertices[f[1]], &c = mesh.vertices[f[2]];
        const double area = 0.5 * norm(cross(b - a, c - a));
        mesh.face_areas[i] = area;
        for (int v : f) mesh.vertex_weights[v] += area / 3.0;
    }
    return mesh;
}

Vec3 stereo_to_sphere(Complex z) {
    if (std::isinf(z.real()) || std::isinf(z.imag())) return {0.0, 0.0, 1.0};
    return homog_to_sphere(z, Complex(1.0));
}

Complex sphere_to_stereo(const Vec3& p) {
    const auto [Z, W] = sphere_to_homog(p);
    if (Z == Complex(0.0) && W == Complex(0.0)) return Complex(0.0);
    if (W == Complex(0.0)) return Complex(std::numeric_limits<double>::infinity(), 0.0);
    return Z / W;
}

double geodesic_distance(const Vec3& a, const Vec3& b) {
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

SphericalRegion SphericalRegion::chart_disc(Complex center, double radius) {
    SphericalRegion r;
    r.kind = Kind::chart_disc;
    r.center = center;
    r.radius = radius;
    return r;
}

SphericalRegion SphericalRegion::chart_disc_complement(Complex center, double radius) {
    SphericalRegion r = chart_disc(center, radius);
    r.kind = Kind::chart_disc_complement;
    return r;
}

SphericalRegion SphericalRegion::cap(const Vec3& axis, double c) {
    SphericalRegion r;
    r.kind = Kind::cap;
    r.axis = normalized(axis);
    r.c = c;
    return r;
}

namespace {

// membership in the closed chart disc, evaluated homogeneously so the north
// pole (W = 0) needs no special case
bool in_chart_disc(const Vec3& p, Complex center, double radius) {
    if (std::isinf(radius)) return true;
    const auto [Z, W] = sphere_to_homog(p);
    const double lhs = std::abs(Z - center * W);
    const double rhs = radius * std::abs(W);
    return lhs <= rhs * (1.0 + 1e-12) + 1e-14;
}

}  // namespace

std::vector<int> region_vertices(const SphereMesh& mesh, const SphericalRegion& region) {
    std::vector<int> out;
    const int n = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < n; ++i) {
        const Vec3& v = mesh.vertices[i];
        bool inside = false;
        switch (region.kind) {
            case SphericalRegion::Kind::chart_disc:
                inside = in_chart_disc(v, region.center, region.radius);
                break;
            case SphericalRegion::Kind::chart_disc_complement:
                inside = !in_chart_disc(v, region.center, region.radius);
                break;
            case SphericalRegion::Kind::cap:
                inside = dot(v, region.axis) <= region.c + 1e-12;
                break;
        }
        if (inside) out.push_back(i);
    }
    return out;
}

double region_weight(const SphereMesh& mesh, const SphericalRegion& region) {
    double w = 0.0;
    for (int i : region_vertices(mesh, region)) w += mesh.vertex_weights[i];
    return w;
}

BarycentricPoint locate(const SphereMesh& mesh, const Vec3& p) {
    if (std::abs(norm(p) - 1.0) > 1e-9) throw LocateFailure("locate: point is not on the unit sphere");

    // descend the subdivision tree; at each stage the candidate spherical
    // triangles tile the parent exactly, so the max-min barycentric pick is
    // the containing one up to boundary ties
    int face = -1;
    for (std::size_t stage = 0; stage < mesh.face_tree.size(); ++stage) {
        const std::vector<Face>& faces = mesh.face_tree[stage];
        const int begin = (stage == 0) ? 0 : 4 * face;
        const int count = (stage == 0) ? static_cast<int>(faces.size()) : 4;
        int best = -1;
        double best_min = -std::numeric_limits<double>::infinity();
        for (int j = begin; j < begin + count; ++j) {
            const Face& f = faces[j];
            const auto w = central_barycentric(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]], p);
            const double m = min3(w);
            if (m > best_min) {
                best_min = m;
                best = j;
            }
        }
        face = best;
    }

    const Face& f = mesh.faces[face];
    auto w = central_barycentric(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]], p);
    if (min3(w) < -1e-6) throw LocateFailure("locate: descent landed outside the face");
    double s = 0.0;
    for (double& x : w) {
        x = std::max(x, 0.0);
        s += x;
    }
    for (double& x : w) x /= s;
    return {face, w};
}

}  // namespace reparam
