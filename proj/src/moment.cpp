#include "reparam/moment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reparam/errors.hpp"

namespace reparam {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kVolumeFloor = 1e-6 * 4.0 * kPi;

double cap_pair(const DiscreteMap& f, double v_full, const Vec3& axis, double c) {
    return 0.5 * v_full - volume(f, SphericalRegion::cap(axis, c));
}

double longest_edge(const SphereMesh& mesh) {
    double best = 0.0;
    for (const Face& fc : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            const double d = distance(mesh.vertices[fc[e]], mesh.vertices[fc[(e + 1) % 3]]);
            best = std::max(best, d);
        }
    }
    return best;
}

Vec3 moment_of(const DiscreteMap& f) {
    const double v = volume(f);
    return {cap_pair(f, v, Vec3{1.0, 0.0, 0.0}, 0.0), cap_pair(f, v, Vec3{0.0, 1.0, 0.0}, 0.0),
            cap_pair(f, v, Vec3{0.0, 0.0, 1.0}, 0.0)};
}

Vec3 moment_at(const DiscreteMap& f, const Vec3& p) {
    return moment_of(pullback(f, MobiusElement::hermitian_exp(p)));
}

struct MomentProbe {
    Vec3 m;
    double vol;
};

MomentProbe probe_at(const DiscreteMap& f, const Vec3& p) {
    const DiscreteMap h = pullback(f, MobiusElement::hermitian_exp(p));
    const double v = volume(h);
    return {{cap_pair(h, v, Vec3{1.0, 0.0, 0.0}, 0.0), cap_pair(h, v, Vec3{0.0, 1.0, 0.0}, 0.0),
             cap_pair(h, v, Vec3{0.0, 0.0, 1.0}, 0.0)},
            v};
}

// 3x3 solve by Gaussian elimination with partial pivoting. Returns false
// when the matrix is numerically singular.
bool solve3(double a[3][3], Vec3 b, Vec3* x) {
    double rhs[3] = {b.x, b.y, b.z};
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[piv]][col])) piv = r;
        }
        std::swap(perm[col], perm[piv]);
        const double head = a[perm[col]][col];
        if (!(std::abs(head) > 1e-14)) return false;
        for (int r = col + 1; r < 3; ++r) {
            const double m = a[perm[r]][col] / head;
            for (int c = col; c < 3; ++c) a[perm[r]][c] -= m * a[perm[col]][c];
            rhs[perm[r]] -= m * rhs[perm[col]];
        }
    }
    double out[3];
    for (int row = 2; row >= 0; --row) {
        double s = rhs[perm[row]];
        for (int c = row + 1; c < 3; ++c) s -= a[perm[row]][c] * out[c];
        out[row] = s / a[perm[row]][row];
    }
    *x = {out[0], out[1], out[2]};
    return std::isfinite(out[0]) && std::isfinite(out[1]) && std::isfinite(out[2]);
}

double component(const Vec3& v, int i) { return i == 0 ? v.x : (i == 1 ? v.y : v.z); }

Vec3 axis_step(const Vec3& p, int i, double s) {
    Vec3 q = p;
    if (i == 0) q.x += s;
    else if (i == 1) q.y += s;
    else q.z += s;
    return q;
}

}  // namespace

OrientedRotation::OrientedRotation(const Vec3& axis_in, double angle_in) {
    const double n = norm(axis_in);
    if (!(n > 1e-12) || !std::isfinite(n)) {
        throw std::invalid_argument("OrientedRotation: axis must be a nonzero finite vector");
    }
    if (!(angle_in >= 0.0 && angle_in <= kPi)) {
        throw std::invalid_argument("OrientedRotation: angle must lie in [0, pi]");
    }
    axis = axis_in / n;
    angle = angle_in;
}

double MomentVector::norm() const {
    return std::sqrt(components[0] * components[0] + components[1] * components[1] +
                     components[2] * components[2]);
}

double pseudo_moment_pair(const DiscreteMap& f, const OrientedRotation& rot) {
    return cap_pair(f, volume(f), rot.axis, 0.0);
}

MomentPairProbe pseudo_moment_pair_probe(const DiscreteMap& f, const OrientedRotation& rot) {
    const double h = longest_edge(*f.mesh);
    const double v = volume(f);
    const double base = cap_pair(f, v, rot.axis, 0.0);
    const double up = cap_pair(f, v, rot.axis, std::min(h, 0.99));
    const double down = cap_pair(f, v, rot.axis, std::max(-h, -0.99));
    return {base, std::max(std::abs(up - base), std::abs(down - base))};
}

MomentVector pseudo_moment(const DiscreteMap& f) {
    const Vec3 m = moment_of(f);
    MomentVector out;
    out.components = {m.x, m.y, m.z};
    return out;
}

CenteringResult center_map(const DiscreteMap& f, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("center_map: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("center_map: max_iter must be at least 1");
    const double v0 = volume(f);
    if (!(v0 > kVolumeFloor)) {
        throw NotVStable("center_map: image volume below the stability floor");
    }

    const double fd_step = 1e-4;
    Vec3 p{0.0, 0.0, 0.0};
    Vec3 moment = moment_at(f, p);
    double best = norm(moment);
    int iter = 0;

    while (best > tol && iter < max_iter) {
        ++iter;
        double jac[3][3];
        for (int j = 0; j < 3; ++j) {
            const Vec3 probe = moment_at(f, axis_step(p, j, fd_step));
            jac[0][j] = (probe.x - moment.x) / fd_step;
            jac[1][j] = (probe.y - moment.y) / fd_step;
            jac[2][j] = (probe.z - moment.z) / fd_step;
        }

        bool advanced = false;
        Vec3 delta;
        if (solve3(jac, -moment, &delta)) {
            const double len = norm(delta);
            if (len > 4.0) delta = delta * (4.0 / len);
            for (double lambda = 1.0; lambda >= 1.0 / 64.0; lambda *= 0.5) {
                const Vec3 cand = p + delta * lambda;
                // A collapsed pullback makes every component vanish for the
                // wrong reason (|m_i| <= vol/2), so candidates must also keep
                // the input volume, which the exact action preserves.
                const MomentProbe probe = probe_at(f, cand);
                if (norm(probe.m) < best && probe.vol >= 0.5 * v0) {
                    p = cand;
                    moment = probe.m;
                    best = norm(probe.m);
                    advanced = true;
                    break;
                }
            }
        }

        if (!advanced) {
            // Newton stalled; bisect along the component with the largest
            // defect. The pair decreases as p grows along its own axis, so
            // the zero lies on the sign(moment_i) side.
            const int i = std::abs(moment.x) >= std::abs(moment.y) &&
                                  std::abs(moment.x) >= std::abs(moment.z)
                              ? 0
                              : (std::abs(moment.y) >= std::abs(moment.z) ? 1 : 2);
            const double dir = component(moment, i) > 0.0 ? 1.0 : -1.0;
            double lo = 0.0;
            double hi = 0.0;
            double f_lo = component(moment, i);
            bool bracketed = false;
            for (double s = 0.25; s <= 8.0; s *= 2.0) {
                const double f_s = component(moment_at(f, axis_step(p, i, dir * s)), i);
                if (f_s * f_lo <= 0.0) {
                    hi = s;
                    bracketed = true;
                    break;
                }
                lo = s;
                f_lo = f_s;
            }
            if (!bracketed) break;
            for (int b = 0; b < 48 && hi - lo > 1e-12; ++b) {
                const double mid = 0.5 * (lo + hi);
                const double f_mid = component(moment_at(f, axis_step(p, i, dir * mid)), i);
                if (f_mid * f_lo <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            const Vec3 cand = axis_step(p, i, dir * 0.5 * (lo + hi));
            const MomentProbe probe = probe_at(f, cand);
            if (norm(probe.m) < best && probe.vol >= 0.5 * v0) {
                p = cand;
                moment = probe.m;
                best = norm(probe.m);
            } else {
                break;
            }
        }
    }

    CenteringResult out;
    out.g = MobiusElement::hermitian_exp(p);
    out.f_centered = pullback(f, out.g);
    out.residual = pseudo_moment(out.f_centered).norm();
    out.converged = out.residual <= tol;
    out.iterations = iter;
    return out;
}

}  // namespace reparam
