#pragma once

#include <array>

#include "reparam/functionals.hpp"
#include "reparam/mapspace.hpp"

namespace reparam {

// A rotation carrying its axis explicitly, so the axis survives at the
// angles 0 and pi where the rotation matrix alone would forget it.
struct OrientedRotation {
    Vec3 axis{0.0, 0.0, 1.0};  // unit length
    double angle = 0.0;        // in [0, pi]

    // Normalizes the axis. Throws std::invalid_argument for a near-zero
    // axis or an angle outside [0, pi].
    OrientedRotation(const Vec3& axis, double angle);
};

// Evaluations of the pseudo-moment of a map on the standard rotation
// generators about the x, y and z axes.
struct MomentVector {
    std::array<double, 3> components{0.0, 0.0, 0.0};
    double norm() const;
};

// Half the image volume of f minus the image volume of the lower
// half-domain singled out by the rotation axis. Depends on rot only
// through its axis.
double pseudo_moment_pair(const DiscreteMap& f, const OrientedRotation& rot);

// pseudo_moment_pair together with its sensitivity to the cap level:
// the equator is moved one mesh-edge length up and down and the larger
// deviation of the pair is reported.
struct MomentPairProbe {
    double value = 0.0;
    double sensitivity = 0.0;
};
MomentPairProbe pseudo_moment_pair_probe(const DiscreteMap& f, const OrientedRotation& rot);

MomentVector pseudo_moment(const DiscreteMap& f);

struct CenteringResult {
    MobiusElement g = MobiusElement::identity();
    DiscreteMap f_centered;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Moves f along the non-compact directions until the pseudo-moment
// vanishes: finds p with ||pseudo_moment(pullback(f, hermitian_exp(p)))||
// at most tol. The returned g = hermitian_exp(p) is self-adjoint with
// positive spectrum, so it carries no rotation of its own. On failure to
// converge within max_iter the best iterate is returned with
// converged = false. Throws NotVStable when volume(f) is below the
// stability floor (1e-6 times the sphere area).
CenteringResult center_map(const DiscreteMap& f, double tol, int max_iter = 60);

}  // namespace reparam
