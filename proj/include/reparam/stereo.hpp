#pragma once

#include <complex>
#include <utility>

#include "reparam/vec3.hpp"

namespace reparam {

using Complex = std::complex<double>;

// Stereographic chart, fixed once: projection from the north pole (0,0,1),
// so the chart coordinate of the south pole is 0, the equator is |z| = 1,
// and the north pole is z = infinity. Points are carried in homogeneous
// form [Z : W] with z = Z/W; the north pole is [1 : 0], never a division.

// Identity (x+iy)(x-iy) = (1-z)(1+z) on the unit sphere lets us pick
// whichever representative is well conditioned near the poles.
inline std::pair<Complex, Complex> sphere_to_homog(const Vec3& p) {
    if (p.z <= 0.0) return {Complex(p.x, p.y), Complex(1.0 - p.z, 0.0)};
    return {Complex(1.0 + p.z, 0.0), Complex(p.x, -p.y)};
}

inline Vec3 homog_to_sphere(Complex Z, Complex W) {
    const double nz = std::norm(Z), nw = std::norm(W);
    const double n = nz + nw;
    const Complex zw = Z * std::conj(W);
    return {2.0 * zw.real() / n, 2.0 * zw.imag() / n, (nz - nw) / n};
}

}  // namespace reparam
