#pragma once

#include <cstdint>

#include "reparam/mapspace.hpp"

namespace reparam {

// Empirical stand-in for the abstract constant in the energy-difference
// bound |E(f)-E(h)| <= C (|f|+|h|) |f-h|; estimated, never assumed.
struct CalibrationReport {
    double constant_estimate = 0.0;
    int sample_count = 0;
    int excluded = 0;  // degenerate pairs (denominator ~ 0) skipped
    double max_ratio_observed = 0.0;
    SobolevParams params;
    std::uint64_t seed = 0;
};

// Conformal (Dirichlet) energy: squared Frobenius norm of the P1 face
// differentials integrated over the mesh.
double energy(const DiscreteMap& f);

// (sum_j integral |D^j f|^p)^(1/p) for j = 0..k. First derivatives are P1
// face gradients averaged to vertices; the second-order term is the
// magnitude of the cotangent-weight Laplacian, a norm-equivalent proxy.
double sobolev_norm(const DiscreteMap& f, const SobolevParams& params);
double sobolev_distance(const DiscreteMap& f, const DiscreteMap& h, const SobolevParams& params);

// max over vertices of the ambient distance
double c0_distance(const DiscreteMap& f, const DiscreteMap& h);

// max pairwise ambient distance of f over the region's vertices; throws
// EmptyRegion when the region holds no vertex
double diameter(const DiscreteMap& f, const SphericalRegion& region);
double diameter(const DiscreteMap& f);

// image area with multiplicity: sum over faces of the area of the image
// flat triangle (Gram determinant in the ambient space)
double volume(const DiscreteMap& f);
// restricted variant: only faces with all three vertices inside the region
double volume(const DiscreteMap& f, const SphericalRegion& region);

// integral of the operator norm of the differential raised to m
double v1_energy(const DiscreteMap& f, int m);

// Level-4 random map pairs; returns the largest observed ratio
// |E(f)-E(h)| / ((|f|+|h|) |f-h|) as the constant estimate.
CalibrationReport calibrate_energy_bound(int samples, const SobolevParams& params, std::uint64_t seed);

// Serial implementations kept for testing and benchmarking: energy_serial
// and pullback_serial mirror the parallel kernels step for step,
// energy_cotan assembles the same Dirichlet functional through cotangent
// edge weights, and diameter_exact is the plain quadratic scan.
namespace reference {
double energy_serial(const DiscreteMap& f);
double energy_cotan(const DiscreteMap& f);
DiscreteMap pullback_serial(const DiscreteMap& f, const MobiusElement& g);
double diameter_exact(const DiscreteMap& f, const SphericalRegion& region);
}  // namespace reference

}  // namespace reparam
