#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include "reparam/stereo.hpp"
#include "reparam/vec3.hpp"

namespace reparam {

// 2x2 complex matrix, row-major (a b; c d).
struct Mat2 {
    Complex a, b, c, d;

    Complex det() const { return a * d - b * c; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(Complex s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2 adjoint() const {
        return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
    }
    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

enum class GroupFamily { G0, G1, G2 };
enum class EscapeMode { dilate_to_zero, dilate_to_inf, translate_to_inf };

// Element of PSL(2,C) held as the canonical SL(2,C) representative:
// det = 1 and the first entry of magnitude > 1e-12 in row-major order has
// argument in [0, pi). Canonicalization makes equality a plain comparison.
class MobiusElement {
  public:
    MobiusElement() : m_(Mat2::identity()) {}

    static MobiusElement identity() { return MobiusElement(); }
    static MobiusElement from_matrix(const Mat2& m);
    // z -> A z  (A is the chart multiplier, matrix diag(sqrt(A), 1/sqrt(A)))
    static MobiusElement diagonal(Complex chart_multiplier);
    // z -> A (z - c)
    static MobiusElement affine(Complex chart_multiplier, Complex c);
    // z -> z + b
    static MobiusElement translation(Complex b);
    // rotation of the sphere about a unit axis, right-hand rule in the
    // ambient coordinates
    static MobiusElement rotation(const Vec3& axis, double angle);
    // exp of the traceless Hermitian generator of the direction p: the pure
    // non-compact one-parameter groups used by centering and registration.
    // Attracts toward +p/|p| on the sphere, KAK factor e^{|p|/2}.
    static MobiusElement hermitian_exp(const Vec3& p);

    const Mat2& matrix() const { return m_; }

    bool operator==(const MobiusElement& o) const;

    // row-major re/im parts of the canonical representative
    std::array<double, 8> to_reals() const;
    static MobiusElement from_reals(const std::array<double, 8>& r);

  private:
    explicit MobiusElement(const Mat2& m) : m_(m) {}
    Mat2 m_;
};

MobiusElement compose(const MobiusElement& g1, const MobiusElement& g2);
MobiusElement inverse(const MobiusElement& g);

// Action on the unit sphere via the homogeneous chart form [Z:W] -> [aZ+bW : cZ+dW].
Vec3 apply(const MobiusElement& g, const Vec3& p);

// Chart-level action for finite z with finite image (tests and diagnostics).
Complex apply_chart(const MobiusElement& g, Complex z);

struct KAKFactors {
    Mat2 u1;   // special-unitary
    double a;  // >= 1, larger singular value
    Mat2 u2;   // special-unitary
};

// g = u1 . diag(a, 1/a) . u2 (the SL(2,C) singular value decomposition).
KAKFactors kak_decompose(const MobiusElement& g);

struct CompactExhaustionIndex {
    int n;  // positive
    GroupFamily family;
};

bool in_family(const MobiusElement& g, GroupFamily family, double tol = 1e-10);

// Chart multiplier of a G2 element (diag(alpha, 1/alpha) acts as z -> alpha^2 z).
Complex chart_multiplier(const MobiusElement& g);

// Affine parameters (A, c) of a G1 element acting as z -> A (z - c).
struct AffineParams {
    Complex multiplier;
    Complex c;
};
AffineParams affine_params(const MobiusElement& g);

// K_n membership. G2: 1/n <= |A| <= n on the chart multiplier. G1: the same
// plus |c| <= n. G0: 1/n <= a_KAK^2 <= n on the chart factor of the KAK
// diagonal. Throws FamilyMismatch if g is not in idx.family.
bool in_compact_set(const MobiusElement& g, const CompactExhaustionIndex& idx);

// Smallest real bound whose ceiling indexes a K_n containing g.
double exhaustion_size(const MobiusElement& g, GroupFamily family);

// Sequence leaving every K_m: dilate_to_zero is z -> z/(n+1), dilate_to_inf
// is z -> 2^n z (doubling reaches the large-displacement regime quickly),
// translate_to_inf is z -> z - (n+1). Throws InvalidMode for G2 translations.
MobiusElement escape_sequence(GroupFamily family, EscapeMode mode, int n);

// Deterministic sample lying in K_n with n = ceil(bound); bound >= 1.
MobiusElement random_element(double bound, GroupFamily family, std::uint64_t seed);

}  // namespace reparam
