#include "reparam/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reparam/errors.hpp"
#include "reparam/rng.hpp"

namespace reparam {

namespace {

constexpr double kSignScanTol = 1e-12;

Mat2 canonicalize(Mat2 m) {
    const Complex d = m.det();
    const double dm = std::abs(d);
    if (dm < 1e-30) throw std::invalid_argument("mobius: singular matrix");
    // skip the rescale when det is already 1 to working precision, so a
    // second canonicalization is a bit-for-bit no-op
    if (std::abs(d - 1.0) > 5e-15) {
        m = m * (1.0 / std::sqrt(d));
    }
    const Complex* entries[4] = {&m.a, &m.b, &m.c, &m.d};
    for (const Complex* e : entries) {
        if (std::abs(*e) > kSignScanTol) {
            const double re = e->real(), im = e->imag();
            if (im < 0.0 || (im == 0.0 && re < 0.0)) {
                m = m * Complex(-1.0, 0.0);
            }
            break;
        }
    }
    return m;
}

// Traceless Hermitian generator for the direction p, in the frame our chart
// induces on su(2). The chart reverses the y generator relative to the plain
// Pauli basis; with this sign, exp of the generator attracts toward +p and
// the matching rotations fix their axis (pinned by the tests).
Mat2 chart_generator(const Vec3& p) {
    return {Complex(p.z, 0.0), Complex(p.x, p.y), Complex(p.x, -p.y), Complex(-p.z, 0.0)};
}

struct Col2 {
    Complex x, y;
};

Complex cdot(const Col2& u, const Col2& v) { return std::conj(u.x) * v.x + std::conj(u.y) * v.y; }

double cnorm(const Col2& u) { return std::sqrt(std::norm(u.x) + std::norm(u.y)); }

Mat2 su2_from_quaternion(double w, double vx, double vy, double vz) {
    // w I + i * chart_generator(v)
    return {Complex(w, vz), Complex(-vy, vx), Complex(vy, vx), Complex(w, -vz)};
}

}  // namespace

MobiusElement MobiusElement::from_matrix(const Mat2& m) { return MobiusElement(canonicalize(m)); }

MobiusElement MobiusElement::diagonal(Complex chart_multiplier) {
    const Complex alpha = std::sqrt(chart_multiplier);
    return from_matrix({alpha, 0.0, 0.0, 1.0 / alpha});
}

MobiusElement MobiusElement::affine(Complex chart_multiplier, Complex c) {
    const Complex alpha = std::sqrt(chart_multiplier);
    return from_matrix({alpha, -alpha * c, 0.0, 1.0 / alpha});
}

MobiusElement MobiusElement::translation(Complex b) {
    return from_matrix({1.0, b, 0.0, 1.0});
}

MobiusElement MobiusElement::rotation(const Vec3& axis, double angle) {
    const Vec3 n = normalized(axis);
    const double s = std::sin(0.5 * angle), co = std::cos(0.5 * angle);
    return from_matrix(su2_from_quaternion(co, s * n.x, s * n.y, s * n.z));
}

MobiusElement MobiusElement::hermitian_exp(const Vec3& p) {
    const double t = norm(p);
    const double ch = std::cosh(0.5 * t);
    // sinh(t/2)/t, stable near t = 0
    const double sh = (t < 1e-8) ? (0.5 + t * t / 48.0) : (std::sinh(0.5 * t) / t);
    const Mat2 ps = chart_generator(p);
    return from_matrix({ch + sh * ps.a, sh * ps.b, sh * ps.c, ch + sh * ps.d});
}

bool MobiusElement::operator==(const MobiusElement& o) const {
    return m_.a == o.m_.a && m_.b == o.m_.b && m_.c == o.m_.c && m_.d == o.m_.d;
}

std::array<double, 8> MobiusElement::to_reals() const {
    return {m_.a.real(), m_.a.imag(), m_.b.real(), m_.b.imag(),
            m_.c.real(), m_.c.imag(), m_.d.real(), m_.d.imag()};
}

MobiusElement MobiusElement::from_reals(const std::array<double, 8>& r) {
    return from_matrix({Complex(r[0], r[1]), Complex(r[2], r[3]), Complex(r[4], r[5]), Complex(r[6], r[7])});
}

MobiusElement compose(const MobiusElement& g1, const MobiusElement& g2) {
    return MobiusElement::from_matrix(g1.matrix() * g2.matrix());
}

MobiusElement inverse(const MobiusElement& g) {
    const Mat2& m = g.matrix();
    return MobiusElement::from_matrix({m.d, -m.b, -m.c, m.a});
}

Vec3 apply(const MobiusElement& g, const Vec3& p) {
    auto [Z, W] = sphere_to_homog(p);
    const Mat2& m = g.matrix();
    Complex Zp = m.a * Z + m.b * W;
    Complex Wp = m.c * Z + m.d * W;
    const double mag = std::max(std::abs(Zp), std::abs(Wp));
    if (mag > 1e100 || (mag < 1e-100 && mag > 0.0)) {
        Zp /= mag;
        Wp /= mag;
    }
    return homog_to_sphere(Zp, Wp);
}

Complex apply_chart(const MobiusElement& g, Complex z) {
    const Mat2& m = g.matrix();
    return (m.a * z + m.b) / (m.c * z + m.d);
}

KAKFactors kak_decompose(const MobiusElement& g) {
    const Mat2& A = g.matrix();
    const Mat2 H = A.adjoint() * A;

    const double defect = std::max({std::abs(H.a - 1.0), std::abs(H.d - 1.0), std::abs(H.b), std::abs(H.c)});
    if (defect <= 1e-13) {
        return {A, 1.0, Mat2::identity()};
    }

    // Spectral split of the Hermitian H via mean and half-gap. The naive
    // sqrt(tr^2 - 4) cancels catastrophically when H is close to the
    // identity; hypot of half-gap and off-diagonal does not.
    const double mu = 0.5 * (H.a.real() + H.d.real());
    const double tau = 0.5 * (H.a.real() - H.d.real());
    const double off = std::abs(H.b);
    const double r = std::hypot(tau, off);
    const double a = std::max(std::sqrt(mu + r), 1.0);

    // Top eigenvector, branch chosen so neither component cancels
    Col2 v1 = (tau >= 0.0) ? Col2{Complex(r + tau, 0.0), H.c} : Col2{H.b, Complex(r - tau, 0.0)};
    double n1 = cnorm(v1);
    if (n1 < 1e-150) {
        v1 = {1.0, 0.0};
        n1 = 1.0;
    }
    v1.x /= n1;
    v1.y /= n1;
    const Col2 v2{-std::conj(v1.y), std::conj(v1.x)};

    Col2 u1{(A.a * v1.x + A.b * v1.y) / a, (A.c * v1.x + A.d * v1.y) / a};
    Col2 u2{(A.a * v2.x + A.b * v2.y) * a, (A.c * v2.x + A.d * v2.y) * a};
    const Complex proj = cdot(u1, u2);
    u2.x -= proj * u1.x;
    u2.y -= proj * u1.y;
    const double m1 = cnorm(u1), m2 = cnorm(u2);
    u1.x /= m1;
    u1.y /= m1;
    u2.x /= m2;
    u2.y /= m2;

    const Complex detU = u1.x * u2.y - u2.x * u1.y;
    const Complex phase = std::sqrt(detU);
    const Mat2 U{u1.x / phase, u2.x / phase, u1.y / phase, u2.y / phase};
    // V = [v1 v2] has det 1 by construction; u2 factor carries the phase back
    const Mat2 Vdag{std::conj(v1.x) * phase, std::conj(v1.y) * phase, -v1.y * phase, v1.x * phase};
    return {U, a, Vdag};
}

bool in_family(const MobiusElement& g, GroupFamily family, double tol) {
    if (family == GroupFamily::G0) return true;
    const Mat2& m = g.matrix();
    const double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
    const bool upper = std::abs(m.c) <= tol * scale;
    if (family == GroupFamily::G1) return upper;
    return upper && std::abs(m.b) <= tol * scale;
}

Complex chart_multiplier(const MobiusElement& g) {
    if (!in_family(g, GroupFamily::G2)) throw FamilyMismatch("chart_multiplier: element is not diagonal");
    return g.matrix().a / g.matrix().d;
}

AffineParams affine_params(const MobiusElement& g) {
    if (!in_family(g, GroupFamily::G1)) throw FamilyMismatch("affine_params: element is not upper-triangular");
    const Mat2& m = g.matrix();
    return {m.a / m.d, -m.b / m.a};
}

bool in_compact_set(const MobiusElement& g, const CompactExhaustionIndex& idx) {
    if (idx.n < 1) throw std::invalid_argument("in_compact_set: n must be positive");
    if (!in_family(g, idx.family)) throw FamilyMismatch("in_compact_set: element outside the family");
    const double n = static_cast<double>(idx.n);
    const double rel = 1e-9;  // boundary slack for canonicalization round-off
    switch (idx.family) {
        case GroupFamily::G2: {
            const double m = std::abs(chart_multiplier(g));
            return m >= (1.0 - rel) / n && m <= (1.0 + rel) * n;
        }
        case GroupFamily::G1: {
            const AffineParams ap = affine_params(g);
            const double m = std::abs(ap.multiplier);
            return m >= (1.0 - rel) / n && m <= (1.0 + rel) * n && std::abs(ap.c) <= (1.0 + rel) * n;
        }
        case GroupFamily::G0: {
            const double s = kak_decompose(g).a;
            const double chart = s * s;
            return chart <= (1.0 + rel) * n;  // chart >= 1 >= 1/n always
        }
    }
    return false;
}

double exhaustion_size(const MobiusElement& g, GroupFamily family) {
    switch (family) {
        case GroupFamily::G2: {
            const double m = std::abs(chart_multiplier(g));
            return std::max(m, 1.0 / m);
        }
        case GroupFamily::G1: {
            const AffineParams ap = affine_params(g);
            const double m = std::abs(ap.multiplier);
            return std::max({m, 1.0 / m, std::abs(ap.c)});
        }
        case GroupFamily::G0: {
            const double a = kak_decompose(g).a;
            return a * a;
        }
    }
    return 1.0;
}

MobiusElement escape_sequence(GroupFamily family, EscapeMode mode, int n) {
    if (n < 1) throw std::invalid_argument("escape_sequence: n must be positive");
    switch (mode) {
        case EscapeMode::dilate_to_zero:
            return MobiusElement::diagonal(1.0 / static_cast<double>(n + 1));
        case EscapeMode::dilate_to_inf:
            return MobiusElement::diagonal(std::ldexp(1.0, n));
        case EscapeMode::translate_to_inf:
            if (family == GroupFamily::G2) {
                throw InvalidMode("escape_sequence: G2 fixes 0, translations leave the family");
            }
            return MobiusElement::translation(Complex(-static_cast<double>(n + 1), 0.0));
    }
    throw InvalidMode("escape_sequence: unknown mode");
}

MobiusElement random_element(double bound, GroupFamily family, std::uint64_t seed) {
    if (bound < 1.0) throw std::invalid_argument("random_element: bound must be >= 1");
    Rng rng(seed);
    const double lnb = std::log(bound);
    switch (family) {
        case GroupFamily::G2: {
            const double mag = std::exp(rng.uniform(-1.0, 1.0) * lnb);
            return MobiusElement::diagonal(std::polar(mag, rng.uniform(0.0, 2.0 * M_PI)));
        }
        case GroupFamily::G1: {
            const double mag = std::exp(rng.uniform(-1.0, 1.0) * lnb);
            const Complex mult = std::polar(mag, rng.uniform(0.0, 2.0 * M_PI));
            const double r = bound * std::sqrt(rng.uniform());
            const Complex c = std::polar(r, rng.uniform(0.0, 2.0 * M_PI));
            return MobiusElement::affine(mult, c);
        }
        case GroupFamily::G0: {
            const double s = std::exp(rng.uniform() * lnb);  // chart factor in [1, bound)
            double q[4];
            for (double& x : q) x = rng.normal();
            const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
            const MobiusElement u1 =
                MobiusElement::from_matrix(su2_from_quaternion(q[0] / qn, q[1] / qn, q[2] / qn, q[3] / qn));
            for (double& x : q) x = rng.normal();
            const double qm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
            const MobiusElement u2 =
                MobiusElement::from_matrix(su2_from_quaternion(q[0] / qm, q[1] / qm, q[2] / qm, q[3] / qm));
            return compose(compose(u1, MobiusElement::diagonal(s)), u2);
        }
    }
    throw std::invalid_argument("random_element: unknown family");
}

}  // namespace reparam
