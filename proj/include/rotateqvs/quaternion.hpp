#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>

#include "rotateqvs/errors.hpp"

namespace rqvs {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
    friend constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
    friend constexpr Vec3 cross(Vec3 a, Vec3 b) {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }
    double length() const { return std::sqrt(dot(*this, *this)); }
};

/// One Hamilton number w + x i + y j + z k. The imaginary triple (x, y, z)
/// doubles as a 3D vector, which is how rotations enter the picture.
struct Quaternion {
    double w = 0.0; ///< real part
    double x = 0.0; ///< i coefficient
    double y = 0.0; ///< j coefficient
    double z = 0.0; ///< k coefficient

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
    constexpr Quaternion(double real, Vec3 imag) : w(real), x(imag.x), y(imag.y), z(imag.z) {}

    static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    constexpr double real() const { return w; }
    constexpr Vec3 imag() const { return {x, y, z}; }

    /// Same real part, opposite imaginary parts.
    constexpr Quaternion conjugate() const { return {w, -x, -y, -z}; }

    constexpr double norm_sq() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm_sq()); }

    friend constexpr Quaternion operator+(Quaternion a, Quaternion b) {
        return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr Quaternion operator-(Quaternion a, Quaternion b) {
        return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr Quaternion operator*(double s, Quaternion q) {
        return {s * q.w, s * q.x, s * q.y, s * q.z};
    }
    friend constexpr Quaternion operator-(Quaternion q) { return {-q.w, -q.x, -q.y, -q.z}; }
};

/// Sum of products of corresponding components. Symmetric.
constexpr double inner(const Quaternion& a, const Quaternion& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

/// Hamilton product, expanded over the basis rules (i^2 = j^2 = k^2 = ijk = -1).
/// Non-commutative.
constexpr Quaternion hamilton(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

/// Second route to the same product, through the 3D-vector reading:
/// (a1, v1)(a2, v2) = (a1 a2 - v1.v2, a1 v2 + a2 v1 + v1 x v2).
/// Kept separate from hamilton() on purpose; the two are cross-validated.
constexpr Quaternion hamilton_3d(const Quaternion& a, const Quaternion& b) {
    const Vec3 v1 = a.imag(), v2 = b.imag();
    const Vec3 v = a.w * v2 + b.w * v1 + cross(v1, v2);
    return {a.w * b.w - dot(v1, v2), v};
}

namespace detail {
// Threshold on the squared norm below which a quaternion is treated as zero.
// Inverting past this point returns garbage-scale values that poison training.
inline constexpr double kZeroNormSq = 1e-12;
} // namespace detail

/// conj(q) / |q|^2. Two-sided inverse of the Hamilton product.
inline Quaternion inverse(const Quaternion& q) {
    const double n2 = q.norm_sq();
    if (n2 < detail::kZeroNormSq)
        throw ZeroNormError("quaternion inverse: norm too close to zero");
    return (1.0 / n2) * q.conjugate();
}

class UnitQuaternion;
inline UnitQuaternion normalize(const Quaternion& q);

/// Quaternion constrained to unit norm. Construction normalizes, so the
/// invariant |q| = 1 (within fp) holds for the lifetime of the value.
class UnitQuaternion {
public:
    /// Identity rotation.
    constexpr UnitQuaternion() : q_(1.0, 0.0, 0.0, 0.0) {}

    /// cos(theta/2) + u sin(theta/2) for rotation angle theta about unit axis u.
    /// theta is the full rotation angle; the half-angle is taken here.
    static UnitQuaternion from_axis_angle(Vec3 u, double theta) {
        const double len = u.length();
        if (std::fabs(len - 1.0) > 1e-9)
            throw BadAxisError("rotation axis is not unit length");
        const double h = 0.5 * theta;
        return UnitQuaternion(Quaternion(std::cos(h), std::sin(h) * u), already_unit{});
    }

    constexpr const Quaternion& value() const { return q_; }
    constexpr double w() const { return q_.w; }
    constexpr Vec3 axis_part() const { return q_.imag(); }

    constexpr UnitQuaternion conjugate() const { return UnitQuaternion(q_.conjugate(), already_unit{}); }
    /// At unit norm the inverse and the conjugate coincide.
    constexpr UnitQuaternion inverse() const { return conjugate(); }

private:
    struct already_unit {};
    constexpr UnitQuaternion(Quaternion q, already_unit) : q_(q) {}
    friend UnitQuaternion normalize(const Quaternion& q);

    Quaternion q_;
};

/// q / |q|. Projection onto the unit sphere.
inline UnitQuaternion normalize(const Quaternion& q) {
    const double n2 = q.norm_sq();
    if (n2 < detail::kZeroNormSq)
        throw ZeroNormError("normalize: quaternion norm too close to zero");
    const double inv = 1.0 / std::sqrt(n2);
    return UnitQuaternion(inv * q, UnitQuaternion::already_unit{});
}

/// Sandwich product q x conj(q). For unit q this rotates the imaginary part
/// of x by the encoded angle about the encoded axis and leaves the real part
/// unchanged; the norm is preserved.
inline Quaternion rotate(const Quaternion& x, const UnitQuaternion& q) {
    return hamilton(hamilton(q.value(), x), q.value().conjugate());
}

/// Axis-angle rotation of v about unit axis u by theta, written directly as
/// v_perp cos(theta) + (u x v) sin(theta) + v_par with v_par = u (u.v).
/// This is the independent check route for rotate(); it never touches the
/// Hamilton product.
inline Vec3 rodrigues_rotate(Vec3 v, Vec3 u, double theta) {
    if (std::fabs(u.length() - 1.0) > 1e-9)
        throw BadAxisError("rotation axis is not unit length");
    const Vec3 v_par = dot(u, v) * u;
    const Vec3 v_perp = v - v_par;
    return std::cos(theta) * v_perp + std::sin(theta) * cross(u, v) + v_par;
}

/// Max coordinate-wise gap between conj(q1 q2 ... qn) and the reversed
/// product of conjugates. Zero up to rounding for any 2 or 3 factors.
inline double conj_product_residual(std::initializer_list<Quaternion> qs) {
    Quaternion prod = Quaternion::identity();
    Quaternion rev = Quaternion::identity();
    for (const Quaternion& q : qs)
        prod = hamilton(prod, q);
    for (auto it = std::rbegin(qs); it != std::rend(qs); ++it)
        rev = hamilton(rev, it->conjugate());
    const Quaternion d = prod.conjugate() - rev;
    double m = std::fabs(d.w);
    m = std::fmax(m, std::fabs(d.x));
    m = std::fmax(m, std::fabs(d.y));
    m = std::fmax(m, std::fabs(d.z));
    return m;
}

} // namespace rqvs
