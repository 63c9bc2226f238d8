#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rotateqvs/quaternion.hpp"
#include "rotateqvs/rng.hpp"

using namespace rqvs;

namespace {

constexpr double kPi = 3.14159265358979323846;

bool near(const Quaternion& a, const Quaternion& b, double tol) {
    return std::fabs(a.w - b.w) <= tol && std::fabs(a.x - b.x) <= tol &&
           std::fabs(a.y - b.y) <= tol && std::fabs(a.z - b.z) <= tol;
}

Quaternion random_quat(Rng& rng, double lo = -2.0, double hi = 2.0) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

} // namespace

TEST_CASE("conjugate flips the imaginary part only") {
    CHECK(near(Quaternion{1, 2, 3, 4}.conjugate(), {1, -2, -3, -4}, 0.0));
    CHECK(near(Quaternion{5, 0, 0, 0}.conjugate(), {5, 0, 0, 0}, 0.0));
    CHECK(near(Quaternion{0, 1, 0, 0}.conjugate(), {0, -1, 0, 0}, 0.0));
    const Quaternion q{0.3, -1.2, 7.0, 0.25};
    CHECK(near(q.conjugate().conjugate(), q, 0.0));
}

TEST_CASE("inner product sums coordinate products") {
    CHECK(inner({1, 1, 0, 0}, {1, 1, 0, 0}) == 2.0);
    CHECK(inner({0, 1, 0, 0}, {0, 0, 1, 0}) == 0.0);
    CHECK(inner({1, 2, 3, 4}, {1, 2, 3, 4}) == 30.0);
    CHECK(inner({1, 2, 3, 4}, {4, 3, 2, 1}) == inner({4, 3, 2, 1}, {1, 2, 3, 4}));
}

TEST_CASE("norm is the Euclidean length of the four coordinates") {
    CHECK(Quaternion{1, 2, 2, 4}.norm() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(Quaternion{0, 0, 0, 0}.norm() == 0.0);
    for (const double theta : {0.0, 0.3, 1.0, 2.5, -4.0}) {
        const Quaternion q{std::cos(theta / 2), 0, 0, std::sin(theta / 2)};
        CHECK(std::fabs(q.norm() - 1.0) <= 1e-15);
    }
    const Quaternion q{1.5, -2.0, 0.25, 3.0};
    CHECK(std::fabs(q.norm() - std::sqrt(inner(q, q))) <= 1e-15);
}

TEST_CASE("inverse is conjugate over squared norm") {
    CHECK(near(inverse({2, 0, 0, 0}), {0.5, 0, 0, 0}, 1e-15));
    CHECK(near(inverse({0, 1, 0, 0}), {0, -1, 0, 0}, 1e-15));
    CHECK(near(inverse({1, 1, 0, 0}), {0.5, -0.5, 0, 0}, 1e-15));
    CHECK(near(hamilton(Quaternion{1, 1, 0, 0}, inverse({1, 1, 0, 0})), {1, 0, 0, 0}, 1e-12));
    CHECK_THROWS_AS((void)inverse({0, 0, 0, 0}), ZeroNormError);
}

TEST_CASE("inverse is two-sided across nine orders of magnitude") {
    Rng rng(100);
    for (const double scale : {1e-6, 1e-3, 1.0, 1e3, 1e6}) {
        const Quaternion q = scale * random_quat(rng, 0.5, 2.0);
        const Quaternion qi = inverse(q);
        CHECK(near(hamilton(q, qi), {1, 0, 0, 0}, 1e-12));
        CHECK(near(hamilton(qi, q), {1, 0, 0, 0}, 1e-12));
    }
}

TEST_CASE("hamilton product basis rules and hand expansion") {
    const Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1};
    CHECK(near(hamilton(i, j), k, 0.0));
    CHECK(near(hamilton(j, i), {0, 0, 0, -1}, 0.0));
    CHECK(near(hamilton({1, 1, 0, 0}, {1, 0, 1, 0}), {1, 1, 1, 1}, 0.0));
    const Quaternion q{0.7, -1.1, 2.2, 0.4};
    CHECK(near(hamilton(q, Quaternion::identity()), q, 0.0));
    CHECK(near(hamilton(Quaternion::identity(), q), q, 0.0));
}

TEST_CASE("vector-form product agrees with the coordinate expansion") {
    const Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0};
    CHECK(near(hamilton_3d(i, j), {0, 0, 0, 1}, 0.0));
    CHECK(near(hamilton_3d(i, i), {-1, 0, 0, 0}, 0.0));

    Rng rng(7);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const Quaternion a = random_quat(rng), b = random_quat(rng);
        const Quaternion d = hamilton(a, b) - hamilton_3d(a, b);
        worst = std::fmax(worst, std::fmax(std::fmax(std::fabs(d.w), std::fabs(d.x)),
                                           std::fmax(std::fabs(d.y), std::fabs(d.z))));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("product norm is multiplicative") {
    Rng rng(8);
    for (int n = 0; n < 1000; ++n) {
        const Quaternion a = random_quat(rng), b = random_quat(rng);
        const double sep = a.norm() * b.norm();
        CHECK(std::fabs(hamilton(a, b).norm() - sep) <= 1e-10 * std::fmax(1.0, sep));
    }
}

TEST_CASE("conjugate reverses products") {
    const Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0};
    CHECK(conj_product_residual({i, j}) == 0.0);
    const Quaternion q{0.4, 1.0, -2.0, 0.5};
    CHECK(conj_product_residual({q, Quaternion::identity()}) == 0.0);

    Rng rng(9);
    for (int n = 0; n < 200; ++n) {
        const Quaternion a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
        CHECK(conj_product_residual({a, b}) <= 1e-12);
        CHECK(conj_product_residual({a, b, c}) <= 1e-12);
    }
}

TEST_CASE("axis-angle construction uses the half angle") {
    const UnitQuaternion z_pi = UnitQuaternion::from_axis_angle({0, 0, 1}, kPi);
    CHECK(near(z_pi.value(), {0, 0, 0, 1}, 1e-15));

    const UnitQuaternion none = UnitQuaternion::from_axis_angle({1, 0, 0}, 0.0);
    CHECK(near(none.value(), {1, 0, 0, 0}, 0.0));

    const double h = std::sqrt(2.0) / 2.0;
    const UnitQuaternion y_quarter = UnitQuaternion::from_axis_angle({0, 1, 0}, kPi / 2);
    CHECK(near(y_quarter.value(), {h, 0, h, 0}, 1e-15));

    CHECK_THROWS_AS((void)UnitQuaternion::from_axis_angle({0, 0, 2}, 1.0), BadAxisError);
}

TEST_CASE("sandwich rotation moves the imaginary part as a 3D rotation") {
    const UnitQuaternion z_quarter = UnitQuaternion::from_axis_angle({0, 0, 1}, kPi / 2);
    CHECK(near(rotate({0, 1, 0, 0}, z_quarter), {0, 0, 1, 0}, 1e-15));

    const Quaternion x{1.5, 0.4, -2.0, 0.3};
    CHECK(near(rotate(x, UnitQuaternion{}), x, 0.0));

    const UnitQuaternion some = UnitQuaternion::from_axis_angle({0, 1, 0}, 1.234);
    CHECK(near(rotate({3, 0, 0, 0}, some), {3, 0, 0, 0}, 1e-15));
}

TEST_CASE("rotation preserves the real part and the norm") {
    Rng rng(10);
    for (int n = 0; n < 500; ++n) {
        Vec3 axis{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (axis.length() < 0.1)
            continue;
        axis = (1.0 / axis.length()) * axis;
        const UnitQuaternion q = UnitQuaternion::from_axis_angle(axis, rng.uniform(-6.3, 6.3));
        const Quaternion x = random_quat(rng);
        const Quaternion y = rotate(x, q);
        CHECK(std::fabs(y.w - x.w) <= 1e-10);
        CHECK(std::fabs(y.norm() - x.norm()) <= 1e-10);
    }
}

TEST_CASE("axis-angle formula on known turns") {
    const Vec3 turned = rodrigues_rotate({1, 0, 0}, {0, 0, 1}, kPi / 2);
    CHECK(std::fabs(turned.x - 0) <= 1e-15);
    CHECK(std::fabs(turned.y - 1) <= 1e-15);
    CHECK(std::fabs(turned.z - 0) <= 1e-15);

    const Vec3 v{0.3, -0.4, 2.0};
    const Vec3 same = rodrigues_rotate(v, {0, 1, 0}, 0.0);
    CHECK(std::fabs(same.x - v.x) <= 1e-15);
    CHECK(std::fabs(same.y - v.y) <= 1e-15);
    CHECK(std::fabs(same.z - v.z) <= 1e-15);

    const Vec3 half = rodrigues_rotate({1, 1, 0}, {0, 0, 1}, kPi);
    CHECK(std::fabs(half.x + 1) <= 1e-15);
    CHECK(std::fabs(half.y + 1) <= 1e-15);
    CHECK(std::fabs(half.z - 0) <= 1e-15);

    CHECK_THROWS_AS((void)rodrigues_rotate({1, 0, 0}, {0, 0.5, 0}, 1.0), BadAxisError);
}

TEST_CASE("sandwich rotation matches the axis-angle formula") {
    Rng rng(11);
    for (int n = 0; n < 500; ++n) {
        Vec3 axis{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (axis.length() < 0.1)
            continue;
        axis = (1.0 / axis.length()) * axis;
        const double theta = rng.uniform(-6.3, 6.3);
        const Quaternion x = random_quat(rng);
        const Quaternion y = rotate(x, UnitQuaternion::from_axis_angle(axis, theta));
        const Vec3 expect = rodrigues_rotate(x.imag(), axis, theta);
        CHECK(std::fabs(y.x - expect.x) <= 1e-10);
        CHECK(std::fabs(y.y - expect.y) <= 1e-10);
        CHECK(std::fabs(y.z - expect.z) <= 1e-10);
    }
}

TEST_CASE("normalize scales to unit length and rejects zero") {
    CHECK(near(normalize({2, 0, 0, 0}).value(), {1, 0, 0, 0}, 0.0));
    CHECK(near(normalize({0, 3, 0, 4}).value(), {0, 0.6, 0, 0.8}, 1e-15));
    CHECK_THROWS_AS((void)normalize({0, 0, 0, 0}), ZeroNormError);

    const Quaternion q{0.2, -1.0, 0.7, 3.0};
    const Quaternion once = normalize(q).value();
    const Quaternion twice = normalize(once).value();
    CHECK(near(once, twice, 1e-15));
    CHECK(std::fabs(once.norm() - 1.0) <= 1e-12);
}

TEST_CASE("unit inverse equals conjugate") {
    const UnitQuaternion q = UnitQuaternion::from_axis_angle({0, 0, 1}, 0.77);
    CHECK(near(q.inverse().value(), q.value().conjugate(), 0.0));
    CHECK(near(hamilton(q.value(), q.inverse().value()), {1, 0, 0, 0}, 1e-15));
}

TEST_CASE("rotations compose through the product of their quaternions") {
    Rng rng(12);
    for (int n = 0; n < 200; ++n) {
        const UnitQuaternion q1 = normalize(random_quat(rng, -1.0, 1.0));
        const UnitQuaternion q2 = normalize(random_quat(rng, -1.0, 1.0));
        const Quaternion x = random_quat(rng);
        const Quaternion two_step = rotate(rotate(x, q1), q2);
        const Quaternion one_step = rotate(x, normalize(hamilton(q2.value(), q1.value())));
        CHECK(near(two_step, one_step, 1e-10));
    }
}
