#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hopfns/core.hpp"

using namespace hopfns;

namespace {

PlanarSystem random_planar(std::mt19937_64& rng, bool slopes) {
    std::uniform_real_distribution<double> U(-2, 2);
    PlanarSystem s;
    s.omega = 0.5 + std::abs(U(rng)) * 0.75;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) s.quad.a[i][k] = U(rng), s.quad.b[i][k] = U(rng);
    if (slopes)
        for (int k = 0; k < 4; ++k) s.quad.alpha[k] = {U(rng), U(rng)}, s.quad.beta[k] = {U(rng), U(rng)};
    s.smooth.a1 = U(rng), s.smooth.a2 = U(rng), s.smooth.a3 = U(rng);
    s.smooth.b1 = U(rng), s.smooth.b2 = U(rng), s.smooth.b3 = U(rng);
    return s;
}

}  // namespace

TEST_CASE("gen_abs examples") {
    CHECK(gen_abs(2, {-1, 1}) == 2);
    CHECK(gen_abs(-3, {-1, 1}) == 3);
    CHECK(gen_abs(-3, {-1, 5}) == 3);
    CHECK(gen_abs(2, {-1, 5}) == 10);
    CHECK(gen_abs(0, {-7, 3}) == 0);
}

TEST_CASE("gen_abs is positively homogeneous and Lipschitz") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int i = 0; i < 500; ++i) {
        const SlopePair s{U(rng), U(rng)};
        const double u = U(rng), v = U(rng), l = std::abs(U(rng)) + 0.01;
        CHECK(gen_abs(l * u, s) == doctest::Approx(l * gen_abs(u, s)).epsilon(1e-14));
        const double L = std::max(std::abs(s.p_minus), std::abs(s.p_plus));
        CHECK(std::abs(gen_abs(u, s) - gen_abs(v, s)) <= L * std::abs(u - v) + 1e-14);
    }
}

TEST_CASE("eval_planar_rhs examples") {
    PlanarSystem s;
    auto z = eval_planar_rhs(s, 0, 0);
    CHECK(z[0] == 0);
    CHECK(z[1] == 0);

    z = eval_planar_rhs(s, 1, 0);
    CHECK(z[0] == 0);
    CHECK(z[1] == 1);

    s.quad.a[0][0] = 1;
    z = eval_planar_rhs(s, -2, 0);
    CHECK(z[0] == -4);
    CHECK(z[1] == -2);
}

TEST_CASE("eval_planar_rhs is Lipschitz across v = 0") {
    PlanarSystem s;
    s.quad.a[0][0] = 1;
    const double w = 0.3;
    for (double h : {1e-2, 1e-4, 1e-6}) {
        const auto a = eval_planar_rhs(s, -h, w), b = eval_planar_rhs(s, h, w);
        // Lipschitz constant near the origin is bounded independently of h
        CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) / (2 * h) < 2.0);
    }
}

TEST_CASE("eval_planar_rhs Jacobian at 0 equals the linear part") {
    std::mt19937_64 rng(2);
    PlanarSystem s = random_planar(rng, true);
    s.mu = 0.2;
    const Mat2 L = s.linear();
    for (double h : {1e-4, 1e-6, 1e-8}) {
        const auto fx = eval_planar_rhs(s, h, 0), fy = eval_planar_rhs(s, 0, h);
        CHECK(std::abs(fx[0] / h - L[0][0]) < 10 * h);
        CHECK(std::abs(fx[1] / h - L[1][0]) < 10 * h);
        CHECK(std::abs(fy[0] / h - L[0][1]) < 10 * h);
        CHECK(std::abs(fy[1] / h - L[1][1]) < 10 * h);
    }
}

TEST_CASE("polar_decompose: chi2 samples for a11 = 1") {
    PlanarSystem s;
    s.quad.a[0][0] = 1;
    const auto p = polar_decompose(s);
    CHECK(p.chi2(0) == doctest::Approx(1));
    CHECK(p.chi2(kPi) == doctest::Approx(1));
    CHECK(p.chi2(kPi / 2) == doctest::Approx(0).epsilon(1e-15));
}

TEST_CASE("polar_decompose: normal form has constant M and W") {
    PlanarSystem s;
    s.mu = -0.3;
    s.omega = 1.7;
    const auto p = polar_decompose(s);
    for (double t : {0.0, 0.4, 2.0, 5.9}) {
        CHECK(p.M(t) == doctest::Approx(-0.3));
        CHECK(p.W(t) == doctest::Approx(1.7));
    }
}

TEST_CASE("polar_decompose: rotation matrix has W = 1") {
    PlanarSystem s;
    s.normal_form = false;
    s.base = {{{0, -1}, {1, 0}}};
    const auto p = polar_decompose(s);
    for (double t : {0.0, 1.0, 2.5, 4.0}) CHECK(p.W(t) == doctest::Approx(1));
}

TEST_CASE("polar_decompose rejects a vanishing angular speed") {
    PlanarSystem s;
    s.normal_form = false;
    s.base = {{{1, 1}, {1, -1}}};
    CHECK_THROWS_AS(polar_decompose(s), DomainError);
}

TEST_CASE("switching angles contain the axes") {
    std::mt19937_64 rng(3);
    const auto p = polar_decompose(random_planar(rng, false));
    REQUIRE(p.switching_angles.size() >= 4);
    CHECK(p.switching_angles[0] == 0);
    CHECK(p.switching_angles[1] == doctest::Approx(kPi / 2));
    CHECK(p.switching_angles[2] == doctest::Approx(kPi));
    CHECK(p.switching_angles[3] == doctest::Approx(1.5 * kPi));
    for (size_t i = 1; i < p.switching_angles.size(); ++i) CHECK(p.switching_angles[i] > p.switching_angles[i - 1]);
}

TEST_CASE("rotated switching angles are zeros of the rotated factors") {
    const Mat2 T = {{{2, 0.5}, {-0.3, 1}}};
    const auto K = switching_angles_for(T);
    for (double t : K) {
        const double a = T[0][0] * std::cos(t) + T[0][1] * std::sin(t);
        const double b = T[1][0] * std::cos(t) + T[1][1] * std::sin(t);
        const bool axis = std::abs(std::cos(t)) < 1e-12 || std::abs(std::sin(t)) < 1e-12;
        CHECK((axis || std::abs(a) < 1e-12 || std::abs(b) < 1e-12));
    }
    CHECK(K.size() == 8);
}

TEST_CASE("chi2 matches the radial projection of the quadratic part") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0, kTwoPi);
    for (int i = 0; i < 20; ++i) {
        PlanarSystem s = random_planar(rng, true);
        s.mu = 0.1;
        const auto p = polar_decompose(s);
        const double r = 1e-3, t = U(rng);
        const double v = r * std::cos(t), w = r * std::sin(t);
        const auto f = eval_planar_rhs(s, v, w);
        const double radial = (v * f[0] + w * f[1]) / r;
        const double angular = (v * f[1] - w * f[0]) / (r * r);
        CHECK(std::abs(r * (p.M(t) + r * p.chi2(t)) - radial) < 1e-12);
        CHECK(std::abs(p.W(t) + r * p.Omega1(t) - angular) < 1e-12);
    }
}

TEST_CASE("chi3 and Omega2 carry the cubic terms") {
    PlanarSystem s;
    s.smooth.ca[0] = 1.5;
    s.smooth.cb[3] = -0.5;
    s.smooth.cb[1] = 0.25;
    const auto p = polar_decompose(s);
    const double r = 0.1, t = 0.7;
    const double v = r * std::cos(t), w = r * std::sin(t);
    const auto f = eval_planar_rhs(s, v, w);
    CHECK((v * f[0] + w * f[1]) / r == doctest::Approx(r * r * r * p.chi3(t)).epsilon(1e-12));
    CHECK((v * f[1] - w * f[0]) / (r * r) == doctest::Approx(s.omega + r * r * p.Omega2(t)).epsilon(1e-12));
}

TEST_CASE("polar functions are 2pi-periodic") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
        const auto p = polar_decompose(random_planar(rng, true));
        CHECK(std::abs(p.chi2(0) - p.chi2(kTwoPi)) < 1e-14);
        CHECK(std::abs(p.Omega1(0) - p.Omega1(kTwoPi)) < 1e-14);
        CHECK(std::abs(p.chi3(0) - p.chi3(kTwoPi)) < 1e-14);
        CHECK(std::abs(p.Omega2(0) - p.Omega2(kTwoPi)) < 1e-14);
    }
}

TEST_CASE("3D polar terms match the Cartesian right-hand side") {
    System3D s;
    s.c = {-0.7, 0.3, 0.2, -0.4, 0.9, 0.5, -0.6, 0.1, 0.8};
    s.h.h[1][0] = 1.1;
    s.h.h[0][1] = -0.4;
    s.quad.a[0][0] = 1;
    s.quad.b[1][1] = -2;
    const auto p = polar_decompose(s);
    const double r = 1e-3, u = 2e-4, t = 1.3;
    const double v = r * std::cos(t), w = r * std::sin(t);
    const auto f = eval_3d_rhs(s, u, v, w);
    const double radial = (v * f[1] + w * f[2]) / r;
    const double angular = (v * f[2] - w * f[1]) / (r * r);
    CHECK(std::abs(r * r * p.chi2(t) + r * u * p.chi1(t) - radial) < 1e-15);
    CHECK(std::abs(s.omega + r * p.Omega1(t) + u * p.Omega0(t) - angular) < 1e-12);
    // u' = c1 u + c2 u^2 + u r (c3 c + c4 s) + r^2 Upsilon
    const double du = s.c[0] * u + s.c[1] * u * u + u * r * (s.c[2] * std::cos(t) + s.c[3] * std::sin(t)) +
                      r * r * p.Upsilon(t);
    CHECK(std::abs(du - f[0]) < 1e-16);
}

TEST_CASE("validation") {
    PlanarSystem s;
    s.omega = 0;
    CHECK_THROWS_AS(s.validate(), DomainError);
    PlanarSystem g;
    g.normal_form = false;
    g.base = {{{1, 2}, {3, 1}}};
    CHECK_THROWS_AS(g.validate(), DomainError);
    g.base = {{{1, -2}, {3, -1}}};
    CHECK_NOTHROW(g.validate());
    System3D t;
    t.omega = 0;
    CHECK_THROWS_AS(t.validate(), DomainError);
}

TEST_CASE("SystemND embedding of a 3D system") {
    System3D s;
    s.c = {-1, 2, 3, 4, 5, 6, 7, 8, 9};
    const SystemND n = SystemND::from_3d(s);
    CHECK(n.transverse_dim() == 1);
    CHECK(n.A(0, 0) == -1);
    CHECK(n.c9(0) == 9);
    CHECK_NOTHROW(n.validate());
}
