#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hopfns/coeffs.hpp"
#include "hopfns/dynamics.hpp"
#include "hopfns/predict.hpp"
#include "hopfns/verify.hpp"

using namespace hopfns;

namespace {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
    int k = 0;
    double n = A.lpNorm<Eigen::Infinity>();
    while (n > 0.1) n /= 2, ++k;
    const Eigen::MatrixXd B = A / std::pow(2.0, k);
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(A.rows(), A.cols()), term = E;
    for (int i = 1; i < 30; ++i) {
        term = term * B / i;
        E += term;
    }
    for (int i = 0; i < k; ++i) E = E * E;
    return E;
}

}  // namespace

TEST_CASE("pure rotation returns to its start") {
    PlanarSystem s;
    CHECK(poincare(s, 0.1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(poincare(s, 0.0) == 0);
}

TEST_CASE("linear focus scales by exp(2 pi mu / omega)") {
    PlanarSystem s;
    s.mu = -0.05;
    s.omega = 1.3;
    CHECK(poincare(s, 0.2) == doctest::Approx(0.2 * std::exp(kTwoPi * s.mu / s.omega)).epsilon(1e-10));
}

TEST_CASE("negative radius is rejected") {
    PlanarSystem s;
    CHECK_THROWS_AS(integrate_phi(s, -0.1, kTwoPi), DomainError);
}

TEST_CASE("subcritical orbit near the first-order prediction") {
    PlanarSystem s = reference_subcritical();
    s.mu = -0.01;
    const auto o = find_orbit(s);
    REQUIRE(o.has_value());
    CHECK(o->r0 == doctest::Approx(3 * kPi / 800).epsilon(0.05));
    CHECK(o->stability == Stability::unstable);
    CHECK(o->floquet > 1);
    CHECK(o->period == doctest::Approx(kTwoPi).epsilon(0.05));
    CHECK(poincare(s, o->r0) == doctest::Approx(o->r0).epsilon(1e-9));

    s.mu = 0.01;
    CHECK(!find_orbit(s).has_value());
}

TEST_CASE("supercritical orbit is stable") {
    PlanarSystem s = reference_supercritical();
    const auto o = find_orbit(s, 0.01);
    REQUIRE(o.has_value());
    CHECK(o->mu == 0.01);
    CHECK(o->r0 == doctest::Approx(3 * kPi / 800).epsilon(0.05));
    CHECK(o->stability == Stability::stable);
    CHECK(o->floquet < 1);
    CHECK(!find_orbit(s, -0.01).has_value());
}

TEST_CASE("second-order orbit follows the square-root law") {
    const PlanarSystem s = sigma2_system();
    const double s2 = sigma_2(s.quad);
    const double mu = (s.omega * s2 > 0 ? 1 : -1) * 1e-4;
    const auto o = find_orbit(s, mu);
    REQUIRE(o.has_value());
    CHECK(o->r0 == doctest::Approx(*r0_second(s2, s.omega, mu)).epsilon(0.02));
}

TEST_CASE("linear center is non-isolated") {
    PlanarSystem s;
    CHECK_THROWS_AS(find_orbit(s), NonIsolatedOrbits);
}

TEST_CASE("continue_branch kinds and slope") {
    const std::vector<double> grid = {-1e-2, -5e-3, -2e-3, 0.0, 2e-3, 5e-3, 1e-2};
    auto b = continue_branch(reference_subcritical(), grid);
    CHECK(b.kind == BranchKind::subcritical);
    CHECK(b.points.size() == 3);
    CHECK(b.slope == doctest::Approx(-3 * kPi / 8).epsilon(0.03));

    b = continue_branch(reference_supercritical(), grid);
    CHECK(b.kind == BranchKind::supercritical);
    CHECK(b.slope == doctest::Approx(3 * kPi / 8).epsilon(0.03));
    for (const auto& o : b.points) CHECK(o.stability == Stability::stable);

    b = continue_branch(PlanarSystem{}, grid);
    CHECK(b.kind == BranchKind::vertical);
    CHECK(b.points.empty());
}

TEST_CASE("3D slaved orbit") {
    System3D s;
    s.c[0] = -1;
    s.c[4] = 1;
    s.h.h[0][0] = 0.5;
    s.quad = reference_supercritical().quad;
    const auto orbits = solve_3d_bvp(s, 5e-3);
    REQUIRE(orbits.size() == 1);
    const auto& o = orbits[0];
    CHECK(o.r0 == doctest::Approx(3 * kPi / 8 * 5e-3).epsilon(0.05));
    REQUIRE(o.transverse.size() == 1);
    CHECK(std::abs(o.transverse[0]) < 10 * o.r0 * o.r0);
    s.mu = 5e-3;
    const auto [u1, r1] = poincare3(s, o.transverse[0], o.r0);
    CHECK(r1 == doctest::Approx(o.r0).epsilon(1e-8));
    CHECK(std::abs(u1 - o.transverse[0]) < 1e-10);

    const auto b = continue_branch(s, {-5e-3, -2e-3, 2e-3, 5e-3});
    CHECK(b.kind == BranchKind::supercritical);
}

TEST_CASE("resonant_kernel_dim") {
    Eigen::MatrixXd A(2, 2);
    A << 0, -2, 2, 0;
    CHECK(resonant_kernel_dim(A, 1.0) == 2);
    CHECK(resonant_kernel_dim(A, 2.0) == 2);
    CHECK(resonant_kernel_dim(A, 3.0) == 0);
    CHECK(resonant_kernel_dim(Eigen::MatrixXd::Zero(1, 1), 1.0) == 1);
    CHECK(resonant_kernel_dim(-Eigen::MatrixXd::Identity(1, 1), 1.0) == 0);
}

TEST_CASE("monodromy of a linear transverse block") {
    SystemND s = SystemND::zeros(2);
    s.A << -0.3, 0.2, -0.1, -0.5;
    s.omega = 1.4;
    const auto md = monodromy_nd(s, 0.0, Eigen::VectorXd::Zero(2), 0.0);
    CHECK(md.kernel_dim == 0);
    CHECK(!md.near_singular);
    const Eigen::MatrixXd E = expm(kTwoPi * s.A / s.omega);
    CHECK((md.jacobian - E).norm() < 1e-7);
    CHECK(md.residual.norm() < 1e-14);
    CHECK_THROWS_AS(monodromy_nd(s, 0.0, Eigen::VectorXd::Zero(3), 0.0), DomainError);
}

TEST_CASE("fixed-step integration converges at fifth order") {
    PlanarSystem s = reference_subcritical();
    s.mu = -0.01;
    const double r = 0.01;
    IntegratorOptions tight;
    tight.rtol = 1e-13;
    tight.atol = 1e-15;
    const double ref = poincare(s, r, tight);
    auto err = [&](int n) {
        IntegratorOptions o;
        o.fixed_steps = n;
        return std::abs(poincare(s, r, o) - ref);
    };
    const double e1 = err(4), e2 = err(8);
    REQUIRE(e2 > 0);
    const double order = std::log2(e1 / e2);
    CHECK(order > 4.5);
    CHECK(order < 7);
}

TEST_CASE("time-domain and angle-domain return maps agree") {
    PlanarSystem s = reference_subcritical();
    s.mu = -0.01;
    s.smooth.a2 = 0.4;
    s.smooth.cb[0] = -0.7;
    for (double r : {0.005, 0.02, 0.05}) {
        const double a = poincare(s, r), t = poincare_time_domain(s, r);
        CHECK(std::abs(a - t) <= 1e-8 * r);
    }
}

TEST_CASE("fold of the degenerate branch") {
    PlanarSystem s = sigma2_system();
    s.quad.a[0][0] += 0.02;
    const FoldPoint f = locate_fold(s, 1e-3, 0.3, -0.05, 0.05);
    const double expect = bautin_fold_expansion(sigma_hash(s.quad), sigma_2(s.quad), s.omega);
    CHECK(f.mu == doctest::Approx(expect).epsilon(0.1));
    CHECK(f.r0 > 1e-3);
    CHECK(f.r0 < 0.3);
    CHECK(branch_mu_of_r(s, f.r0, -0.05, 0.05) == doctest::Approx(f.mu).epsilon(1e-6));
    CHECK_THROWS_AS(locate_fold(s, 0.3, 1e-3, -0.05, 0.05), DomainError);
}

TEST_CASE("fit_slope_origin") {
    std::vector<Orbit> pts(3);
    for (int i = 0; i < 3; ++i) pts[i].mu = 0.01 * (i + 1), pts[i].r0 = 2 * pts[i].mu;
    CHECK(fit_slope_origin(pts) == doctest::Approx(2));
    CHECK(fit_slope_origin({}) == 0);
}
