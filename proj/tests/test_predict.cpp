#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hopfns/averaging.hpp"
#include "hopfns/dynamics.hpp"
#include "hopfns/predict.hpp"
#include "hopfns/verify.hpp"

using namespace hopfns;

namespace {

PlanarSystem random_system(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-2, 2);
    PlanarSystem s;
    s.omega = 0.5 + 0.75 * std::abs(U(rng));
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) s.quad.a[i][k] = U(rng), s.quad.b[i][k] = U(rng);
    s.smooth.a1 = U(rng), s.smooth.b2 = U(rng);
    return s;
}

}  // namespace

TEST_CASE("r0_first examples") {
    auto r = r0_first(4, -0.01);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(3 * kPi / 800).epsilon(1e-14));
    CHECK(!r0_first(4, 0.01).has_value());
    r = r0_first(-4, 0.01);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(0.011781).epsilon(1e-4));
    CHECK(*r0_first(4, 0) == 0);
    CHECK_THROWS_AS(r0_first(0, 0.01), DomainError);
}

TEST_CASE("r0_second examples") {
    auto r = r0_second(5 * kPi, 1, 0.01);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(std::sqrt(0.004)).epsilon(1e-14));
    CHECK(!r0_second(5 * kPi, 1, -0.01).has_value());
    CHECK(r0_second(-5 * kPi, 1, -0.01).has_value());
    CHECK_THROWS_AS(r0_second(0, 1, 0.01), DomainError);
}

TEST_CASE("bautin fold formulas") {
    CHECK(bautin_fold(0.3, 1, 1) == doctest::Approx(-0.02).epsilon(1e-14));
    CHECK(bautin_fold(0.3, -1, 1) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(bautin_fold(-0.3, 1, 1) == bautin_fold(0.3, 1, 1));
    CHECK(bautin_fold_expansion(0.3, 1, 1) * kPi == doctest::Approx(-0.02).epsilon(1e-14));
    CHECK(bautin_fold(0.3, 1, 2) / bautin_fold_expansion(0.3, 1, 2) == doctest::Approx(2 * kPi));
    CHECK_THROWS_AS(bautin_fold(0.3, 0, 1), DomainError);
}

TEST_CASE("scalar_branch examples") {
    auto u = scalar_branch(2, {1, 1}, -1, 0.09);
    REQUIRE(u.size() == 2);
    CHECK(u[0] == doctest::Approx(-0.3));
    CHECK(u[1] == doctest::Approx(0.3));

    u = scalar_branch(1, {-0.2, 1}, 1, -0.1);
    REQUIRE(u.size() == 2);
    CHECK(u[0] == doctest::Approx(-0.5));
    CHECK(u[1] == doctest::Approx(0.1));

    u = scalar_branch(1, {-1, 1}, 1, 0);
    REQUIRE(u.size() == 1);
    CHECK(u[0] == 0);

    CHECK(scalar_branch(1, {-1, 1}, 1, 0.1).empty());
    CHECK_THROWS_AS(scalar_branch(3, {-1, 1}, 1, 0.1), DomainError);
    CHECK_THROWS_AS(scalar_branch(1, {-1, 1}, 0, 0.1), DomainError);
}

TEST_CASE("scalar_branch roots are equilibria") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int i = 0; i < 200; ++i) {
        const int j = 1 + i % 2;
        const SlopePair s{U(rng), U(rng)};
        const double sigma = U(rng), mu = 0.1 * U(rng);
        for (double u : scalar_branch(j, s, sigma, mu)) {
            REQUIRE(u != 0);
            const double f = mu * u + sigma * std::pow(u, j) * gen_abs(u, s);
            CHECK(std::abs(f) < 1e-14);
        }
    }
}

TEST_CASE("classify examples") {
    auto p = classify(coefficient_report(reference_subcritical()));
    CHECK(p.kind == PredictionKind::subcritical);
    CHECK(p.order == PredictionOrder::first);
    CHECK(p.mu_side == -1);
    CHECK(p.route == "sigma_hash");
    REQUIRE(p.r0(-0.01).has_value());
    CHECK(*p.r0(-0.01) == doctest::Approx(3 * kPi / 800).epsilon(1e-12));
    CHECK(!p.r0(0.01).has_value());

    p = classify(coefficient_report(reference_supercritical()));
    CHECK(p.kind == PredictionKind::supercritical);
    CHECK(p.mu_side == 1);
    CHECK(*p.r0(0.01) == doctest::Approx(3 * kPi / 800).epsilon(1e-12));

    PlanarSystem z;
    z.mu = 0.01;
    p = classify(coefficient_report(z));
    CHECK(p.kind == PredictionKind::vertical);
    CHECK(!p.r0(0.01).has_value());
}

TEST_CASE("classify falls back to second order") {
    const PlanarSystem s = sigma2_system();
    const auto rep = coefficient_report(s);
    const auto p = classify(rep);
    CHECK(p.order == PredictionOrder::second);
    CHECK(p.kind == PredictionKind::degenerate_second_order);
    const double s2 = sigma_2(s.quad);
    const double mu = (s.omega * s2 > 0 ? 1 : -1) * 1e-3;
    REQUIRE(p.r0(mu).has_value());
    CHECK(*p.r0(mu) == doctest::Approx(*r0_second(s2, s.omega, mu)).epsilon(1e-10));
    CHECK(!p.r0(-mu).has_value());
}

TEST_CASE("classification agrees with the averaged form on random systems") {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 50; ++i) {
        PlanarSystem s = random_system(rng);
        if (std::abs(sigma_hash(s.quad)) < 0.2) continue;
        const auto p = classify(coefficient_report(s));
        s.mu = p.mu_side * 1e-3;
        const auto nf = averaged_form(s);
        CHECK((nf.quadratic > 0) == (p.kind == PredictionKind::subcritical));
        const auto r = averaged_equilibrium(nf);
        REQUIRE(r.has_value());
        REQUIRE(p.r0(s.mu).has_value());
        CHECK(*p.r0(s.mu) == doctest::Approx(*r).epsilon(1e-10));
    }
}

TEST_CASE("predicted radius matches the return map on random systems") {
    std::mt19937_64 rng(33);
    int checked = 0;
    for (int i = 0; i < 40 && checked < 5; ++i) {
        PlanarSystem s = random_system(rng);
        if (std::abs(sigma_hash(s.quad)) < 1) continue;
        const auto p = classify(coefficient_report(s));
        const double mu = p.mu_side * 2e-4;
        s.mu = mu;
        const auto orbit = find_orbit(s);
        REQUIRE(orbit.has_value());
        CHECK(orbit->r0 == doctest::Approx(*p.r0(mu)).epsilon(0.05));
        ++checked;
    }
    CHECK(checked == 5);
}

TEST_CASE("u0_two_branch") {
    const auto u = u0_two_branch(4, 2, 1, 1, 0.01);
    REQUIRE(u.has_value());
    CHECK(*u == doctest::Approx(3 * kPi / 8 * std::sqrt(1e-6)).epsilon(1e-14));
    CHECK(!u0_two_branch(4, -2, 1, 1, 0.01).has_value());
    CHECK_THROWS_AS(u0_two_branch(0, 2, 1, 1, 0.01), DomainError);
}
