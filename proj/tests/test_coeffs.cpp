#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hopfns/coeffs.hpp"
#include "hopfns/quadrature.hpp"
#include "hopfns/verify.hpp"

using namespace hopfns;

namespace {

NonsmoothQuadCoeffs random_quad(std::mt19937_64& rng, bool slopes) {
    std::uniform_real_distribution<double> U(-2, 2);
    NonsmoothQuadCoeffs q;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) q.a[i][k] = U(rng), q.b[i][k] = U(rng);
    if (slopes)
        for (int k = 0; k < 4; ++k) q.alpha[k] = {U(rng), U(rng)}, q.beta[k] = {U(rng), U(rng)};
    return q;
}

double chi2_total(const NonsmoothQuadCoeffs& q) {
    PlanarSystem s;
    s.quad = q;
    const auto p = polar_decompose(s);
    return periodic_integral([&](double t) { return p.chi2(t); }, p.switching_angles);
}

}  // namespace

TEST_CASE("sigma_hash examples") {
    CHECK(sigma_hash(reference_subcritical().quad) == 4);
    CHECK(sigma_hash(reference_supercritical().quad) == -4);
    CHECK(sigma_hash(NonsmoothQuadCoeffs{}) == 0);
}

TEST_CASE("sigma_hash rejects general slopes") {
    NonsmoothQuadCoeffs q;
    q.alpha[0] = {-1, 5};
    CHECK_THROWS_AS(sigma_hash(q), DomainError);
}

TEST_CASE("sigma_tilde examples") {
    const auto q = reference_subcritical().quad;
    CHECK(sigma_tilde(q) == sigma_hash(q));

    NonsmoothQuadCoeffs smooth = q;
    for (int k = 0; k < 4; ++k) smooth.alpha[k] = smooth.beta[k] = {0.7, 0.7};
    CHECK(sigma_tilde(smooth) == 0);

    NonsmoothQuadCoeffs g;
    g.a[0][0] = 1;
    g.alpha[0] = {-1, 5};
    CHECK(sigma_tilde(g) == 6);
    CHECK(0.75 * chi2_total(g) == doctest::Approx(6).epsilon(1e-12));
}

TEST_CASE("sigma_2 examples") {
    CHECK(sigma_2(NonsmoothQuadCoeffs{}) == 0);

    NonsmoothQuadCoeffs q;
    q.a[0][0] = 1;
    q.b[0][0] = 1;
    CHECK(sigma_2(q) == doctest::Approx(kPi / 2));
    CHECK(chi2_omega1_integral(q) == doctest::Approx(kPi / 2).epsilon(1e-12));

    NonsmoothQuadCoeffs r;
    r.a[1][1] = 1;
    CHECK(sigma_2(r) == 0);
    CHECK(std::abs(chi2_omega1_integral(r)) < 1e-13);
}

TEST_CASE("sigma_2 of the sigma# = 0 reference system") {
    const auto q = sigma2_system().quad;
    CHECK(sigma_hash(q) == 0);
    CHECK(sigma_2(q) == doctest::Approx(kPi / 2 - 2.0 / 3.0).epsilon(1e-14));
    CHECK(chi2_omega1_integral(q) == doctest::Approx(kPi / 2 - 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("S_q, S_c and sigma_s examples") {
    SmoothCoeffs z;
    CHECK(s_q(z) == 0);
    CHECK(s_c(z) == 0);
    CHECK(sigma_s(z, 1) == 0);

    SmoothCoeffs c;
    c.ca[0] = 1;
    CHECK(s_c(c) == 3);
    CHECK(chi3_integral(c) == doctest::Approx(kPi / 4 * 3).epsilon(1e-12));

    SmoothCoeffs q;
    q.a1 = q.a2 = 1;
    CHECK(s_q(q) == 1);
    CHECK(chi2_omega1_integral(NonsmoothQuadCoeffs{}, q) == doctest::Approx(-kPi / 4).epsilon(1e-12));

    CHECK(sigma_s(q, 2) == doctest::Approx(1.0 / 16));
}

TEST_CASE("smoothed_sigma examples") {
    const auto q = reference_subcritical().quad;
    CHECK(smoothed_sigma(q, {2.0 / 3, 1, 1, 2.0 / 3}) == doctest::Approx(sigma_hash(q)).epsilon(1e-15));

    NonsmoothQuadCoeffs a;
    a.a[0][0] = 1;
    a.a[0][1] = -4;
    CHECK(smoothed_sigma(a, {1, 1, 1, 1}) == -1);
    CHECK(sigma_hash(a) == -2);
    a.a[0][1] = -2.5;
    CHECK(smoothed_sigma(a, {1, 1, 1, 1}) == 0.5);
    CHECK(sigma_hash(a) == -0.5);

    CHECK(smoothed_sigma(NonsmoothQuadCoeffs{}, {1, 1, 1, 1}) == 0);
}

TEST_CASE("lambda_general examples") {
    CHECK(lambda_general({{{0.3, -2}, {2, 0.3}}}) == doctest::Approx(0.15));
    CHECK(lambda_general({{{0, -1}, {1, 0}}}) == 0);
    CHECK(lambda_general({{{1, -2}, {3, 1}}}) == doctest::Approx(2 / std::sqrt(24.0)));
    CHECK(lambda_general_quadrature({{{1, -2}, {3, 1}}}) == doctest::Approx(2 / std::sqrt(24.0)).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_general({{{1, 2}, {3, 1}}}), DomainError);
}

TEST_CASE("lambda quadrature is independent of the rotation direction") {
    const Mat2 m = {{{0.4, 2}, {-3, -0.1}}};
    CHECK(lambda_general_quadrature(m) == doctest::Approx(lambda_general(m)).epsilon(1e-12));
}

TEST_CASE("normal_form_transform conjugates to the normal form") {
    const Mat2 m = {{{1, -2}, {3, 0.2}}};
    const auto tf = normal_form_transform(m);
    const Mat2 B = mat_mul(mat_inverse(tf.T), mat_mul(m, tf.T));
    CHECK(B[0][0] == doctest::Approx(tf.mu));
    CHECK(B[1][1] == doctest::Approx(tf.mu));
    CHECK(B[0][1] == doctest::Approx(-tf.omega));
    CHECK(B[1][0] == doctest::Approx(tf.omega));
}

TEST_CASE("sigma_general examples") {
    const auto id = transform_from_rows(1, 1, 0, kPi / 2, 1.3);
    const auto q = reference_subcritical().quad;
    const auto g = sigma_general(id, q);
    REQUIRE(g.Sigma);
    CHECK(*g.Sigma == doctest::Approx(2 * sigma_hash(q) / (3 * kPi * 1.3)).epsilon(1e-12));
    CHECK(g.Sigma_quad == doctest::Approx(*g.Sigma).epsilon(1e-10));

    const auto z = sigma_general(id, NonsmoothQuadCoeffs{});
    CHECK(*z.Sigma == 0);

    NonsmoothQuadCoeffs a;
    a.a[0][0] = 1;
    const auto c2 = sigma_general(transform_from_rows(2, 1, 0, kPi / 2, 1), a);
    CHECK(*c2.Sigma == doctest::Approx(8 / (3 * kPi)));
    CHECK(c2.Sigma_quad == doctest::Approx(8 / (3 * kPi)).epsilon(1e-10));
}

TEST_CASE("sigma_general closed forms vs quadrature on random transforms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2, 2), A(0, kTwoPi);
    for (int i = 0; i < 50; ++i) {
        const double C = U(rng), D = U(rng), ph = A(rng), th = A(rng);
        if (std::abs(std::sin(th - ph)) < 0.1 || std::abs(C) < 0.1 || std::abs(D) < 0.1) continue;
        const auto q = random_quad(rng, i % 2 == 0);
        const auto g = sigma_general(transform_from_rows(C, D, ph, th, 0.5 + std::abs(U(rng))), q);
        CHECK(g.Sigma_tilde == doctest::Approx(g.Sigma_quad).epsilon(1e-9));
        if (g.Sigma) CHECK(*g.Sigma == doctest::Approx(g.Sigma_tilde).epsilon(1e-12));
    }
}

TEST_CASE("sigma# equals (3/4) int chi2 on random draws") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 1000; ++i) {
        const auto q = random_quad(rng, false);
        CHECK(std::abs(sigma_hash(q) - 0.75 * chi2_total(q)) <= 1e-10);
    }
}

TEST_CASE("sigma_tilde with default slopes equals sigma#") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const auto q = random_quad(rng, false);
        CHECK(std::abs(sigma_tilde(q) - sigma_hash(q)) <= 1e-14);
    }
}

TEST_CASE("gamma23_planar") {
    PlanarSystem s = sigma2_system();
    auto g = gamma23_planar(s);
    CHECK(g.Gamma2 == 0);
    CHECK(g.Gamma3 == doctest::Approx(-(kPi / 2 - 2.0 / 3.0)).epsilon(1e-12));

    g = gamma23_planar(PlanarSystem{});
    CHECK(g.Gamma2 == 0);
    CHECK(g.Gamma3 == 0);

    g = gamma23_planar(reference_subcritical());
    CHECK(g.Gamma2 == doctest::Approx(16.0 / 3.0));
    CHECK(g.Gamma2_quad == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
    CHECK(g.Gamma3 == doctest::Approx(g.Gamma3_quad).epsilon(1e-10));
    // Gamma3 = (16/9 sigma#^2 - sigma2) / omega^2
    CHECK(g.Gamma3 == doctest::Approx(16.0 / 9.0 * 16 - sigma_2(reference_subcritical().quad)).epsilon(1e-12));
}

TEST_CASE("ledger_3d examples") {
    System3D s;
    auto L = ledger_3d(s);
    CHECK(L.degenerate);
    CHECK(L.report.at("gamma_bar_10") == 0);
    CHECK(L.report.has_flag("degenerate transverse direction"));

    s.c[0] = 1;
    L = ledger_3d(s);
    CHECK(!L.degenerate);
    CHECK(L.report.at("gamma_bar_10") == doctest::Approx(std::exp(kTwoPi) - 1).epsilon(1e-14));
    CHECK(L.report.entries.at("gamma_bar_10").cross_check.value() ==
          doctest::Approx(std::exp(kTwoPi) - 1).epsilon(1e-9));

    System3D d;
    d.c[1] = 1.5;
    d.h.h[1][0] = 1;
    L = ledger_3d(d);
    CHECK(L.report.at("gamma_hash") == 2);
    CHECK(L.report.at("gamma_bar_20") == doctest::Approx(kTwoPi * 1.5));
}

TEST_CASE("ledger_3d c1 = 0 entries are linear in mu") {
    System3D s;
    s.c[1] = 1;
    s.c[3] = 0.7;
    s.c[4] = 0.5;
    s.h.h[1][0] = 1;
    s.h.h[1][1] = -0.3;
    s.omega = 1.2;
    s.quad = reference_supercritical().quad;
    const double gh = 2 * 1 + 0.5 + kPi * -0.3;
    auto at = [&](double mu, const char* name) {
        System3D t = s;
        t.mu = mu;
        return ledger_3d(t).report.at(name);
    };
    // Richardson: 2 f(h) - f(2h) / 2 ... cancel the O(mu^2) term of f(mu)/mu
    const double h = 1e-4;
    auto slope = [&](const char* name) { return 2 * at(h, name) / h - at(2 * h, name) / (2 * h); };
    const double w2 = s.omega * s.omega;
    CHECK(slope("gamma_bar_02") == doctest::Approx(-kPi * gh / w2).epsilon(1e-5));
    CHECK(slope("gamma_bar_11") == doctest::Approx(-kTwoPi * s.c[3] / w2).epsilon(1e-5));
}

TEST_CASE("ledger_3d closed forms agree with quadrature at mu = 0") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 5; ++i) {
        System3D s;
        for (auto& c : s.c) c = U(rng);
        s.c[0] = -0.5 + 0.3 * U(rng);
        s.quad = random_quad(rng, false);
        s.h.h[0][1] = U(rng);
        const auto L = ledger_3d(s);
        for (const auto& [name, e] : L.report.entries)
            if (e.cross_check) CHECK_MESSAGE(e.abs_diff() <= 1e-9 * std::max(1.0, std::abs(e.value)), name);
    }
}

TEST_CASE("ledger_3d closed-form discrepancy is O(mu^2)") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 5; ++i) {
        System3D s;
        for (auto& c : s.c) c = U(rng);
        s.c[0] = -0.5 + 0.3 * U(rng);
        s.quad = random_quad(rng, false);
        s.h.h[0][1] = U(rng);
        s.mu = 0.01 * (U(rng) > 0 ? 1 : -1);
        const auto coarse = ledger_3d(s).report;
        s.mu /= 4;
        const auto fine = ledger_3d(s).report;
        for (const auto& [name, e] : coarse.entries) {
            if (!e.cross_check) continue;
            // a quarter of mu cuts an O(mu^2) error by 16
            CHECK_MESSAGE(fine.entries.at(name).abs_diff() <= e.abs_diff() / 8 + 1e-11, name);
        }
    }
}

TEST_CASE("gamma3_tilde") {
    System3D s;
    s.c[0] = -0.8;
    s.quad = reference_subcritical().quad;
    auto g = gamma3_tilde(s);
    CHECK(g.value == doctest::Approx(g.Gamma3).epsilon(1e-12));

    System3D t;
    t.c[0] = 1;
    t.c[4] = 1;
    t.c[5] = 1;
    g = gamma3_tilde(t);
    REQUIRE(g.closed);
    CHECK(*g.closed - g.Gamma3 == doctest::Approx(-kPi / 10).epsilon(1e-10));
    CHECK(g.value == doctest::Approx(*g.closed).epsilon(1e-9));

    System3D z;
    CHECK_THROWS_AS(gamma3_tilde(z), DomainError);
}

TEST_CASE("gamma_hash_effective") {
    System3D s;
    s.c[1] = 1;
    s.c[4] = 2;
    s.quad.a[0][0] = -2;
    CHECK(gamma_hash_effective(s) == doctest::Approx(2).epsilon(1e-9));
    s.quad.a[0][0] = 0;
    s.quad.b[1][1] = -2;
    CHECK(gamma_hash_effective(s) == doctest::Approx(-2).epsilon(1e-9));
}

TEST_CASE("coefficient report: zero nonlinearity gives zero entries") {
    const auto r = coefficient_report(PlanarSystem{});
    for (const auto& [name, e] : r.entries) {
        if (name == "omega") continue;
        CHECK_MESSAGE(e.value == 0, name);
    }
    CHECK(r.norm == 0);
}

TEST_CASE("coefficient report: general linear part") {
    PlanarSystem s;
    s.normal_form = false;
    s.base = {{{0.5, -2}, {3, -0.5}}};
    s.quad = reference_subcritical().quad;
    const auto r = coefficient_report(s);
    CHECK(r.kind == "planar-general");
    CHECK(r.has("carrier"));
    CHECK(r.max_abs_diff() < 1e-9);
}
