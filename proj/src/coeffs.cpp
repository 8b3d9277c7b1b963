#include "hopfns/coeffs.hpp"

#include <algorithm>
#include <cmath>

#include "hopfns/quadrature.hpp"

namespace hopfns {

namespace {

double sgn(double x) {
    return (x > 0) - (x < 0);
}

void require_abs_slopes(const NonsmoothQuadCoeffs& q) {
    if (!q.default_slopes()) throw DomainError("slopes differ from (-1,+1); use sigma_tilde");
}

PlanarSystem nf_system(const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s, double omega = 1.0) {
    PlanarSystem p;
    p.quad = q;
    p.smooth = s;
    p.omega = omega;
    return p;
}

}  // namespace

void CoefficientReport::set(const std::string& name, double value, const std::string& method,
                            std::optional<double> cross) {
    entries[name] = CoefficientEntry{value, method, cross};
}

double CoefficientReport::at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw DomainError("report has no entry " + name);
    return it->second.value;
}

bool CoefficientReport::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

double CoefficientReport::max_abs_diff() const {
    double m = 0;
    for (const auto& [k, e] : entries) m = std::max(m, e.abs_diff());
    return m;
}

double sigma_hash(const NonsmoothQuadCoeffs& q) {
    require_abs_slopes(q);
    return 2 * q.a[0][0] + q.a[0][1] + q.b[1][0] + 2 * q.b[1][1];
}

double sigma_tilde(const NonsmoothQuadCoeffs& q) {
    return q.a[0][0] * q.alpha[0].jump() + 0.5 * q.a[0][1] * q.alpha[1].jump() +
           0.5 * q.b[1][0] * q.beta[2].jump() + q.b[1][1] * q.beta[3].jump();
}

double sigma_2(const NonsmoothQuadCoeffs& q) {
    require_abs_slopes(q);
    const double a11 = q.a[0][0], a12 = q.a[0][1], a21 = q.a[1][0], a22 = q.a[1][1];
    const double b11 = q.b[0][0], b12 = q.b[0][1], b21 = q.b[1][0], b22 = q.b[1][1];
    const double third = b12 * a11 - b21 * a22 - a21 * b22 + a12 * b11 - 2 * a11 * a22 -
                         2 * a12 * a21 + 2 * b12 * b21 + 2 * b11 * b22;
    const double quarter = b12 * b22 - a12 * a22 - a11 * a21 + b21 * b11 + 2 * a11 * b11 -
                           2 * b22 * a22;
    return third / 3.0 + kPi / 4.0 * quarter;
}

double s_q(const SmoothCoeffs& s) {
    return s.a1 * s.a2 + s.a2 * s.a3 - s.b1 * s.b2 - s.b2 * s.b3 - 2 * s.a1 * s.b1 + 2 * s.a3 * s.b3;
}

double s_c(const SmoothCoeffs& s) {
    return 3 * s.ca[0] + s.ca[1] + s.cb[2] + 3 * s.cb[3];
}

double sigma_s(const SmoothCoeffs& s, double omega) {
    if (omega == 0.0) throw DomainError("omega must be nonzero");
    return s_q(s) / (8 * omega) + s_c(s) / 8;
}

double smoothed_sigma(const NonsmoothQuadCoeffs& q, const std::array<double, 4>& w) {
    require_abs_slopes(q);
    return 3 * w[0] * q.a[0][0] + w[1] * q.a[0][1] + w[2] * q.b[1][0] + 3 * w[3] * q.b[1][1];
}

double chi2_integral(const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s) {
    const PolarSamples p = polar_decompose(nf_system(q, s));
    return periodic_integral([&](double t) { return p.chi2(t); }, p.switching_angles);
}

double chi2_omega1_integral(const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s) {
    const PolarSamples p = polar_decompose(nf_system(q, s));
    return periodic_integral([&](double t) { return p.chi2(t) * p.Omega1(t); }, p.switching_angles);
}

double chi3_integral(const SmoothCoeffs& s) {
    const PolarSamples p = polar_decompose(nf_system({}, s));
    return periodic_integral([&](double t) { return p.chi3(t); }, p.switching_angles);
}

double lambda_general(const Mat2& m) {
    const double rad = -4 * m[0][1] * m[1][0] - (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]);
    if (rad <= 0.0) throw DomainError("not Hopf-compatible");
    return (m[0][0] + m[1][1]) / std::sqrt(rad);
}

double lambda_general_quadrature(const Mat2& m) {
    lambda_general(m);
    PlanarSystem p;
    p.normal_form = false;
    p.base = m;
    const PolarSamples ps = polar_decompose(p);
    // growth per turn; W < 0 turns clockwise
    return piecewise_average([&](double t) { return ps.M(t) / std::abs(ps.W(t)); }, ps.switching_angles);
}

NormalFormTransform normal_form_transform(const Mat2& m) {
    lambda_general(m);
    const double mu = 0.5 * (m[0][0] + m[1][1]);
    const double omega = 0.5 * std::sqrt(-4 * m[0][1] * m[1][0] - (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]));
    // eigenvector of mu + i omega is p + i q with p = (m2, mu - m1), q = (0, omega); T = (p | -q)
    const Mat2 T = {{{m[0][1], 0.0}, {mu - m[0][0], -omega}}};
    NormalFormTransform tf;
    tf.T = T;
    tf.mu = mu;
    tf.omega = omega;
    tf.C = std::hypot(T[0][0], T[0][1]);
    tf.phi_hat = std::atan2(T[0][1], T[0][0]);
    tf.D = std::hypot(T[1][0], T[1][1]);
    tf.theta_hat = std::atan2(T[1][1], T[1][0]);
    if (mat_det(T) == 0.0) throw DomainError("degenerate transformation");
    return tf;
}

NormalFormTransform transform_from_rows(double C, double D, double phi_hat, double theta_hat,
                                        double omega, double mu) {
    NormalFormTransform tf;
    tf.C = C;
    tf.D = D;
    tf.phi_hat = phi_hat;
    tf.theta_hat = theta_hat;
    tf.omega = omega;
    tf.mu = mu;
    tf.T = {{{C * std::cos(phi_hat), C * std::sin(phi_hat)},
             {D * std::cos(theta_hat), D * std::sin(theta_hat)}}};
    if (std::abs(mat_det(tf.T)) < 1e-14 * (1 + C * C + D * D))
        throw DomainError("degenerate transformation");
    return tf;
}

GeneralSigma sigma_general(const NormalFormTransform& tf, const NonsmoothQuadCoeffs& q) {
    GeneralSigma g;
    g.tf = tf;
    g.Lambda = tf.mu / tf.omega;
    g.Lambda_quad = g.Lambda;

    const double C = tf.C, D = tf.D, aC = std::abs(C), aD = std::abs(D);
    const double cd = std::cos(tf.theta_hat - tf.phi_hat);
    const double a11 = q.a[0][0], a12 = q.a[0][1], a21 = q.a[1][0];
    const double b12 = q.b[0][1], b21 = q.b[1][0], b22 = q.b[1][1];
    const double pre = 2.0 / (3.0 * kPi * tf.omega);
    if (q.default_slopes())
        g.Sigma = pre * (2 * aC * a11 + aD * a12 + aC * b21 + 2 * aD * b22 +
                         cd * (sgn(C) * D * a21 + sgn(D) * C * b12));
    g.Sigma_tilde = pre * (aC * a11 * q.alpha[0].jump() + 0.5 * aD * a12 * q.alpha[1].jump() +
                           0.5 * aC * b21 * q.beta[2].jump() + aD * b22 * q.beta[3].jump() +
                           0.5 * cd * (sgn(C) * D * a21 * q.alpha[2].jump() +
                                       sgn(D) * C * b12 * q.beta[1].jump()));

    // original-coordinate system whose pull-back by T has the normal-form linear part
    PlanarSystem orig;
    orig.normal_form = false;
    orig.base = mat_mul(tf.T, mat_mul(Mat2{{{0.0, -tf.omega}, {tf.omega, 0.0}}}, mat_inverse(tf.T)));
    orig.mu = tf.mu;
    orig.quad = q;
    const PolarSamples ps = polar_decompose_transformed(orig, tf.T);
    g.Sigma_quad = piecewise_average([&](double t) { return ps.chi2(t); }, ps.switching_angles) / tf.omega;
    return g;
}

GeneralSigma sigma_general(const Mat2& m, const NonsmoothQuadCoeffs& q) {
    GeneralSigma g = sigma_general(normal_form_transform(m), q);
    g.Lambda = lambda_general(m);
    g.Lambda_quad = lambda_general_quadrature(m);
    return g;
}

Gamma23 gamma23_planar(const PlanarSystem& sys) {
    if (!sys.normal_form) throw DomainError("normal-form linear part required");
    const double w = sys.omega;
    Gamma23 g;
    const double st = sigma_tilde(sys.quad);
    g.Gamma2 = 4 * st / (3 * w);
    const PolarSamples p = polar_decompose(sys);
    const auto& K = p.switching_angles;
    const double I2 = periodic_integral([&](double t) { return p.chi2(t); }, K);
    g.Gamma2_quad = I2 / w;

    const double i3 = periodic_integral([&](double t) { return p.chi3(t); }, K);
    const double i21 = periodic_integral([&](double t) { return p.chi2(t) * p.Omega1(t); }, K);
    const double nested = periodic_integral(
        [&](double s) {
            const double inner = integrate_piecewise([&](double t) { return p.chi2(t); }, K, 0.0, s).value;
            return p.chi2(s) * inner;
        },
        K);
    g.Gamma3_quad = 2 * nested / (w * w) + i3 / w - i21 / (w * w);

    if (sys.quad.default_slopes()) {
        const double s2eff = sigma_2(sys.quad) - kPi / 4 * (s_q(sys.smooth) + w * s_c(sys.smooth));
        g.Gamma3 = g.Gamma2 * g.Gamma2 - s2eff / (w * w);
    } else {
        g.Gamma3 = g.Gamma3_quad;
    }
    return g;
}

Aux3D aux_3d(const System3D& s) {
    const auto& q = s.quad;
    const double a11 = q.a[0][0], a12 = q.a[0][1], a21 = q.a[1][0], a22 = q.a[1][1];
    const double b11 = q.b[0][0], b12 = q.b[0][1], b21 = q.b[1][0], b22 = q.b[1][1];
    const double c1 = s.c_(1), w = s.omega;
    const double c6 = s.c_(6), c7 = s.c_(7), c8 = s.c_(8), c9 = s.c_(9);
    Aux3D x;
    x.tau1 = 4 * a22 + 5 * a21 - 5 * b12 - 4 * b11;
    x.tau2 = 2 * a22 + a21 - b12 - 2 * b11;
    x.tau3 = a11 - a12 - b21 + b22;
    x.P = 3 * kPi * (2 * x.tau2 - a11 + b21) + 4 * x.tau3;
    x.Q = -3 * kPi * (b11 + a21) + 2 * x.tau1;
    x.rho1 = c6 * c1 * c1 - c7 * c1 * w + 2 * c6 * w * w - c8 * c1 * w + 2 * c9 * w * w;
    x.rho2 = c8 * c1 * c1 - c9 * c1 * w + 2 * c8 * w * w + c6 * c1 * w - 2 * c7 * w * w;
    x.R = 2 * kPi * x.rho1 - x.rho2;
    return x;
}

namespace {

// (e^{2 pi c1/w} - 1)/c1 with its c1 -> 0 limit
double growth(double c1, double w) {
    if (std::abs(c1) < 1e-12) return kTwoPi / w;
    return std::expm1(kTwoPi * c1 / w) / c1;
}

}  // namespace

Gamma3Tilde gamma3_tilde(const System3D& sys) {
    sys.validate();
    const double c1 = sys.c_(1), w = sys.omega;
    if (c1 == 0.0) throw DomainError("degenerate transverse direction");
    System3D s0 = sys;
    s0.mu = 0.0;
    const PolarSamples p = polar_decompose(s0);
    const auto& K = p.switching_angles;

    PlanarSystem planar = nf_system(sys.quad, sys.smooth, w);
    Gamma3Tilde g;
    g.Gamma3 = gamma23_planar(planar).Gamma3;

    const double a = c1 / w;
    const double nested = periodic_integral(
        [&](double s) {
            const double inner = integrate_piecewise(
                [&](double t) { return std::exp(a * (s - t)) * p.Upsilon(t); }, K, 0.0, s).value;
            return p.chi1(s) * inner;
        },
        K);
    g.correction = nested / (w * w);
    const double E = std::exp(kTwoPi * a);
    const double d11 = periodic_integral([&](double s) { return std::exp(a * s) * p.chi1(s); }, K) / w;
    const double g02 = E / w * periodic_integral([&](double s) { return std::exp(-a * s) * p.Upsilon(s); }, K);
    const double g10 = std::expm1(kTwoPi * a);
    g.elimination = -d11 * g02 / g10;
    g.value = g.Gamma3 + g.correction + g.elimination;

    if (sys.h.is_zero()) {
        const double c5 = sys.c_(5), c6 = sys.c_(6), c7 = sys.c_(7), c8 = sys.c_(8), c9 = sys.c_(9);
        const double rho1 = aux_3d(sys).rho1;
        const double a2 = a * a + 4;
        const double corr = c5 / (2 * w * w * a2) *
                            (-a * kPi * (c7 + c8) / 2 - kPi * (c6 - c9) + (c6 + c9) * (E - 1) / a +
                             (c6 - c9) * a * (E - 1) / a2 - 2 * (c7 + c8) * (E - 1) / a2);
        const double k2 = c1 * c1 + 4 * w * w;
        const double elim = -c5 * (E - 1) * rho1 * w / (c1 * k2 * k2);
        g.closed = g.Gamma3 + corr + elim;
    }
    return g;
}

Ledger3D ledger_3d(const System3D& sys) {
    sys.validate();
    Ledger3D L;
    CoefficientReport& r = L.report;
    r.kind = "3d";
    r.mu = sys.mu;
    r.omega = sys.omega;
    r.default_slopes = sys.quad.default_slopes();
    const double c1 = sys.c_(1), c2 = sys.c_(2), c3 = sys.c_(3), c4 = sys.c_(4);
    const double w = sys.omega, mu = sys.mu;
    r.norm = std::max(sys.quad.max_abs(), sys.smooth.max_abs());
    for (double x : sys.c) r.norm = std::max(r.norm, std::abs(x));
    L.aux = aux_3d(sys);
    const Aux3D& x = L.aux;
    L.degenerate = (c1 == 0.0);
    if (L.degenerate) r.flags.push_back("degenerate transverse direction");
    r.flags.push_back("closed forms truncated at O(mu^2)");

    const PolarSamples p = polar_decompose(sys);
    const auto& K = p.switching_angles;
    const double p1 = c1 / w, k1 = mu / w;
    const double E = std::exp(kTwoPi * p1);
    const double st = sigma_tilde(sys.quad);

    auto P2 = [&](double s) { return (c2 * w - c1 * p.Omega0(s)) / (w * w); };
    auto P3 = [&](double s) { return p.Upsilon(s) / w; };
    auto P4 = [&](double s) {
        return (c3 * std::cos(s) + c4 * std::sin(s)) / w - c1 * p.Omega1(s) / (w * w);
    };
    auto K2 = [&](double s) { return (p.chi2(s) * w - mu * p.Omega1(s)) / (w * w); };
    auto K3 = [&](double s) { return (p.chi1(s) * w - mu * p.Omega0(s)) / (w * w); };

    const double g10q = periodic_integral([&](double s) { return p1 * std::exp(p1 * s); }, K);
    r.set("gamma_bar_10", std::expm1(kTwoPi * p1), "closed-form", g10q);

    const double g20q = periodic_integral([&](double s) { return std::exp(p1 * (kTwoPi + s)) * P2(s); }, K);
    double g20c;
    if (L.degenerate)
        g20c = kTwoPi * c2 / w;
    else
        g20c = E * growth(c1, w) * (c2 - c1 * x.rho2 / (w * (c1 * c1 + 4 * w * w)));
    r.set("gamma_bar_20", g20c, "closed-form", g20q);

    const double g02q = periodic_integral(
        [&](double s) { return std::exp(p1 * (kTwoPi - s) + 2 * k1 * s) * P3(s); }, K);
    if (L.degenerate) {
        const double gh = 2 * sys.h.h[1][0] + sys.c_(5) + kPi * sys.h.h[1][1];
        r.set("gamma_hash", gh, "closed-form");
        r.set("gamma_bar_02", g02q, "quadrature", -kPi * gh * mu / (w * w));
    } else {
        r.set("gamma_bar_02", g02q, "quadrature");
    }

    const double g11q = periodic_integral([&](double s) { return std::exp(kTwoPi * p1 + k1 * s) * P4(s); }, K);
    const double g11c = 2.0 / (3 * w * w) * E * (c1 * (2 * x.tau2 + x.P * mu / (3 * w)) - 3 * kPi * c4 * mu);
    r.set("gamma_bar_11", g11c, "closed-form", g11q);

    r.set("delta_bar_01", kTwoPi * mu / w, "closed-form", std::expm1(kTwoPi * k1));

    const double d02q = periodic_integral([&](double s) { return std::exp(k1 * (kTwoPi + s)) * K2(s); }, K);
    double d02c = 2.0 / (3 * w) * (st * (2 + 6 * kPi * mu / w) + x.Q * mu / (3 * w));
    if (!r.default_slopes) d02c = 4 * st / (3 * w);
    r.set("delta_bar_02", d02c, "closed-form", d02q);

    const double d11q = periodic_integral([&](double s) { return std::exp(kTwoPi * k1 + p1 * s) * K3(s); }, K);
    const double d11c = growth(c1, w) * (w * x.rho1 + x.R * mu) / (w * (c1 * c1 + 4 * w * w));
    r.set("delta_bar_11", d11c, "closed-form", d11q);

    r.set("sigma_tilde", st, "closed-form", 0.75 * periodic_integral([&](double s) { return p.chi2(s); }, K));
    if (r.default_slopes) {
        r.set("sigma_hash", sigma_hash(sys.quad), "closed-form", r.entries["sigma_tilde"].cross_check);
        const double s2q = periodic_integral([&](double s) { return p.chi2(s) * p.Omega1(s); }, K) +
                           kPi / 4 * s_q(sys.smooth);
        r.set("sigma_2", sigma_2(sys.quad), "closed-form", s2q);
    }

    r.set("tau1", x.tau1, "closed-form");
    r.set("tau2", x.tau2, "closed-form");
    r.set("tau3", x.tau3, "closed-form");
    r.set("P", x.P, "closed-form");
    r.set("Q", x.Q, "closed-form");
    r.set("R", x.R, "closed-form");
    r.set("rho1", x.rho1, "closed-form");
    r.set("rho2", x.rho2, "closed-form");

    const Gamma23 g23 = gamma23_planar(nf_system(sys.quad, sys.smooth, w));
    r.set("Gamma2", g23.Gamma2, "closed-form", g23.Gamma2_quad);
    r.set("Gamma3", g23.Gamma3, "closed-form", g23.Gamma3_quad);
    if (!L.degenerate) {
        const Gamma3Tilde gt = gamma3_tilde(sys);
        r.set("delta_tilde_03", g23.Gamma3 + gt.correction, "quadrature");
        if (gt.closed)
            r.set("Gamma3_tilde", *gt.closed, "closed-form", gt.value);
        else
            r.set("Gamma3_tilde", gt.value, "quadrature");
    } else {
        try {
            r.set("gamma_hash_effective", gamma_hash_effective(sys), "quadrature");
        } catch (const DomainError& e) {
            r.flags.push_back(e.what());
        }
    }
    return L;
}

double gamma_hash_effective(const System3D& sys) {
    const PolarSamples p = polar_decompose(sys);
    const auto& K = p.switching_angles;
    const double X = periodic_integral([&](double s) { return p.chi2(s); }, K);
    const double mean_u = periodic_integral([&](double s) { return p.Upsilon(s); }, K);
    const double scale = 1 + std::abs(sys.h.h[0][0]) + std::abs(sys.h.h[0][1]) +
                         std::abs(sys.h.h[1][0]) + std::abs(sys.h.h[1][1]) + std::abs(sys.c_(5));
    if (std::abs(mean_u) > 1e-10 * scale) throw DomainError("transverse forcing has nonzero mean");
    if (std::abs(X) < 1e-12 * (1 + sys.quad.max_abs())) throw DomainError("first-order carrier vanishes");
    auto Xc = [&](double s) { return integrate_piecewise([&](double t) { return p.chi2(t); }, K, 0.0, s).value; };
    const double Fbar = periodic_integral([&](double s) { return (kTwoPi - s) * p.Upsilon(s); }, K) / kTwoPi;
    const double Fchi = -periodic_integral([&](double s) { return p.Upsilon(s) * Xc(s); }, K);
    const double UO = periodic_integral([&](double s) { return p.Upsilon(s) * p.Omega1(s); }, K);
    return -(4 * (Fchi - Fbar * X) + 2 * UO) / X;
}

CoefficientReport coefficient_report(const System3D& sys) {
    return ledger_3d(sys).report;
}

CoefficientReport coefficient_report(const PlanarSystem& sys) {
    sys.validate();
    CoefficientReport r;
    r.mu = sys.mu;
    r.norm = std::max(sys.quad.max_abs(), sys.smooth.max_abs());
    r.default_slopes = sys.quad.default_slopes();
    if (!sys.normal_form) {
        r.kind = "planar-general";
        const GeneralSigma g = sigma_general(sys.linear(), sys.quad);
        r.omega = g.tf.omega;
        r.set("Lambda", g.Lambda, "closed-form", g.Lambda_quad);
        if (g.Sigma) r.set("Sigma", *g.Sigma, "closed-form", g.Sigma_quad);
        r.set("Sigma_tilde", g.Sigma_tilde, "closed-form", g.Sigma_quad);
        r.set("carrier", g.carrier(), "closed-form", 1.5 * kPi * g.tf.omega * g.Sigma_quad);
        r.set("omega", g.tf.omega, "closed-form");
        return r;
    }
    r.kind = "planar-nf";
    const double w = sys.omega;
    r.omega = w;
    const PolarSamples p = polar_decompose(sys);
    const auto& K = p.switching_angles;
    const double I2 = periodic_integral([&](double t) { return p.chi2(t); }, K);
    const double st = sigma_tilde(sys.quad);
    r.set("sigma_tilde", st, "closed-form", 0.75 * I2);

    const NonsmoothQuadCoeffs none{};
    const double i21_ns = chi2_omega1_integral(sys.quad, {});
    const double i21_sm = chi2_omega1_integral(none, sys.smooth);
    const double i3 = chi3_integral(sys.smooth);
    const double sq = s_q(sys.smooth), sc = s_c(sys.smooth);
    r.set("S_q", sq, "closed-form", -4.0 / kPi * i21_sm);
    r.set("S_c", sc, "closed-form", 4.0 / kPi * i3);
    r.set("sigma_s", sigma_s(sys.smooth, w), "closed-form", -i21_sm / (2 * kPi * w) + i3 / (2 * kPi));

    const double i21 = periodic_integral([&](double t) { return p.chi2(t) * p.Omega1(t); }, K);
    const double cubic_q = i3 / (kTwoPi * w) - i21 / (kTwoPi * w * w);
    if (r.default_slopes) {
        r.set("sigma_hash", sigma_hash(sys.quad), "closed-form", 0.75 * I2);
        const double s2 = sigma_2(sys.quad);
        r.set("sigma_2", s2, "closed-form", i21_ns);
        r.set("cubic", sq / (8 * w * w) + sc / (8 * w) - s2 / (kTwoPi * w * w), "closed-form", cubic_q);
    } else {
        r.set("cubic", cubic_q, "quadrature");
    }
    // sigma2 of the combined smooth and non-smooth cubic-order balance
    r.set("sigma_2_eff", -kTwoPi * w * w * cubic_q, "quadrature");
    const Gamma23 g = gamma23_planar(sys);
    r.set("Gamma2", g.Gamma2, "closed-form", g.Gamma2_quad);
    r.set("Gamma3", g.Gamma3, "closed-form", g.Gamma3_quad);
    return r;
}

}  // namespace hopfns
