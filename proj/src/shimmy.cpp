#include "hopfns/shimmy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hopfns/dynamics.hpp"
#include "hopfns/roots.hpp"

namespace hopfns {

Eigen::Matrix3d ShimmyParams::jacobian() const {
    Eigen::Matrix3d J;
    J << c1, c2, c3, 1, 0, 0, c5, c6, c7;
    return J;
}

double ShimmyParams::norm_inf() const {
    return std::max({std::abs(c1), std::abs(c2), std::abs(c3), std::abs(c4), std::abs(c5), std::abs(c6),
                     std::abs(c7), 1.0});
}

void ShimmyParams::validate() const {
    for (double x : {c1, c2, c3, c4, c5, c6, c7})
        if (!std::isfinite(x)) throw SchemaError("shimmy parameters must be finite");
}

std::string to_string(ShimmyVerdict v) {
    switch (v) {
        case ShimmyVerdict::vertical: return "vertical";
        case ShimmyVerdict::supercritical: return "supercritical";
        case ShimmyVerdict::subcritical: return "subcritical";
        default: return "degenerate";
    }
}

std::array<double, 3> shimmy_charpoly(const ShimmyParams& p) {
    return {-(p.c1 + p.c7), p.c1 * p.c7 - p.c2 - p.c3 * p.c5, p.c2 * p.c7 - p.c3 * p.c6};
}

namespace {

template <class T>
T charpoly_eval(const std::array<double, 3>& k, T x) {
    return ((x + k[0]) * x + k[1]) * x + k[2];
}

template <class T>
T charpoly_deriv(const std::array<double, 3>& k, T x) {
    return (3.0 * x + 2.0 * k[0]) * x + k[1];
}

// bilinear cross product (no conjugation for complex entries)
template <class V>
V cross3(const V& a, const V& b) {
    V c;
    c << a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0);
    return c;
}

// null vector of a singular 3x3 matrix from the best-conditioned pair of rows
template <class V, class M>
V null_vector(const M& A) {
    const V r0 = A.row(0).transpose(), r1 = A.row(1).transpose(), r2 = A.row(2).transpose();
    const V c[3] = {cross3(r0, r1), cross3(r0, r2), cross3(r1, r2)};
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (c[i].norm() > c[best].norm()) best = i;
    return c[best];
}

}  // namespace

ShimmyEigen eigensplit(const ShimmyParams& p) {
    p.validate();
    const auto k = shimmy_charpoly(p);
    const double b = k[0], c = k[1], d = k[2];
    const double P = c - b * b / 3, Q = 2 * b * b * b / 27 - b * c / 3 + d;
    const double D = Q * Q / 4 + P * P * P / 27;
    const double scale = p.norm_inf();
    if (D <= 1e-14 * std::pow(scale, 6)) throw NumericalError("no complex pair");
    const double sq = std::sqrt(D);
    double l3 = std::cbrt(-Q / 2 + sq) + std::cbrt(-Q / 2 - sq) - b / 3;
    for (int it = 0; it < 4; ++it) {
        const double dp = charpoly_deriv(k, l3);
        if (dp == 0.0) break;
        l3 -= charpoly_eval(k, l3) / dp;
    }
    const double beta = b + l3, gamma = c + l3 * beta;
    const double w2 = gamma - beta * beta / 4;
    if (w2 <= 0) throw NumericalError("no complex pair");
    std::complex<double> lam(-beta / 2, std::sqrt(w2));
    for (int it = 0; it < 4; ++it) {
        const std::complex<double> dp = charpoly_deriv(k, lam);
        if (std::abs(dp) == 0.0) break;
        lam -= charpoly_eval(k, lam) / dp;
    }
    if (std::abs(lam.imag()) < 1e-8 * scale) throw NumericalError("resonant");

    ShimmyEigen e;
    e.mu = lam.real();
    e.omega = std::abs(lam.imag());
    if (lam.imag() < 0) lam = std::conj(lam);
    e.lambda3 = l3;

    const Eigen::Matrix3d J = p.jacobian();
    Eigen::Matrix3cd Mc = J.cast<std::complex<double>>();
    Mc.diagonal().array() -= lam;
    Eigen::Vector3cd z = null_vector<Eigen::Vector3cd>(Mc);
    z /= z.norm();
    for (int i = 0; i < 3; ++i)
        if (std::abs(z(i)) > 1e-12) {
            z *= std::conj(z(i)) / std::abs(z(i));
            break;
        }
    e.s1 = z;

    Eigen::Matrix3d Mr = J;
    Mr.diagonal().array() -= l3;
    Eigen::Vector3d s = null_vector<Eigen::Vector3d>(Mr);
    s /= s.norm();
    for (int i = 0; i < 3; ++i)
        if (std::abs(s(i)) > 1e-12) {
            if (s(i) < 0) s = -s;
            break;
        }
    e.s3 = s;
    return e;
}

ShimmyAnalysis normalize(const ShimmyParams& p, const ShimmyEigen& e) {
    ShimmyAnalysis a;
    a.eigen = e;
    a.c4 = p.c4;
    a.scale = p.norm_inf();
    const Eigen::Vector3d u = e.u(), v = e.v(), s = e.s3;
    a.T.col(0) = u;
    a.T.col(1) = v;
    a.T.col(2) = s;
    a.detT = a.T.determinant();
    if (std::abs(a.detT) < 1e-12 * std::max(1e-300, u.norm() * v.norm() * s.norm()))
        throw NumericalError("singular T");
    const Eigen::Matrix3d Ti = a.T.inverse();
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    A << e.mu, e.omega, 0, -e.omega, e.mu, 0, 0, 0, e.lambda3;
    a.block_residual = (Ti * p.jacobian() * a.T - A).cwiseAbs().maxCoeff();

    for (int i = 0; i < 3; ++i) a.T_tilde[i] = p.c4 * Ti(i, 0);
    const double u3 = u(2), v3 = v(2);
    a.s3_third = s(2);
    if (u3 != 0.0)
        a.theta_tilde = std::atan(v3 / u3);
    else if (v3 != 0.0)
        a.theta_tilde = kPi / 2;
    else
        a.theta_tilde = 0.0;
    const double ct = std::cos(a.theta_tilde), st = std::sin(a.theta_tilde);
    a.d_tilde = u3 * ct + v3 * st;
    a.rotation_residual = std::abs(v3 * ct - u3 * st);
    a.h = {a.T_tilde[0] * ct + a.T_tilde[1] * st, -a.T_tilde[0] * st + a.T_tilde[1] * ct, a.T_tilde[2]};
    a.chi2_integral = 8.0 / 3.0 * a.d_tilde * std::abs(a.d_tilde) * a.h[0];
    a.vertical_product = a.d_tilde * a.s3_third * p.c4;
    a.literal_product = a.vertical_product * a.detT;
    classify_shimmy(a);
    return a;
}

ShimmyVerdict classify_shimmy(ShimmyAnalysis& a) {
    const double thr = 1e-10 * a.scale * a.scale * a.scale;
    a.slope.reset();
    a.certificate.clear();
    if (std::abs(a.vertical_product) < thr) {
        if (a.c4 == 0.0)
            a.certificate = "zero nonlinearity";
        else if (std::abs(a.d_tilde) < 1e-12)
            a.certificate = "u3 = v3 = 0: xi3 decouples and the planar part is linear";
        else
            a.certificate = "s3 = 0: conservative at mu = 0 with potential P(v) = w^2 v^2/2 + w b11 v^2|v|/3";
        a.verdict = ShimmyVerdict::vertical;
        return a.verdict;
    }
    if (std::abs(a.chi2_integral) < thr) {
        a.verdict = ShimmyVerdict::degenerate;
        return a.verdict;
    }
    a.slope = -kTwoPi / a.chi2_integral;
    a.verdict = a.chi2_integral > 0 ? ShimmyVerdict::subcritical : ShimmyVerdict::supercritical;
    return a.verdict;
}

ShimmyAnalysis analyze_shimmy(const ShimmyParams& p) {
    return normalize(p, eigensplit(p));
}

std::vector<double> hopf_tune(const ShimmyParams& p) {
    const double K = p.c2 + p.c3 * p.c5;
    std::vector<double> roots;
    const double A = p.c7, B = p.c7 * p.c7 - K, C = -p.c3 * (p.c5 * p.c7 + p.c6);
    if (A == 0.0) {
        if (B != 0.0) roots.push_back(-C / B);
    } else {
        const double disc = B * B - 4 * A * C;
        if (disc >= 0) {
            const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
            if (q != 0.0) {
                roots.push_back(q / A);
                roots.push_back(C / q);
            } else {
                roots.push_back(0.0);
            }
        }
    }
    std::vector<double> out;
    for (double c1 : roots)
        if (c1 * p.c7 - K > 0) out.push_back(c1);
    std::sort(out.begin(), out.end());
    return out;
}

double shift_to_mu(const ShimmyParams& p, double mu) {
    ShimmyParams q = p;
    auto f = [&](double c1) {
        q.c1 = c1;
        return eigensplit(q).mu - mu;
    };
    double x0 = p.c1, x1 = p.c1 + 1e-3;
    double f0 = f(x0), f1 = f(x1);
    for (int it = 0; it < 50 && std::abs(f1) > 1e-15; ++it) {
        if (f1 == f0) throw NumericalError("mu insensitive to c1");
        const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
    }
    return x1;
}

namespace {

struct ShimmyReturn {
    double xi1, xi3;
};

class ShimmyMap {
public:
    explicit ShimmyMap(const ShimmyParams& p) : p_(p), e_(eigensplit(p)) {
        T_.col(0) = e_.u();
        T_.col(1) = e_.v();
        T_.col(2) = e_.s3;
        Ti_ = T_.inverse();
        period_ = kTwoPi / e_.omega;
        opt_.rtol = 1e-11;
        opt_.atol = 1e-15;
        opt_.h_max = period_ / 20;
    }

    ShimmyReturn operator()(double a, double z) const {
        const Eigen::Vector3d x0 = T_ * Eigen::Vector3d(a, 0, z);
        const Eigen::Matrix3d J = p_.jacobian();
        const double c4 = p_.c4;
        OdeRhs f = [&](double, const std::vector<double>& x, std::vector<double>& dx) {
            dx[0] = J(0, 0) * x[0] + J(0, 1) * x[1] + J(0, 2) * x[2] + c4 * x[2] * std::abs(x[2]);
            dx[1] = x[0];
            dx[2] = J(2, 0) * x[0] + J(2, 1) * x[1] + J(2, 2) * x[2];
        };
        const Eigen::RowVector3d r0 = Ti_.row(0), r1 = Ti_.row(1);
        SectionEvent sec;
        sec.g = [r1](const std::vector<double>& x) { return r1(0) * x[0] + r1(1) * x[1] + r1(2) * x[2]; };
        sec.accept = [r0](const std::vector<double>& x) { return r0(0) * x[0] + r0(1) * x[1] + r0(2) * x[2]; };
        sec.direction = -1;
        sec.t_min = 0.5 * period_;
        const std::vector<EventFn> sw = {[](const std::vector<double>& x) { return x[2]; }};
        const auto res = integrate_time(f, {x0(0), x0(1), x0(2)}, 20 * period_, sw, sec, opt_);
        if (!res.hit) throw NumericalError("no return to section");
        const Eigen::Vector3d xi = Ti_ * Eigen::Vector3d(res.x[0], res.x[1], res.x[2]);
        return {xi(0), xi(2)};
    }

    // relative radial defect with the transverse coordinate at its fixed point
    double defect(double a) const {
        auto g = [&](double z) { return (*this)(a, z).xi3 - z; };
        double z0 = 0, g0 = g(z0);
        double z1 = g0, g1 = g(z1);
        for (int it = 0; it < 6 && std::abs(g1) > 1e-14 * a; ++it) {
            if (g1 == g0) break;
            const double z2 = z1 - g1 * (z1 - z0) / (g1 - g0);
            z0 = z1;
            g0 = g1;
            z1 = z2;
            g1 = g(z1);
        }
        return ((*this)(a, z1).xi1 - a) / a;
    }

private:
    ShimmyParams p_;
    ShimmyEigen e_;
    Eigen::Matrix3d T_, Ti_;
    double period_ = 0;
    TimeOptions opt_;
};

ShimmySideResult search_side(const ShimmyParams& tuned, double mu) {
    ShimmySideResult res;
    ShimmyParams p = tuned;
    p.c1 = shift_to_mu(tuned, mu);
    res.mu = eigensplit(p).mu;
    const ShimmyMap P(p);
    const int n = 28;
    const double lo = 1e-4, hi = 0.5;
    double prev_a = 0, prev = 0;
    bool have = false;
    for (int i = 0; i < n; ++i) {
        const double a = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        double d;
        try {
            d = P.defect(a);
        } catch (const NumericalError&) {
            break;
        }
        if (have && (prev > 0) != (d > 0)) {
            res.orbit = true;
            try {
                res.amplitude = brent_root([&](double x) { return P.defect(x); }, prev_a, a, prev, d, 1e-8 * a);
            } catch (const NumericalError&) {
                res.amplitude = 0.5 * (prev_a + a);
            }
            break;
        }
        prev_a = a;
        prev = d;
        have = true;
    }
    return res;
}

}  // namespace

ShimmySimulation simulate_shimmy(const ShimmyParams& tuned, double dmu) {
    ShimmySimulation s;
    s.neg = search_side(tuned, -dmu);
    s.pos = search_side(tuned, dmu);
    if (s.neg.orbit && !s.pos.orbit)
        s.verdict = ShimmyVerdict::subcritical;
    else if (s.pos.orbit && !s.neg.orbit)
        s.verdict = ShimmyVerdict::supercritical;
    else
        s.verdict = ShimmyVerdict::degenerate;
    return s;
}

ShimmyParams hopf_tuned_draw(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        ShimmyParams p;
        p.c2 = U(rng);
        p.c3 = U(rng);
        p.c4 = U(rng);
        p.c5 = U(rng);
        p.c6 = U(rng);
        p.c7 = U(rng);
        if (std::abs(p.c4) < 0.2) continue;
        for (double c1 : hopf_tune(p)) {
            p.c1 = c1;
            try {
                const ShimmyAnalysis a = analyze_shimmy(p);
                if (a.eigen.omega > 0.3 && a.eigen.lambda3 < -0.2 && std::abs(a.chi2_integral) > 0.05 &&
                    (a.verdict == ShimmyVerdict::subcritical || a.verdict == ShimmyVerdict::supercritical))
                    return p;
            } catch (const NumericalError&) {
            }
        }
    }
    throw NumericalError("no admissible draw");
}

}  // namespace hopfns
