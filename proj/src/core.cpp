#include "hopfns/core.hpp"

#include <algorithm>
#include <cmath>

namespace hopfns {

double gen_abs(double u, const SlopePair& s) {
    return u >= 0.0 ? s.p_plus * u : s.p_minus * u;
}

bool NonsmoothQuadCoeffs::default_slopes() const {
    for (int k = 0; k < 4; ++k)
        if (!alpha[k].is_abs() || !beta[k].is_abs()) return false;
    return true;
}

bool NonsmoothQuadCoeffs::is_zero() const {
    return max_abs() == 0.0;
}

double NonsmoothQuadCoeffs::max_abs() const {
    double m = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m = std::max({m, std::abs(a[i][j]), std::abs(b[i][j])});
    return m;
}

bool SmoothCoeffs::is_zero() const {
    return max_abs() == 0.0;
}

double SmoothCoeffs::max_abs() const {
    double m = std::max({std::abs(a1), std::abs(a2), std::abs(a3), std::abs(b1), std::abs(b2),
                         std::abs(b3)});
    for (int k = 0; k < 4; ++k) m = std::max({m, std::abs(ca[k]), std::abs(cb[k])});
    return m;
}

double ModulusTerm::eval(double v, double w) const {
    return h[0][0] * v * gen_abs(v, slopes[0]) + h[0][1] * v * gen_abs(w, slopes[1]) +
           h[1][0] * w * gen_abs(v, slopes[2]) + h[1][1] * w * gen_abs(w, slopes[3]);
}

bool ModulusTerm::is_zero() const {
    return h[0][0] == 0.0 && h[0][1] == 0.0 && h[1][0] == 0.0 && h[1][1] == 0.0;
}

Vec2 eval_nonsmooth(const NonsmoothQuadCoeffs& q, double v, double w) {
    const double f = q.a[0][0] * v * gen_abs(v, q.alpha[0]) + q.a[0][1] * v * gen_abs(w, q.alpha[1]) +
                     q.a[1][0] * w * gen_abs(v, q.alpha[2]) + q.a[1][1] * w * gen_abs(w, q.alpha[3]);
    const double g = q.b[0][0] * v * gen_abs(v, q.beta[0]) + q.b[0][1] * v * gen_abs(w, q.beta[1]) +
                     q.b[1][0] * w * gen_abs(v, q.beta[2]) + q.b[1][1] * w * gen_abs(w, q.beta[3]);
    return {f, g};
}

Vec2 eval_smooth_quadratic(const SmoothCoeffs& s, double v, double w) {
    return {s.a1 * v * v + s.a2 * v * w + s.a3 * w * w, s.b1 * v * v + s.b2 * v * w + s.b3 * w * w};
}

Vec2 eval_cubic(const SmoothCoeffs& s, double v, double w) {
    const double m0 = v * v * v, m1 = v * w * w, m2 = v * v * w, m3 = w * w * w;
    return {s.ca[0] * m0 + s.ca[1] * m1 + s.ca[2] * m2 + s.ca[3] * m3,
            s.cb[0] * m0 + s.cb[1] * m1 + s.cb[2] * m2 + s.cb[3] * m3};
}

Mat2 PlanarSystem::linear() const {
    if (normal_form) return {{{mu, -omega}, {omega, mu}}};
    return {{{base[0][0] + mu, base[0][1]}, {base[1][0], base[1][1] + mu}}};
}

double PlanarSystem::frequency() const {
    if (normal_form) return omega;
    const Mat2 m = linear();
    const double disc = -4.0 * m[0][1] * m[1][0] - (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]);
    if (disc <= 0.0) throw DomainError("not Hopf-compatible");
    return 0.5 * std::sqrt(disc);
}

void PlanarSystem::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(omega)) throw DomainError("non-finite parameter");
    if (normal_form) {
        if (omega == 0.0) throw DomainError("omega must be nonzero");
        return;
    }
    const Mat2& m = base;
    const double tr = m[0][0] + m[1][1];
    const Mat2 c = {{{m[0][0] - tr / 2, m[0][1]}, {m[1][0], m[1][1] - tr / 2}}};
    if (!(c[0][0] * c[0][0] + c[0][1] * c[1][0] < 0.0 && c[0][1] * c[1][0] < 0.0))
        throw DomainError("not Hopf-compatible");
}

Vec2 eval_planar_rhs(const PlanarSystem& sys, double v, double w) {
    const Mat2 L = sys.linear();
    const Vec2 n = eval_nonsmooth(sys.quad, v, w);
    const Vec2 q = eval_smooth_quadratic(sys.smooth, v, w);
    const Vec2 k = eval_cubic(sys.smooth, v, w);
    return {L[0][0] * v + L[0][1] * w + n[0] + q[0] + k[0],
            L[1][0] * v + L[1][1] * w + n[1] + q[1] + k[1]};
}

void System3D::validate() const {
    if (omega == 0.0 || !std::isfinite(omega)) throw DomainError("omega must be nonzero");
    for (double x : c)
        if (!std::isfinite(x)) throw DomainError("non-finite parameter");
}

std::array<double, 3> eval_3d_rhs(const System3D& s, double u, double v, double w) {
    const Vec2 n = eval_nonsmooth(s.quad, v, w);
    const Vec2 q = eval_smooth_quadratic(s.smooth, v, w);
    const Vec2 k = eval_cubic(s.smooth, v, w);
    const double du = s.c_(1) * u + s.c_(2) * u * u + s.c_(3) * u * v + s.c_(4) * u * w +
                      s.c_(5) * v * w + s.h.eval(v, w);
    const double dv = s.mu * v - s.omega * w + s.c_(6) * u * v + s.c_(7) * u * w + n[0] + q[0] + k[0];
    const double dw = s.omega * v + s.mu * w + s.c_(8) * u * v + s.c_(9) * u * w + n[1] + q[1] + k[1];
    return {du, dv, dw};
}

SystemND SystemND::zeros(int m) {
    SystemND s;
    s.A = Eigen::MatrixXd::Zero(m, m);
    s.Q.assign(m, Eigen::MatrixXd::Zero(m, m));
    s.C3 = Eigen::MatrixXd::Zero(m, m);
    s.C4 = Eigen::MatrixXd::Zero(m, m);
    s.c5 = Eigen::VectorXd::Zero(m);
    s.h.assign(m, ModulusTerm{});
    s.c6 = s.c7 = s.c8 = s.c9 = Eigen::VectorXd::Zero(m);
    return s;
}

SystemND SystemND::from_3d(const System3D& s) {
    SystemND n = zeros(1);
    n.A(0, 0) = s.c_(1);
    n.Q[0](0, 0) = s.c_(2);
    n.C3(0, 0) = s.c_(3);
    n.C4(0, 0) = s.c_(4);
    n.c5(0) = s.c_(5);
    n.h[0] = s.h;
    n.c6(0) = s.c_(6);
    n.c7(0) = s.c_(7);
    n.c8(0) = s.c_(8);
    n.c9(0) = s.c_(9);
    n.quad = s.quad;
    n.smooth = s.smooth;
    n.mu = s.mu;
    n.omega = s.omega;
    return n;
}

void SystemND::validate() const {
    const int m = transverse_dim();
    if (omega == 0.0) throw DomainError("omega must be nonzero");
    if (A.cols() != m || static_cast<int>(Q.size()) != m || C3.rows() != m || C3.cols() != m ||
        C4.rows() != m || C4.cols() != m || c5.size() != m || static_cast<int>(h.size()) != m ||
        c6.size() != m || c7.size() != m || c8.size() != m || c9.size() != m)
        throw DomainError("inconsistent transverse dimensions");
    for (const auto& q : Q)
        if (q.rows() != m || q.cols() != m) throw DomainError("inconsistent transverse dimensions");
}

Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

double mat_det(const Mat2& m) {
    return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

Mat2 mat_inverse(const Mat2& m) {
    const double d = mat_det(m);
    if (d == 0.0) throw DomainError("degenerate transformation");
    return {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
}

std::vector<double> switching_angles_for(const Mat2& T) {
    std::vector<double> out = {0.0, kPi / 2, kPi, 3 * kPi / 2};
    // rows of T define the switching functionals z_i1 cos + z_i2 sin
    for (int i = 0; i < 2; ++i) {
        const double a = T[i][0], b = T[i][1];
        if (a == 0.0 && b == 0.0) continue;
        double z = std::atan2(-a, b);
        for (int k = 0; k < 2; ++k) {
            double phi = std::fmod(z + k * kPi, kTwoPi);
            if (phi < 0) phi += kTwoPi;
            if (phi >= kTwoPi) phi -= kTwoPi;
            out.push_back(phi);
        }
    }
    std::sort(out.begin(), out.end());
    std::vector<double> uniq;
    for (double x : out)
        if (uniq.empty() || x - uniq.back() > 1e-14) uniq.push_back(x);
    if (uniq.size() > 1 && kTwoPi - uniq.back() < 1e-14) uniq.pop_back();
    return uniq;
}

Vec2 PolarSamples::quadratic_part(double phi) const {
    const double c = std::cos(phi), s = std::sin(phi);
    const double x = T_[0][0] * c + T_[0][1] * s;
    const double y = T_[1][0] * c + T_[1][1] * s;
    const Vec2 n = eval_nonsmooth(quad_, x, y);
    const Vec2 q = eval_smooth_quadratic(smooth_, x, y);
    const double f = n[0] + q[0], g = n[1] + q[1];
    return {Tinv_[0][0] * f + Tinv_[0][1] * g, Tinv_[1][0] * f + Tinv_[1][1] * g};
}

Vec2 PolarSamples::cubic_part(double phi) const {
    const double c = std::cos(phi), s = std::sin(phi);
    const double x = T_[0][0] * c + T_[0][1] * s;
    const double y = T_[1][0] * c + T_[1][1] * s;
    const Vec2 k = eval_cubic(smooth_, x, y);
    return {Tinv_[0][0] * k[0] + Tinv_[0][1] * k[1], Tinv_[1][0] * k[0] + Tinv_[1][1] * k[1]};
}

double PolarSamples::M(double phi) const {
    const double c = std::cos(phi), s = std::sin(phi);
    return L_[0][0] * c * c + (L_[0][1] + L_[1][0]) * s * c + L_[1][1] * s * s;
}

double PolarSamples::W(double phi) const {
    const double c = std::cos(phi), s = std::sin(phi);
    return L_[1][0] * c * c + (L_[1][1] - L_[0][0]) * s * c - L_[0][1] * s * s;
}

double PolarSamples::chi2(double phi) const {
    const Vec2 n = quadratic_part(phi);
    return std::cos(phi) * n[0] + std::sin(phi) * n[1];
}

double PolarSamples::Omega1(double phi) const {
    const Vec2 n = quadratic_part(phi);
    return std::cos(phi) * n[1] - std::sin(phi) * n[0];
}

double PolarSamples::chi3(double phi) const {
    const Vec2 n = cubic_part(phi);
    return std::cos(phi) * n[0] + std::sin(phi) * n[1];
}

double PolarSamples::Omega2(double phi) const {
    const Vec2 n = cubic_part(phi);
    return std::cos(phi) * n[1] - std::sin(phi) * n[0];
}

double PolarSamples::chi1(double phi) const {
    if (!has3d_) return 0.0;
    const double c = std::cos(phi), s = std::sin(phi);
    return c_[5] * c * c + (c_[6] + c_[7]) * c * s + c_[8] * s * s;
}

double PolarSamples::Omega0(double phi) const {
    if (!has3d_) return 0.0;
    const double c = std::cos(phi), s = std::sin(phi);
    return c_[7] * c * c + (c_[8] - c_[5]) * c * s - c_[6] * s * s;
}

double PolarSamples::Upsilon(double phi) const {
    if (!has3d_) return 0.0;
    const double c = std::cos(phi), s = std::sin(phi);
    return c_[4] * c * s + h_.eval(c, s);
}

PolarSamples polar_decompose(const PlanarSystem& sys) {
    sys.validate();
    PolarSamples p;
    p.L_ = sys.linear();
    p.quad_ = sys.quad;
    p.smooth_ = sys.smooth;
    p.switching_angles = {0.0, kPi / 2, kPi, 3 * kPi / 2};
    if (!sys.normal_form) {
        const Mat2& m = p.L_;
        // W has no real zero iff its discriminant is negative
        const double disc = (m[1][1] - m[0][0]) * (m[1][1] - m[0][0]) + 4.0 * m[1][0] * m[0][1];
        if (disc >= 0.0) throw DomainError("angular speed vanishes");
    }
    return p;
}

PolarSamples polar_decompose(const System3D& sys) {
    sys.validate();
    PolarSamples p;
    p.L_ = {{{sys.mu, -sys.omega}, {sys.omega, sys.mu}}};
    p.quad_ = sys.quad;
    p.smooth_ = sys.smooth;
    p.has3d_ = true;
    p.c_ = sys.c;
    p.h_ = sys.h;
    p.switching_angles = {0.0, kPi / 2, kPi, 3 * kPi / 2};
    return p;
}

PolarSamples polar_decompose_transformed(const PlanarSystem& sys, const Mat2& T) {
    PolarSamples p = polar_decompose(sys);
    p.T_ = T;
    p.Tinv_ = mat_inverse(T);
    p.L_ = mat_mul(p.Tinv_, mat_mul(sys.linear(), T));
    p.switching_angles = switching_angles_for(T);
    return p;
}

}  // namespace hopfns
