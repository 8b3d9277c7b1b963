#pragma once

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hopfns {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Input violates the descriptor schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition of an operation does not hold.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct SlopePair {
    double p_minus = -1.0;
    double p_plus = 1.0;

    double jump() const { return p_plus - p_minus; }
    bool is_abs() const { return p_minus == -1.0 && p_plus == 1.0; }
};

double gen_abs(double u, const SlopePair& s);

// a[i][j], b[i][j] multiply v[v], v[w], w[v], w[w] for (i,j) = (0,0),(0,1),(1,0),(1,1).
// alpha[k] / beta[k] are the slopes of those four terms in the same order.
struct NonsmoothQuadCoeffs {
    double a[2][2] = {{0, 0}, {0, 0}};
    double b[2][2] = {{0, 0}, {0, 0}};
    SlopePair alpha[4];
    SlopePair beta[4];

    bool default_slopes() const;
    bool is_zero() const;
    double max_abs() const;
};

struct SmoothCoeffs {
    double a1 = 0, a2 = 0, a3 = 0;
    double b1 = 0, b2 = 0, b3 = 0;
    // v^3, v w^2, v^2 w, w^3
    double ca[4] = {0, 0, 0, 0};
    double cb[4] = {0, 0, 0, 0};

    bool is_zero() const;
    double max_abs() const;
};

// h11 v[v] + h12 v[w] + h21 w[v] + h22 w[w]
struct ModulusTerm {
    double h[2][2] = {{0, 0}, {0, 0}};
    SlopePair slopes[4];

    double eval(double v, double w) const;
    bool is_zero() const;
};

Vec2 eval_nonsmooth(const NonsmoothQuadCoeffs& q, double v, double w);
Vec2 eval_smooth_quadratic(const SmoothCoeffs& s, double v, double w);
Vec2 eval_cubic(const SmoothCoeffs& s, double v, double w);

struct PlanarSystem {
    // normal_form: linear part (mu, -omega; omega, mu).
    // otherwise: base + mu * I, omega is derived from the eigenvalues.
    bool normal_form = true;
    Mat2 base = {{{0, 0}, {0, 0}}};
    double mu = 0.0;
    double omega = 1.0;
    NonsmoothQuadCoeffs quad;
    SmoothCoeffs smooth;

    Mat2 linear() const;
    // imaginary part of the eigenvalue pair of linear()
    double frequency() const;
    void validate() const;
};

Vec2 eval_planar_rhs(const PlanarSystem& sys, double v, double w);

struct System3D {
    // c[0] .. c[8] hold c1 .. c9
    std::array<double, 9> c{};
    ModulusTerm h;
    NonsmoothQuadCoeffs quad;
    SmoothCoeffs smooth;
    double mu = 0.0;
    double omega = 1.0;

    double c_(int i) const { return c[i - 1]; }
    void validate() const;
};

std::array<double, 3> eval_3d_rhs(const System3D& sys, double u, double v, double w);

// u' = A u + U(u,v,w), planar block (mu,-omega;omega,mu) + sum_i u_i (c6 v + c7 w, c8 v + c9 w) + f, g
// U_i = u^T Q_i u + (C3 u)_i v + (C4 u)_i w + c5_i v w + h_i(v,w)
struct SystemND {
    Eigen::MatrixXd A;
    std::vector<Eigen::MatrixXd> Q;
    Eigen::MatrixXd C3, C4;
    Eigen::VectorXd c5;
    std::vector<ModulusTerm> h;
    Eigen::VectorXd c6, c7, c8, c9;
    NonsmoothQuadCoeffs quad;
    SmoothCoeffs smooth;
    double mu = 0.0;
    double omega = 1.0;

    int transverse_dim() const { return static_cast<int>(A.rows()); }
    void validate() const;
    static SystemND from_3d(const System3D& s);
    static SystemND zeros(int m);
};

// Angle functions of the polar form
//   r'   = r M + r^2 chi2 + r^3 chi3 (+ r u chi1 for 3D)
//   phi' = W + r Omega1 + r^2 Omega2 (+ u Omega0 for 3D)
//   u'  contains r^2 Upsilon
// evaluated in coordinates x = T y when a transformation is attached.
class PolarSamples {
public:
    std::vector<double> switching_angles;

    double M(double phi) const;
    double W(double phi) const;
    double chi2(double phi) const;
    double Omega1(double phi) const;
    double chi3(double phi) const;
    double Omega2(double phi) const;
    double chi1(double phi) const;
    double Omega0(double phi) const;
    double Upsilon(double phi) const;

    const Mat2& transform() const { return T_; }

private:
    friend PolarSamples polar_decompose(const PlanarSystem&);
    friend PolarSamples polar_decompose(const System3D&);
    friend PolarSamples polar_decompose_transformed(const PlanarSystem&, const Mat2&);

    Vec2 quadratic_part(double phi) const;
    Vec2 cubic_part(double phi) const;

    Mat2 L_ = {{{0, -1}, {1, 0}}};
    Mat2 T_ = {{{1, 0}, {0, 1}}};
    Mat2 Tinv_ = {{{1, 0}, {0, 1}}};
    NonsmoothQuadCoeffs quad_;
    SmoothCoeffs smooth_;
    bool has3d_ = false;
    std::array<double, 9> c_{};
    ModulusTerm h_;
};

PolarSamples polar_decompose(const PlanarSystem& sys);
PolarSamples polar_decompose(const System3D& sys);
// Polar form of y' = T^{-1} F(T y); the switching lines of F map to rotated angles.
PolarSamples polar_decompose_transformed(const PlanarSystem& sys, const Mat2& T);

// zeros in [0, 2pi) of a cos(phi) + b sin(phi), always including the axis angles
std::vector<double> switching_angles_for(const Mat2& T);

Mat2 mat_inverse(const Mat2& m);
Mat2 mat_mul(const Mat2& a, const Mat2& b);
double mat_det(const Mat2& m);

}  // namespace hopfns
