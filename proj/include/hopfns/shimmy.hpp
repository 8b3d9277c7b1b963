#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopfns/core.hpp"

namespace hopfns {

// x = (Omega, psi, q); x' = J x + c4 (q|q|, 0, 0), J = (c1 c2 c3; 1 0 0; c5 c6 c7)
struct ShimmyParams {
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0;

    Eigen::Matrix3d jacobian() const;
    double norm_inf() const;
    void validate() const;
};

struct ShimmyEigen {
    double mu = 0, omega = 0, lambda3 = 0;
    Eigen::Vector3cd s1;  // eigenvector of mu + i omega
    Eigen::Vector3d s3;   // eigenvector of lambda3
    Eigen::Vector3d u() const { return s1.real(); }
    Eigen::Vector3d v() const { return s1.imag(); }
};

// characteristic polynomial coefficients of J: lambda^3 + b lambda^2 + c lambda + d
std::array<double, 3> shimmy_charpoly(const ShimmyParams& p);

ShimmyEigen eigensplit(const ShimmyParams& p);

enum class ShimmyVerdict { vertical, supercritical, subcritical, degenerate };
std::string to_string(ShimmyVerdict v);

struct ShimmyAnalysis {
    ShimmyEigen eigen;
    Eigen::Matrix3d T;
    double detT = 0;
    double d_tilde = 0;
    double theta_tilde = 0;
    double s3_third = 0;
    std::array<double, 3> T_tilde{};  // c4 times rows of T^{-1} paired with the q row
    std::array<double, 3> h{};        // rotated coefficients h31, h32, h33
    double chi2_integral = 0;         // (8/3) d|d| h31
    double literal_product = 0;       // d s3 c4 detT
    double vertical_product = 0;      // d s3 c4
    double block_residual = 0;        // |T^{-1} J T - A|
    double rotation_residual = 0;     // coefficient removed by the rotation
    double c4 = 0;
    double scale = 1;                 // |p|_inf
    std::string certificate;          // reason for a vertical verdict
    ShimmyVerdict verdict = ShimmyVerdict::degenerate;
    std::optional<double> slope;      // dr0/dmu = -2 pi / int chi2
};

ShimmyAnalysis normalize(const ShimmyParams& p, const ShimmyEigen& e);
ShimmyVerdict classify_shimmy(ShimmyAnalysis& a);
ShimmyAnalysis analyze_shimmy(const ShimmyParams& p);

// c1 values placing the complex pair on the imaginary axis
std::vector<double> hopf_tune(const ShimmyParams& p);

// c1 with real part of the complex pair equal to mu, starting from a Hopf-tuned c1
double shift_to_mu(const ShimmyParams& p, double mu);

struct ShimmySideResult {
    double mu = 0;
    bool orbit = false;
    double amplitude = 0;  // xi-plane radius at the section
};

struct ShimmySimulation {
    ShimmySideResult neg, pos;
    ShimmyVerdict verdict = ShimmyVerdict::degenerate;
};

// time-domain search for small orbits at mu = -dmu and +dmu, c1 modulated
ShimmySimulation simulate_shimmy(const ShimmyParams& tuned, double dmu = 1e-3);

// Hopf-tuned draw with omega > 0.3, lambda3 < -0.2 and a non-small carrier
ShimmyParams hopf_tuned_draw(std::uint64_t seed);

}  // namespace hopfns
