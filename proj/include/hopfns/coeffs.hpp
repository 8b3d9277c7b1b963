#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hopfns/core.hpp"

namespace hopfns {

struct CoefficientEntry {
    double value = 0.0;
    std::string method;  // "closed-form" or "quadrature"
    std::optional<double> cross_check;

    double abs_diff() const { return cross_check ? std::abs(value - *cross_check) : 0.0; }
};

struct CoefficientReport {
    std::string kind;  // planar-nf, planar-general, 3d
    double mu = 0.0;
    double omega = 1.0;
    double norm = 0.0;  // max |coefficient|
    bool default_slopes = true;
    std::map<std::string, CoefficientEntry> entries;
    std::vector<std::string> flags;

    void set(const std::string& name, double value, const std::string& method,
             std::optional<double> cross = std::nullopt);
    bool has(const std::string& name) const { return entries.count(name) > 0; }
    double at(const std::string& name) const;
    bool has_flag(const std::string& f) const;
    double max_abs_diff() const;
};

double sigma_hash(const NonsmoothQuadCoeffs& q);
double sigma_tilde(const NonsmoothQuadCoeffs& q);
double sigma_2(const NonsmoothQuadCoeffs& q);
double s_q(const SmoothCoeffs& s);
double s_c(const SmoothCoeffs& s);
double sigma_s(const SmoothCoeffs& s, double omega);
double smoothed_sigma(const NonsmoothQuadCoeffs& q, const std::array<double, 4>& weights);

// quadrature routes
double chi2_integral(const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s = {});
double chi2_omega1_integral(const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s = {});
double chi3_integral(const SmoothCoeffs& s);

double lambda_general(const Mat2& m);
double lambda_general_quadrature(const Mat2& m);

// T maps normal-form coordinates to the original ones: T^{-1} m T = (mu, -omega; omega, mu).
// Rows (z11, z12) = C (cos phi_hat, sin phi_hat), (z21, z22) = D (cos theta_hat, sin theta_hat).
struct NormalFormTransform {
    Mat2 T{};
    double C = 1, D = 1, phi_hat = 0, theta_hat = kPi / 2;
    double mu = 0, omega = 1;
};

NormalFormTransform normal_form_transform(const Mat2& m);
NormalFormTransform transform_from_rows(double C, double D, double phi_hat, double theta_hat,
                                        double omega, double mu = 0.0);

struct GeneralSigma {
    NormalFormTransform tf;
    double Lambda = 0, Lambda_quad = 0;
    std::optional<double> Sigma;  // closed form, slopes (-1,+1) only
    double Sigma_tilde = 0;       // closed form, any slopes
    double Sigma_quad = 0;        // (1/2pi) int chi2/omega of the transformed system
    double carrier() const { return 1.5 * kPi * tf.omega * Sigma_tilde; }
};

GeneralSigma sigma_general(const Mat2& m, const NonsmoothQuadCoeffs& q);
GeneralSigma sigma_general(const NormalFormTransform& tf, const NonsmoothQuadCoeffs& q);

struct Gamma23 {
    double Gamma2 = 0, Gamma3 = 0;
    double Gamma2_quad = 0, Gamma3_quad = 0;
};

// Gamma3 = Gamma2^2 - sigma2_eff / omega^2, sigma2_eff = sigma2 - (pi/4)(S_q + omega S_c)
Gamma23 gamma23_planar(const PlanarSystem& sys);

struct Aux3D {
    double tau1 = 0, tau2 = 0, tau3 = 0, P = 0, Q = 0, R = 0, rho1 = 0, rho2 = 0;
};

Aux3D aux_3d(const System3D& sys);

struct Gamma3Tilde {
    double value = 0;             // nested quadrature
    std::optional<double> closed;  // h = 0 and smooth block zero
    double Gamma3 = 0;
    double correction = 0;   // (1/w^2) int chi1 int e^{c1(s-t)/w} Upsilon
    double elimination = 0;  // -delta11 gamma02 / gamma10
};

Gamma3Tilde gamma3_tilde(const System3D& sys);

struct Ledger3D {
    CoefficientReport report;
    Aux3D aux;
    bool degenerate = false;  // c1 == 0
};

Ledger3D ledger_3d(const System3D& sys);

// c1 = 0 carrier of the u0 equation on the orbit; equals gamma_hash only when
// the r0^3 terms from the radial and angular variation cancel
double gamma_hash_effective(const System3D& sys);

CoefficientReport coefficient_report(const PlanarSystem& sys);
CoefficientReport coefficient_report(const System3D& sys);

}  // namespace hopfns
