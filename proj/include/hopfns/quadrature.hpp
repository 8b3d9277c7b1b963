#pragma once

#include <functional>
#include <vector>

namespace hopfns {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre rule of order n (cached for repeated use).
const GaussRule& gauss_legendre(int n);

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // |two-panel - one-panel| summed over accepted panels
    int panels = 0;
};

struct QuadratureOptions {
    int order = 20;
    double tol = 1e-13;
    int max_depth = 30;
};

// Integral of f over [a,b]; f is smooth between consecutive kinks.
QuadratureResult integrate_piecewise(const std::function<double(double)>& f,
                                     const std::vector<double>& kinks, double a, double b,
                                     const QuadratureOptions& opt = {});

// (1/2pi) * integral over one period [0, 2pi)
double piecewise_average(const std::function<double(double)>& f, const std::vector<double>& kinks,
                         bool smooth = false, const QuadratureOptions& opt = {});

double periodic_integral(const std::function<double(double)>& f, const std::vector<double>& kinks,
                         const QuadratureOptions& opt = {});

}  // namespace hopfns
