#pragma once

#include <functional>
#include <optional>

namespace hopfns {

// Brent's method on [a,b] with f(a) f(b) <= 0.
double brent_root(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                  double xtol = 1e-15, int max_iter = 200);
double brent_root(const std::function<double(double)>& f, double a, double b, double xtol = 1e-15,
                  int max_iter = 200);

struct MinResult {
    double x;
    double fx;
};

// golden-section search for a minimum of f on [a,b]
MinResult golden_min(const std::function<double(double)>& f, double a, double b, double xtol,
                     int max_iter = 200);

}  // namespace hopfns
