#include "hopfns/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "hopfns/core.hpp"

namespace hopfns {

namespace {

GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / dp;
            if (std::abs(z - z1) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

struct Panel {
    double value, mass;  // integral of f and of |f|
};

Panel panel(const std::function<double(double)>& f, const GaussRule& g, double a, double b) {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double s = 0.0, m = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) {
        const double y = g.w[i] * f(c + h * g.x[i]);
        s += y;
        m += std::abs(y);
    }
    return {s * h, m * std::abs(h)};
}

void adapt(const std::function<double(double)>& f, const GaussRule& g, double a, double b,
           double whole, double tol, int depth, int max_depth, QuadratureResult& out) {
    const double m = 0.5 * (a + b);
    const Panel one = panel(f, g, a, b);
    const Panel left = panel(f, g, a, m), right = panel(f, g, m, b);
    const double two = left.value + right.value;
    const double err = std::abs(two - one.value);
    // below this the difference is rounding noise
    const double floor = 64 * std::numeric_limits<double>::epsilon() * (left.mass + right.mass);
    if (err <= std::max(tol * (b - a) / whole, floor) || depth >= max_depth) {
        out.value += two;
        out.error += err;
        out.panels += 1;
        return;
    }
    adapt(f, g, a, m, whole, tol, depth + 1, max_depth, out);
    adapt(f, g, m, b, whole, tol, depth + 1, max_depth, out);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

QuadratureResult integrate_piecewise(const std::function<double(double)>& f,
                                     const std::vector<double>& kinks, double a, double b,
                                     const QuadratureOptions& opt) {
    QuadratureResult out;
    if (b == a) return out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    const GaussRule& g = gauss_legendre(opt.order);
    std::vector<double> pts = {a};
    for (double k : kinks)
        if (k > a && k < b) pts.push_back(k);
    pts.push_back(b);
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        adapt(f, g, pts[i], pts[i + 1], b - a, opt.tol, 0, opt.max_depth, out);
    out.value *= sign;
    return out;
}

double periodic_integral(const std::function<double(double)>& f, const std::vector<double>& kinks,
                         const QuadratureOptions& opt) {
    return integrate_piecewise(f, kinks, 0.0, kTwoPi, opt).value;
}

double piecewise_average(const std::function<double(double)>& f, const std::vector<double>& kinks,
                         bool smooth, const QuadratureOptions& opt) {
    if (kinks.empty() && !smooth) throw DomainError("kink list empty");
    return periodic_integral(f, kinks, opt) / kTwoPi;
}

}  // namespace hopfns
