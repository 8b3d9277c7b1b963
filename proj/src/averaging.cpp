#include "hopfns/averaging.hpp"

#include <algorithm>
#include <cmath>

#include "hopfns/coeffs.hpp"

namespace hopfns {

AveragedNormalForm averaged_form(const PlanarSystem& sys) {
    if (!sys.normal_form) throw DomainError("normal-form linear part required");
    sys.validate();
    const double w = sys.omega;
    AveragedNormalForm nf;
    nf.threshold = 1e-9 * (1 + std::max(sys.quad.max_abs(), sys.smooth.max_abs()));
    nf.linear = sys.mu / w;

    const PolarSamples p = polar_decompose(sys);
    const auto& K = p.switching_angles;
    nf.linear_quad = piecewise_average([&](double t) { return p.M(t) / p.W(t); }, K);
    nf.quadratic = 2 * sigma_tilde(sys.quad) / (3 * kPi * w);
    nf.quadratic_quad = piecewise_average([&](double t) { return p.chi2(t) / w; }, K);
    nf.cubic_quad = piecewise_average(
        [&](double t) { return p.chi3(t) / w - p.chi2(t) * p.Omega1(t) / (w * w); }, K);
    if (sys.quad.default_slopes()) {
        nf.cubic = s_q(sys.smooth) / (8 * w * w) + s_c(sys.smooth) / (8 * w) -
                   sigma_2(sys.quad) / (kTwoPi * w * w);
    } else {
        nf.cubic = nf.cubic_quad;
        nf.cubic_closed = false;
    }
    return nf;
}

std::optional<double> averaged_equilibrium(const AveragedNormalForm& nf) {
    if (std::abs(nf.quadratic) < nf.threshold) throw NumericalError("second-order degenerate");
    const double r = -nf.linear / nf.quadratic;
    if (r < 0.0) return std::nullopt;
    return r == 0.0 ? 0.0 : r;
}

}  // namespace hopfns
