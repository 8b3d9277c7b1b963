#include "hopfns/predict.hpp"

#include <algorithm>
#include <cmath>

namespace hopfns {

std::string to_string(PredictionKind k) {
    switch (k) {
        case PredictionKind::supercritical: return "supercritical";
        case PredictionKind::subcritical: return "subcritical";
        case PredictionKind::vertical: return "vertical";
        case PredictionKind::degenerate_second_order: return "degenerate-second-order";
        default: return "none";
    }
}

std::string to_string(PredictionOrder o) {
    return o == PredictionOrder::first ? "first" : "second";
}

std::optional<double> Prediction::r0(double mu) const {
    if (kind == PredictionKind::vertical || kind == PredictionKind::none || r0_of_mu.empty()) return std::nullopt;
    if (mu == 0.0) return 0.0;
    if ((mu > 0 ? 1 : -1) != mu_side) return std::nullopt;
    const double r = order == PredictionOrder::first ? r0_of_mu[0] * mu : r0_of_mu[0] * std::sqrt(std::abs(mu));
    return r >= 0 ? std::optional<double>(r) : std::nullopt;
}

std::optional<double> r0_first(double sigma_hash, double mu) {
    if (sigma_hash == 0.0) throw DomainError("degenerate");
    const double r = -3 * kPi * mu / (2 * sigma_hash);
    if (r < 0) return std::nullopt;
    return r == 0.0 ? 0.0 : r;
}

std::optional<double> r0_second(double sigma_2, double omega, double mu) {
    if (sigma_2 == 0.0) throw DomainError("degenerate");
    const double q = kTwoPi * omega * mu / sigma_2;
    if (q < 0) return std::nullopt;
    return std::sqrt(q);
}

double bautin_fold(double sigma_hash, double sigma_2, double omega) {
    if (sigma_2 == 0.0) throw DomainError("degenerate");
    return -(2 * omega * omega / (9 * sigma_2)) * sigma_hash * sigma_hash;
}

double bautin_fold_expansion(double sigma_hash, double sigma_2, double omega) {
    if (sigma_2 == 0.0) throw DomainError("degenerate");
    return -2 * omega * sigma_hash * sigma_hash / (9 * kPi * sigma_2);
}

std::vector<double> scalar_branch(int j, const SlopePair& s, double sigma, double mu) {
    if (j != 1 && j != 2) throw DomainError("degree must be 1 or 2");
    if (sigma == 0.0) throw DomainError("sigma must be nonzero");
    if (mu == 0.0) return {0.0};
    std::vector<double> out;
    // u > 0: mu + sigma p+ u^j = 0; u < 0: mu + sigma p- u^j = 0
    auto side = [&](double p, int sign) {
        if (p == 0.0) return;
        const double q = -mu / (sigma * p);
        if (j == 1) {
            if (q * sign > 0) out.push_back(q);
        } else if (q > 0) {
            out.push_back(sign * std::sqrt(q));
        }
    };
    side(s.p_plus, 1);
    side(s.p_minus, -1);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> u0_two_branch(double sigma_hash, double gamma, double c2, double omega, double mu) {
    if (sigma_hash == 0.0 || c2 == 0.0) throw DomainError("degenerate");
    const double q = gamma * mu * mu * mu / (2 * omega * c2);
    if (q < 0) return std::nullopt;
    return 3 * kPi / (2 * std::abs(sigma_hash)) * std::sqrt(q);
}

Prediction classify(const CoefficientReport& rep) {
    Prediction p;
    const double thr = 1e-9 * std::max(1.0, rep.norm);
    if (rep.norm == 0.0) {
        p.kind = PredictionKind::vertical;
        p.criticality = "vertical";
        p.route = "zero nonlinearity";
        return p;
    }
    const double w = rep.omega;

    double first = 0;
    if (rep.kind == "planar-general") {
        first = rep.at("carrier");
        p.route = "general linear part";
    } else {
        first = rep.at("sigma_tilde");
        p.route = rep.default_slopes ? "sigma_hash" : "sigma_tilde";
    }
    if (std::abs(first) > thr) {
        p.order = PredictionOrder::first;
        p.carrier = first;
        p.r0_of_mu = {-3 * kPi / (2 * first)};
        p.mu_side = first > 0 ? -1 : 1;
        p.kind = first > 0 ? PredictionKind::subcritical : PredictionKind::supercritical;
        p.criticality = to_string(p.kind);
        return p;
    }

    double second = 0;
    if (rep.has("sigma_2_eff"))
        second = rep.at("sigma_2_eff");
    else if (rep.has("cubic"))
        second = -kTwoPi * w * w * rep.at("cubic");
    else
        throw NumericalError("inconclusive");
    if (std::abs(second) <= thr) throw NumericalError("inconclusive");
    p.order = PredictionOrder::second;
    p.kind = PredictionKind::degenerate_second_order;
    p.route = "sigma_2";
    p.carrier = second;
    p.r0_of_mu = {std::sqrt(kTwoPi * std::abs(w / second))};
    p.mu_side = w * second > 0 ? 1 : -1;
    p.criticality = p.mu_side > 0 ? "supercritical" : "subcritical";
    return p;
}

}  // namespace hopfns
