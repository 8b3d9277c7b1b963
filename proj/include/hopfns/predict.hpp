#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hopfns/coeffs.hpp"
#include "hopfns/core.hpp"

namespace hopfns {

enum class PredictionKind { supercritical, subcritical, vertical, degenerate_second_order, none };
enum class PredictionOrder { first, second };

std::string to_string(PredictionKind k);
std::string to_string(PredictionOrder o);

// r0(mu) = coeff * mu (first order) or coeff * sqrt(|mu|) (second order), valid for sign(mu) == mu_side
struct Prediction {
    PredictionKind kind = PredictionKind::none;
    PredictionOrder order = PredictionOrder::first;
    std::string criticality;  // supercritical / subcritical / vertical
    std::vector<double> r0_of_mu;
    int mu_side = 0;
    double carrier = 0;
    double mu_max = 1e-2;
    std::string route;

    std::optional<double> r0(double mu) const;
};

std::optional<double> r0_first(double sigma_hash, double mu);
std::optional<double> r0_second(double sigma_2, double omega, double mu);

// mu = -(2 omega^2 / (9 sigma2)) sigma#^2
double bautin_fold(double sigma_hash, double sigma_2, double omega);
// fold of the truncated return map, -2 omega sigma#^2 / (9 pi sigma2)
double bautin_fold_expansion(double sigma_hash, double sigma_2, double omega);

// nonzero equilibria of u' = mu u + sigma u^j [u]; {0} at mu = 0
std::vector<double> scalar_branch(int j, const SlopePair& s, double sigma, double mu);

Prediction classify(const CoefficientReport& report);

// u0 of the two c1 = 0 orbits, (3 pi / (2|sigma#|)) sqrt(gamma mu^3 / (2 omega c2)); none if the radicand is negative
std::optional<double> u0_two_branch(double sigma_hash, double gamma, double c2, double omega, double mu);

}  // namespace hopfns
