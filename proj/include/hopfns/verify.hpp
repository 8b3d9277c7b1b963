#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hopfns/core.hpp"
#include "hopfns/shimmy.hpp"

namespace hopfns {

struct CheckResult {
    std::string id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct VerifyOptions {
    std::uint64_t seed = 20240611;
};

// Reference coefficient sets
PlanarSystem reference_subcritical();    // all ones except b21 = -1, sigma# = 4
PlanarSystem reference_supercritical();  // additionally b22 = -3, sigma# = -4
PlanarSystem sigma2_system();          // a11 = b11 = 1, a12 = -2: sigma# = 0

inline constexpr int kCriteriaCount = 10;

CheckResult run_criterion(int id, const VerifyOptions& opt = {});
std::vector<CheckResult> run_criteria(const VerifyOptions& opt = {});

// cheap module invariants, randomized by opt.seed
std::vector<CheckResult> run_properties(const VerifyOptions& opt = {});

std::string format_line(const CheckResult& r);

}  // namespace hopfns
