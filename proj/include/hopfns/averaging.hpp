#pragma once

#include <optional>

#include "hopfns/core.hpp"
#include "hopfns/quadrature.hpp"

namespace hopfns {

// r' = linear r + quadratic r^2 + cubic r^3 (in the angle variable)
struct AveragedNormalForm {
    double linear = 0, quadratic = 0, cubic = 0;
    double linear_quad = 0, quadratic_quad = 0, cubic_quad = 0;
    bool cubic_closed = true;  // false when slopes differ from (-1,+1)
    double threshold = 1e-9;
};

AveragedNormalForm averaged_form(const PlanarSystem& sys);

// r = -linear/quadratic when positive
std::optional<double> averaged_equilibrium(const AveragedNormalForm& nf);

}  // namespace hopfns
