#pragma once

#include <cmath>
#include <string>

#include "clmm/errors.hpp"

namespace clmm {

// One concentrated-liquidity range: `liquidity` units of sqrt(x*y) spread
// over prices [lower, upper).
struct Position {
    double liquidity = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    // Geometric centre p_m = sqrt(p_l * p_u).
    double mid_price() const { return std::sqrt(lower * upper); }

    // Half-width ratio r with p_l = p_m / r and p_u = r * p_m, i.e. sqrt(p_u / p_l).
    double width_ratio() const { return std::sqrt(upper / lower); }

    std::string describe() const {
        return "(" + std::to_string(liquidity) + ", [" + std::to_string(lower) + ", " +
               std::to_string(upper) + "))";
    }

    void validate() const {
        if (!std::isfinite(liquidity) || liquidity < 0.0) {
            throw ValidationError("position " + describe() + ": liquidity must be finite and >= 0");
        }
        if (!(lower > 0.0) || !(upper > lower) || !std::isfinite(upper)) {
            throw ValidationError("position " + describe() + ": need 0 < lower < upper < inf");
        }
    }
};

}  // namespace clmm
