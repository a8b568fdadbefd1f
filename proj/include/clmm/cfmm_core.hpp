#pragma once

// Geometric-mean market makers f(x, y) = x^w y^(1-w) = l with fee-adjusted
// swaps. w = 1/2 is the constant-product pool.

#include <cmath>
#include <string>

#include "clmm/errors.hpp"
#include "clmm/liquidity_measure.hpp"

namespace clmm {

struct G3MCurve {
    double weight = 0.5;
    double liquidity = 1.0;

    void validate() const {
        if (!(weight > 0.0 && weight < 1.0)) throw ValidationError("G3M weight must lie in (0, 1)");
        if (!(liquidity > 0.0) || !std::isfinite(liquidity)) throw ValidationError("G3M liquidity must be positive");
    }

    double invariant(double x, double y) const { return std::pow(x, weight) * std::pow(y, 1.0 - weight); }

    // Reserves on this curve at spot price P.
    Reserves reserves_at(double P) const {
        const double w = weight;
        return {std::pow(w / (1.0 - w), 1.0 - w) * liquidity * std::pow(P, w - 1.0),
                std::pow((1.0 - w) / w, w) * liquidity * std::pow(P, w)};
    }

    double value_at(double P) const {
        const double w = weight;
        return liquidity * std::pow(P, w) / (std::pow(w, w) * std::pow(1.0 - w, 1.0 - w));
    }

    // -1/2 V''(P): the rate at which LVR accrues per unit of d<P>.
    double lvr_rate(double P) const {
        const double w = weight;
        return 0.5 * std::pow(w, 1.0 - w) * std::pow(1.0 - w, w) * liquidity * std::pow(P, w - 2.0);
    }

    // A G3M pool has liquidity at every price.
    bool has_gap(double, double) const { return false; }
};

struct PoolState {
    double x = 0.0;
    double y = 0.0;
    double gamma = 1.0;  // fee retention; 1 - gamma is the fee rate
    double fees_x = 0.0;
    double fees_y = 0.0;

    void validate() const {
        if (!(x >= 0.0) || !(y >= 0.0)) throw ValidationError("pool reserves must be >= 0");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("fee retention gamma must lie in (0, 1]");
        if (!(fees_x >= 0.0) || !(fees_y >= 0.0)) throw ValidationError("accrued fees must be >= 0");
    }

    double value(double P) const { return P * x + y; }
};

inline void require_positive_reserves(const PoolState& s, const char* op) {
    if (!(s.x > 0.0) || !(s.y > 0.0)) throw DomainError(std::string(op) + ": reserves must be strictly positive");
}

// P = (w / (1 - w)) * y / x
inline double spot_price(const G3MCurve& curve, const PoolState& state) {
    curve.validate();
    require_positive_reserves(state, "spot_price");
    return curve.weight / (1.0 - curve.weight) * state.y / state.x;
}

inline Reserves reserves_from_price(const G3MCurve& curve, double P) {
    curve.validate();
    if (!(P > 0.0)) throw DomainError("reserves_from_price: price must be positive");
    return curve.reserves_at(P);
}

inline PoolState state_from_price(const G3MCurve& curve, double P, double gamma = 1.0) {
    const Reserves r = reserves_from_price(curve, P);
    PoolState s{r.x, r.y, gamma, 0.0, 0.0};
    s.validate();
    return s;
}

// Curvature d^2y/dx^2 of the trading curve through the current reserves,
// w / (1 - w)^2 * y / x^2 (2 l^2 / x^3 for constant product). Positive: the
// pool price falls as the pool's x grows.
inline double price_impact(const G3MCurve& curve, const PoolState& state) {
    curve.validate();
    require_positive_reserves(state, "price_impact");
    const double w = curve.weight;
    return w / ((1.0 - w) * (1.0 - w)) * state.y / (state.x * state.x);
}

// Infinitesimal quotes: the pool buys X at gamma * P and sells at P / gamma.
struct Quotes {
    double bid = 0.0;  // P / gamma, what a buyer of X pays per unit
    double ask = 0.0;  // gamma * P, what a seller of X receives per unit
};

inline Quotes quoted_prices(const G3MCurve& curve, const PoolState& state) {
    const double P = spot_price(curve, state);
    return {P / state.gamma, state.gamma * P};
}

struct SwapResult {
    PoolState state;
    // Pool-side change in y: negative when the pool pays out Y, otherwise the
    // gross Y the trader pays in (of which gamma * delta_y enters reserves).
    double delta_y = 0.0;
    double fee_x = 0.0;
    double fee_y = 0.0;
};

// delta_x > 0: trader sells delta_x of X; gamma * delta_x enters the reserves,
// (1 - gamma) * delta_x goes to the fee pot, and y is solved from f.
// delta_x < 0: trader buys |delta_x| of X and pays delta_y of Y with
// f(x + delta_x, y + gamma * delta_y) = f(x, y).
inline SwapResult swap_with_fee(const G3MCurve& curve, const PoolState& state, double delta_x) {
    curve.validate();
    state.validate();
    require_positive_reserves(state, "swap_with_fee");
    if (delta_x == 0.0) return {state, 0.0, 0.0, 0.0};

    const double w = curve.weight;
    const double k = curve.invariant(state.x, state.y);
    // y on the curve f = k at reserve x
    auto y_on_curve = [&](double x) { return std::pow(k / std::pow(x, w), 1.0 / (1.0 - w)); };

    SwapResult out{state, 0.0, 0.0, 0.0};
    if (delta_x > 0.0) {
        const double effective = state.gamma * delta_x;
        const double new_x = state.x + effective;
        const double new_y = y_on_curve(new_x);
        out.delta_y = new_y - state.y;
        out.fee_x = delta_x - effective;
        out.state.x = new_x;
        out.state.y = new_y;
        out.state.fees_x += out.fee_x;
    } else {
        const double new_x = state.x + delta_x;
        if (!(new_x > 0.0)) {
            throw InsufficientLiquidityError("swap_with_fee: buying " + std::to_string(-delta_x) +
                                                 " X would drain the reserve of " + std::to_string(state.x),
                                             0.0, state.x);
        }
        const double new_y = y_on_curve(new_x);
        const double effective = new_y - state.y;
        out.delta_y = effective / state.gamma;
        out.fee_y = out.delta_y - effective;
        out.state.x = new_x;
        out.state.y = new_y;
        out.state.fees_y += out.fee_y;
    }
    if (!(out.state.y > 0.0) || !std::isfinite(out.state.y)) {
        throw InsufficientLiquidityError("swap_with_fee: trade would drain the Y reserve", 0.0, state.y);
    }
    return out;
}

}  // namespace clmm
