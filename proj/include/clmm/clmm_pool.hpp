#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "clmm/errors.hpp"
#include "clmm/liquidity_measure.hpp"
#include "clmm/position.hpp"

namespace clmm {

namespace detail {
inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

inline void require_price(double P, const char* op) {
    if (!(P > 0.0) || !std::isfinite(P)) throw DomainError(std::string(op) + ": price must be positive and finite");
}
}  // namespace detail

// x = l[(P^-1/2 - p_u^-1/2)+ - (P^-1/2 - p_l^-1/2)+],
// y = l[(P^1/2 - p_l^1/2)+ - (P^1/2 - p_u^1/2)+]
inline Reserves position_reserves(const Position& pos, double P) {
    pos.validate();
    detail::require_price(P, "position_reserves");
    using detail::positive_part;
    const double inv = 1.0 / std::sqrt(P);
    const double root = std::sqrt(P);
    return {pos.liquidity * (positive_part(inv - 1.0 / std::sqrt(pos.upper)) - positive_part(inv - 1.0 / std::sqrt(pos.lower))),
            pos.liquidity * (positive_part(root - std::sqrt(pos.lower)) - positive_part(root - std::sqrt(pos.upper)))};
}

inline double position_value(const Position& pos, double P) {
    pos.validate();
    detail::require_price(P, "position_value");
    const double l = pos.liquidity;
    if (P < pos.lower) return l * P * (1.0 / std::sqrt(pos.lower) - 1.0 / std::sqrt(pos.upper));
    if (P > pos.upper) return l * (std::sqrt(pos.upper) - std::sqrt(pos.lower));
    return l * (2.0 * std::sqrt(P) - P / std::sqrt(pos.upper) - std::sqrt(pos.lower));
}

struct CoveredCallPoint {
    double value = 0.0;
    double bound = 0.0;
};

// LP value at P = k * p_m against l sqrt(p_m) (sqrt(r) - 1/sqrt(r)) (k - (k - 1)+),
// with p_m = sqrt(p_l p_u) and r = sqrt(p_u / p_l).
inline CoveredCallPoint covered_call_bound(const Position& pos, double k) {
    pos.validate();
    if (!(k >= 0.0)) throw DomainError("covered_call_bound: price ratio k must be >= 0");
    const double pm = pos.mid_price();
    const double r = pos.width_ratio();
    const double coefficient = pos.liquidity * std::sqrt(pm) * (std::sqrt(r) - 1.0 / std::sqrt(r));
    const double bound = coefficient * (k - detail::positive_part(k - 1.0));
    const double value = k == 0.0 ? 0.0 : position_value(pos, k * pm);
    return {value, bound};
}

// Number of covered calls (strike 1 in the k-domain) the position resembles.
inline double covered_call_count(const Position& pos) {
    const double r = pos.width_ratio();
    return pos.liquidity * std::sqrt(pos.mid_price()) * (std::sqrt(r) - 1.0 / std::sqrt(r));
}

struct CLMMPool {
    LiquidityProfile profile;
    double price = 1.0;
    double gamma = 1.0;
    double fees_x = 0.0;
    double fees_y = 0.0;

    void validate() const {
        detail::require_price(price, "CLMMPool");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("fee retention gamma must lie in (0, 1]");
        if (!(fees_x >= 0.0) || !(fees_y >= 0.0)) throw ValidationError("accrued fees must be >= 0");
    }

    Reserves reserves_at(double P) const { return quad_reserves(profile, P); }
    double lvr_rate(double P) const { return 0.25 * profile.value(P) * std::pow(P, -1.5); }
    bool has_gap(double a, double b) const { return profile.find_gap(a, b).has_value(); }
};

inline Reserves pool_reserves(const CLMMPool& pool) { return quad_reserves(pool.profile, pool.price); }

inline void require_liquidity(const LiquidityProfile& profile, double from, double to) {
    if (auto gap = profile.find_gap(from, to)) {
        throw InsufficientLiquidityError("no liquidity on [" + std::to_string(gap->first) + ", " +
                                             std::to_string(gap->second) + ") between prices " +
                                             std::to_string(from) + " and " + std::to_string(to),
                                         gap->first, gap->second);
    }
}

struct PoolSwap {
    CLMMPool pool;
    double delta_x = 0.0;  // pool-side reserve changes
    double delta_y = 0.0;
    double fee_x = 0.0;
    double fee_y = 0.0;
};

// Moves the pool to `target`. Price-increasing moves take Y in and pay
// ((1 - gamma) / gamma) * delta_y in Y fees; price-decreasing moves take X in
// and pay ((1 - gamma) / gamma) * delta_x in X fees.
inline PoolSwap swap_to_price(const CLMMPool& pool, double target) {
    pool.validate();
    detail::require_price(target, "swap_to_price");
    PoolSwap out{pool};
    if (target == pool.price) return out;
    require_liquidity(pool.profile, pool.price, target);

    const Reserves before = quad_reserves(pool.profile, pool.price);
    const Reserves after = quad_reserves(pool.profile, target);
    out.delta_x = after.x - before.x;
    out.delta_y = after.y - before.y;
    const double fee_factor = (1.0 - pool.gamma) / pool.gamma;
    if (target > pool.price) {
        out.fee_y = fee_factor * std::max(out.delta_y, 0.0);
    } else {
        out.fee_x = fee_factor * std::max(out.delta_x, 0.0);
    }
    out.pool.price = target;
    out.pool.fees_x += out.fee_x;
    out.pool.fees_y += out.fee_y;
    return out;
}

enum class Asset { x, y };

// Trader pays `amount_in` of `asset` (fees included); gamma * amount_in enters
// the reserves. The target price is found by bisection to 1e-14 relative.
inline PoolSwap swap_exact_input(const CLMMPool& pool, Asset asset, double amount_in) {
    pool.validate();
    if (!(amount_in >= 0.0) || !std::isfinite(amount_in)) throw DomainError("swap_exact_input: amount must be >= 0");
    if (amount_in == 0.0) return PoolSwap{pool};

    const double needed = pool.gamma * amount_in;
    const Reserves start = quad_reserves(pool.profile, pool.price);
    // X in pushes the price down, Y in pushes it up.
    const bool down = asset == Asset::x;
    auto moved = [&](double P) {
        const Reserves r = quad_reserves(pool.profile, P);
        return down ? r.x - start.x : r.y - start.y;
    };

    double near = pool.price;
    double far = pool.price;
    for (int i = 0;; ++i) {
        far = down ? far * 0.5 : far * 2.0;
        require_liquidity(pool.profile, pool.price, far);
        if (moved(far) >= needed) break;
        if (i > 2000 || far == 0.0 || std::isinf(far)) {
            throw InsufficientLiquidityError("swap_exact_input: pool cannot absorb " + std::to_string(amount_in),
                                             std::min(pool.price, far), std::max(pool.price, far));
        }
        near = far;
    }
    for (int i = 0; i < 400; ++i) {
        const double mid = std::sqrt(near * far);
        if (std::abs(far - near) <= 1e-14 * mid) break;
        if (moved(mid) >= needed) {
            far = mid;
        } else {
            near = mid;
        }
    }
    return swap_to_price(pool, far);
}

}  // namespace clmm
