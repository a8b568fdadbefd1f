#pragma once

// Price paths and LP wealth accounting: hold (H), pool value (V),
// self-financing rebalance (R), impermanent loss IL = H - V and
// loss-versus-rebalancing LVR = R - V.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clmm/cfmm_core.hpp"
#include "clmm/clmm_pool.hpp"
#include "clmm/errors.hpp"
#include "clmm/liquidity_measure.hpp"
#include "clmm/myopic.hpp"
#include "clmm/parallel.hpp"
#include "clmm/random.hpp"

namespace clmm {

struct PathConfig {
    double mu = 0.0;     // drift of ln S per unit time
    double sigma = 0.2;  // volatility per sqrt(time)
    double dt = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 42;
    std::size_t paths = 1;
    double log_s0 = 0.0;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
        if (!(horizon >= dt)) throw ValidationError("horizon must be >= dt");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
        if (!std::isfinite(mu)) throw ValidationError("mu must be finite");
        if (paths < 1) throw ValidationError("need at least one path");
        if (paths > 0xFFFFFFFFu) throw ValidationError("path count exceeds the generator's path index range");
    }

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

    // Martingale drift for S = e^{ln S}.
    static double martingale_drift(double sigma) { return -0.5 * sigma * sigma; }
};

// ln S_{n+1} = ln S_n + mu dt + sigma sqrt(dt) xi_n; xi from the (seed, path) stream.
inline std::vector<double> gbm_log_path(const PathConfig& config, std::uint32_t path_index) {
    const std::size_t steps = config.steps();
    std::vector<double> noise(steps);
    random::NormalStream(config.seed, path_index).fill(noise);
    std::vector<double> out(steps + 1);
    out[0] = config.log_s0;
    const double drift = config.mu * config.dt;
    const double vol = config.sigma * std::sqrt(config.dt);
    for (std::size_t i = 0; i < steps; ++i) out[i + 1] = out[i] + drift + vol * noise[i];
    return out;
}

inline std::vector<std::vector<double>> simulate_gbm(const PathConfig& config) {
    config.validate();
    std::vector<std::vector<double>> paths(config.paths);
    parallel_for(config.paths, [&](std::size_t i) { paths[i] = gbm_log_path(config, static_cast<std::uint32_t>(i)); });
    return paths;
}

// LVR_{n+1} = LVR_n + 1/4 l(P_n) P_n^{-3/2} (P_{n+1} - P_n)^2
inline std::vector<double> accumulate_lvr(const LiquidityProfile& profile, std::span<const double> prices) {
    std::vector<double> lvr(prices.size(), 0.0);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        const double p = prices[i - 1];
        const double dp = prices[i] - p;
        lvr[i] = lvr[i - 1] + 0.25 * profile.value(p) * std::pow(p, -1.5) * dp * dp;
    }
    return lvr;
}

// G3M accumulator (w^{1-w}(1-w)^w / 2) l P^{w-2} (dP)^2.
inline std::vector<double> accumulate_lvr(const G3MCurve& curve, std::span<const double> prices) {
    curve.validate();
    std::vector<double> lvr(prices.size(), 0.0);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        const double dp = prices[i] - prices[i - 1];
        lvr[i] = lvr[i - 1] + curve.lvr_rate(prices[i - 1]) * dp * dp;
    }
    return lvr;
}

struct LedgerRow {
    double t = 0.0;
    double s = 0.0;  // exogenous price
    double p = 0.0;  // pool price
    double x = 0.0;
    double y = 0.0;
    double hold = 0.0;
    double value = 0.0;
    double rebalance = 0.0;
    double il = 0.0;
    double lvr = 0.0;
    double fees_x = 0.0;
    double fees_y = 0.0;
    double g = 0.0;
    double d = 0.0;
    double liquidity_adjustment = 0.0;  // cumulative V change from profile updates at fixed price
};

struct SimLedger {
    std::vector<LedgerRow> rows;

    const LedgerRow& final() const { return rows.back(); }

    // Martingale part of IL: sum (x_0 - x_n)(P_{n+1} - P_n) = IL - LVR.
    std::vector<double> hedgeable_part() const {
        std::vector<double> m(rows.size(), 0.0);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            m[i] = m[i - 1] + (rows[0].x - rows[i - 1].x) * (rows[i].p - rows[i - 1].p);
        }
        return m;
    }
};

// Anything with price-parameterised reserves and a liquidity-gap test.
template <class M>
concept ReserveModel = requires(const M& m, double p) {
    { m.reserves_at(p) } -> std::convertible_to<Reserves>;
    { m.has_gap(p, p) } -> std::convertible_to<bool>;
};

enum class PoolPricing {
    frictionless,  // P_t = S_t
    myopic,        // P_t from the doubly reflected mispricing with the pool's fee band
};

namespace detail {

template <class ModelAt>
SimLedger build_ledger(ModelAt&& model_at, std::span<const double> log_s, std::span<const double> pool_prices, double dt) {
    const std::size_t n = pool_prices.size();
    SimLedger ledger;
    ledger.rows.resize(n);
    const Reserves r0 = model_at(0).reserves_at(pool_prices[0]);
    double rebalance = pool_prices[0] * r0.x + r0.y;
    double adjustment = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& model = model_at(i);
        const double p = pool_prices[i];
        if (i > 0) {
            if (model.has_gap(pool_prices[i - 1], p)) {
                throw InsufficientLiquidityError("price path crosses a liquidity gap between " +
                                                     std::to_string(pool_prices[i - 1]) + " and " + std::to_string(p),
                                                 std::min(pool_prices[i - 1], p), std::max(pool_prices[i - 1], p));
            }
            rebalance += ledger.rows[i - 1].x * (p - pool_prices[i - 1]);
        }
        Reserves r = model.reserves_at(p);
        if (i + 1 < n) {
            // profile update at fixed price between steps i and i+1
            const auto& next = model_at(i + 1);
            if (&next != &model) {
                const Reserves moved = next.reserves_at(p);
                adjustment += p * (moved.x - r.x) + (moved.y - r.y);
            }
        }
        LedgerRow& row = ledger.rows[i];
        row.t = static_cast<double>(i) * dt;
        row.s = std::exp(log_s[i]);
        row.p = p;
        row.x = r.x;
        row.y = r.y;
        row.hold = r0.x * p + r0.y;
        row.value = p * r.x + r.y;
        row.rebalance = rebalance;
        row.il = row.hold - row.value;
        row.lvr = row.rebalance - row.value;
        row.liquidity_adjustment = i == 0 ? 0.0 : adjustment;
    }
    return ledger;
}

}  // namespace detail

// Ledger for a pool whose price follows the exogenous path exactly.
template <ReserveModel M>
SimLedger ledger_for_path(const M& model, std::span<const double> log_s, double dt) {
    if (log_s.empty()) throw DomainError("ledger_for_path: empty path");
    std::vector<double> prices(log_s.size());
    for (std::size_t i = 0; i < prices.size(); ++i) prices[i] = std::exp(log_s[i]);
    return detail::build_ledger([&](std::size_t) -> const M& { return model; }, log_s, prices, dt);
}

// CLMM ledger. Frictionless: the pool must start at S_0 and tracks S.
// Myopic: the pool price is the reflected price inside the fee band, with
// regulator and fee columns filled from the myopic flows.
inline SimLedger ledger_for_path(const CLMMPool& pool, std::span<const double> log_s, double dt, PoolPricing pricing) {
    pool.validate();
    if (log_s.empty()) throw DomainError("ledger_for_path: empty path");
    if (pricing == PoolPricing::frictionless) {
        if (std::abs(std::log(pool.price) - log_s[0]) > 1e-12) {
            throw DomainError("ledger_for_path: frictionless pool must start at the path's initial price");
        }
        SimLedger ledger = ledger_for_path(pool, log_s, dt);
        for (auto& row : ledger.rows) {
            row.fees_x = pool.fees_x;
            row.fees_y = pool.fees_y;
        }
        return ledger;
    }

    const ReflectedPath reflected = skorokhod_reflect(log_s, pool.gamma, pool.price);
    std::vector<double> prices(log_s.size());
    for (std::size_t i = 0; i < prices.size(); ++i) prices[i] = reflected.pool_price(i);
    SimLedger ledger = detail::build_ledger([&](std::size_t) -> const CLMMPool& { return pool; }, log_s, prices, dt);
    const MyopicFlows flows = myopic_inventory_and_fees(reflected, pool.profile, pool.gamma);
    double fx = pool.fees_x;
    double fy = pool.fees_y;
    for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
        fx += flows.dfees_x[i];
        fy += flows.dfees_y[i];
        ledger.rows[i].fees_x = fx;
        ledger.rows[i].fees_y = fy;
        ledger.rows[i].g = reflected.g[i];
        ledger.rows[i].d = reflected.d[i];
    }
    return ledger;
}

// Deterministic liquidity schedule: schedule[n] is the profile in force at
// step n. The fixed-price value change from each profile update is reported
// cumulatively in liquidity_adjustment and is not removed from IL.
inline SimLedger ledger_for_schedule(std::span<const LiquidityProfile> schedule, std::span<const double> log_s, double dt) {
    if (schedule.size() != log_s.size()) throw ValidationError("ledger_for_schedule: need one profile per path point");
    std::vector<CLMMPool> pools;
    pools.reserve(schedule.size());
    for (const auto& profile : schedule) pools.push_back(CLMMPool{profile, 1.0, 1.0});
    std::vector<double> prices(log_s.size());
    for (std::size_t i = 0; i < prices.size(); ++i) prices[i] = std::exp(log_s[i]);
    return detail::build_ledger([&](std::size_t i) -> const CLMMPool& { return pools[i]; }, log_s, prices, dt);
}

// One Euler step of the order-flow dynamics
//   dP = -2 P^{3/2} / l(P) (u_a - u_b) dt,
//   dF^x = ((1 - gamma) / gamma) u_a dt,  dF^y = ((1 - gamma) / gamma) P u_b dt.
inline CLMMPool order_flow_step(const CLMMPool& pool, double buy_rate, double sell_rate, double dt) {
    pool.validate();
    if (!(buy_rate >= 0.0) || !(sell_rate >= 0.0)) throw DomainError("order_flow_step: rates must be >= 0");
    if (!(dt > 0.0)) throw DomainError("order_flow_step: dt must be positive");
    const double P = pool.price;
    const double depth = pool.profile.value(P);
    if (!(depth > 0.0)) {
        throw InsufficientLiquidityError("order_flow_step: no liquidity at price " + std::to_string(P), P, P);
    }
    const double next = P - 2.0 * std::pow(P, 1.5) / depth * (buy_rate - sell_rate) * dt;
    if (!(next > 0.0)) throw DomainError("order_flow_step: step drives the price non-positive; reduce dt");
    require_liquidity(pool.profile, P, next);

    CLMMPool out = pool;
    out.price = next;
    const double fee_factor = (1.0 - pool.gamma) / pool.gamma;
    out.fees_x += fee_factor * buy_rate * dt;
    out.fees_y += fee_factor * P * sell_rate * dt;
    return out;
}

}  // namespace clmm
