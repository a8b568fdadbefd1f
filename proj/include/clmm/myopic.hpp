#pragma once

// Myopic arbitrage: the mispricing Z = ln S - ln P is kept inside the
// no-arbitrage band [ln gamma, -ln gamma] by two regulators.
//
//   G  pushes Z up at the lower edge ln gamma   (S cheap: pool price falls, pool buys X)
//   D  pushes Z down at the upper edge -ln gamma (S rich:  pool price rises, pool sells X)
//
// so that Z_n = ln S_n - ln P_0 + G_n - D_n and ln P_n = ln P_0 + D_n - G_n.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "clmm/clmm_pool.hpp"
#include "clmm/errors.hpp"
#include "clmm/liquidity_measure.hpp"

namespace clmm {

struct ReflectedPath {
    double lower = 0.0;  // ln gamma
    double upper = 0.0;  // -ln gamma
    double log_p0 = 0.0;
    std::vector<double> log_s;
    std::vector<double> z;      // reflected mispricing, z[0] = ln S_0 - ln P_0
    std::vector<double> z_pre;  // mispricing before the arbitrage trade (z_pre[0] = z[0])
    std::vector<double> g;      // cumulative regulators, g[0] = d[0] = 0
    std::vector<double> d;
    std::vector<double> log_pool;

    std::size_t size() const { return z.size(); }
    double dg(std::size_t n) const { return n == 0 ? 0.0 : g[n] - g[n - 1]; }
    double dd(std::size_t n) const { return n == 0 ? 0.0 : d[n] - d[n - 1]; }
    double pool_price(std::size_t n) const { return std::exp(log_pool[n]); }
};

// Discrete two-sided Skorokhod map by clamping.
inline ReflectedPath skorokhod_reflect(std::span<const double> log_s, double gamma, double p0) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("skorokhod_reflect: gamma must lie in (0, 1]");
    if (!(p0 > 0.0)) throw DomainError("skorokhod_reflect: initial pool price must be positive");
    if (log_s.empty()) throw DomainError("skorokhod_reflect: empty path");

    ReflectedPath out;
    out.lower = std::log(gamma);
    out.upper = -out.lower;
    out.log_p0 = std::log(p0);
    out.log_s.assign(log_s.begin(), log_s.end());
    const std::size_t n = log_s.size();
    out.z.resize(n);
    out.z_pre.resize(n);
    out.g.assign(n, 0.0);
    out.d.assign(n, 0.0);
    out.log_pool.resize(n);

    const double z0 = log_s[0] - out.log_p0;
    // gamma P_0 <= S_0 <= P_0 / gamma
    if (z0 < out.lower || z0 > out.upper) {
        throw DomainError("skorokhod_reflect: initial mispricing " + std::to_string(z0) + " outside [" +
                          std::to_string(out.lower) + ", " + std::to_string(out.upper) + "]");
    }
    out.z[0] = out.z_pre[0] = z0;
    out.log_pool[0] = out.log_p0;
    for (std::size_t i = 1; i < n; ++i) {
        const double pre = out.z[i - 1] + (log_s[i] - log_s[i - 1]);
        double push_up = 0.0;
        double push_down = 0.0;
        double z = pre;
        if (pre > out.upper) {
            push_down = pre - out.upper;
            z = out.upper;
        } else if (pre < out.lower) {
            push_up = out.lower - pre;
            z = out.lower;
        }
        out.z_pre[i] = pre;
        out.z[i] = z;
        out.g[i] = out.g[i - 1] + push_up;
        out.d[i] = out.d[i - 1] + push_down;
        out.log_pool[i] = out.log_p0 + out.d[i] - out.g[i];
    }
    return out;
}

// Per-step pool reserve changes and fee accruals along a reflected path,
// integrated exactly over each step from the profile's reserve functions.
struct MyopicFlows {
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<double> dfees_x;
    std::vector<double> dfees_y;
};

inline MyopicFlows myopic_inventory_and_fees(const ReflectedPath& path, const LiquidityProfile& profile, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("myopic_inventory_and_fees: gamma must lie in (0, 1]");
    const std::size_t n = path.size();
    MyopicFlows f{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<double>(n, 0.0)};
    const double fee_factor = (1.0 - gamma) / gamma;
    double prev_price = path.pool_price(0);
    Reserves prev = quad_reserves(profile, prev_price);
    for (std::size_t i = 1; i < n; ++i) {
        if (path.dg(i) == 0.0 && path.dd(i) == 0.0) continue;
        const double price = path.pool_price(i);
        require_liquidity(profile, prev_price, price);
        const Reserves now = quad_reserves(profile, price);
        f.dx[i] = now.x - prev.x;
        f.dy[i] = now.y - prev.y;
        // G: pool buys X (fee in X); D: pool sells X for Y (fee in Y)
        if (path.dg(i) > 0.0) f.dfees_x[i] = fee_factor * std::max(f.dx[i], 0.0);
        if (path.dd(i) > 0.0) f.dfees_y[i] = fee_factor * std::max(f.dy[i], 0.0);
        prev_price = price;
        prev = now;
    }
    return f;
}

struct ArbitragePnl {
    std::vector<double> step;
    std::vector<double> cumulative;
};

// dARB = (l(P) P^{1/2} / 2) [(gamma - e^Z) dG + (e^Z - 1/gamma) dD], evaluated
// at the pre-trade pool price and the pre-trade mispricing of each step.
inline ArbitragePnl myopic_pnl(const ReflectedPath& path, const LiquidityProfile& profile, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("myopic_pnl: gamma must lie in (0, 1]");
    const std::size_t n = path.size();
    ArbitragePnl pnl{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 1; i < n; ++i) {
        const double dg = path.dg(i);
        const double dd = path.dd(i);
        if (dg != 0.0 || dd != 0.0) {
            const double price = path.pool_price(i - 1);
            const double depth = 0.5 * profile.value(price) * std::sqrt(price);
            const double ez = std::exp(path.z_pre[i]);
            pnl.step[i] = depth * ((gamma - ez) * dg + (ez - 1.0 / gamma) * dd);
        }
        pnl.cumulative[i] = pnl.cumulative[i - 1] + pnl.step[i];
    }
    return pnl;
}

}  // namespace clmm
