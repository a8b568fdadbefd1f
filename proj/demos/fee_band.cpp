// Fee tier vs. arbitrage: mean LP fee income and arbitrageur profit per unit
// time for a uniform pool under GBM, with the pool price reflected in the
// no-arbitrage band.

#include <cmath>
#include <cstdio>
#include <vector>

#include "clmm/market_sim.hpp"
#include "clmm/myopic.hpp"
#include "clmm/parallel.hpp"
#include "clmm/stats.hpp"

using namespace clmm;

int main() {
    const auto profile = LiquidityProfile::constant(1000.0);
    const PathConfig cfg{0.0, 0.5, 1.0 / 8760.0, 30.0 / 365.0, 7, 200};
    const auto paths = simulate_gbm(cfg);
    std::printf("%-10s %14s %14s\n", "fee", "fees/yr", "arb/yr");
    for (double fee : {0.0005, 0.003, 0.01, 0.03}) {
        const double gamma = 1.0 - fee;
        std::vector<double> fees(paths.size()), arb(paths.size());
        parallel_for(paths.size(), [&](std::size_t i) {
            const auto r = skorokhod_reflect(paths[i], gamma, std::exp(paths[i][0]));
            const auto flows = myopic_inventory_and_fees(r, profile, gamma);
            double value = 0.0;
            for (std::size_t n = 0; n < r.size(); ++n) {
                value += flows.dfees_x[n] * r.pool_price(n) + flows.dfees_y[n];
            }
            fees[i] = value / cfg.horizon;
            arb[i] = myopic_pnl(r, profile, gamma).cumulative.back() / cfg.horizon;
        });
        std::printf("%-10.4f %14.4f %14.4f\n", fee, summarize(fees).mean, summarize(arb).mean);
    }
    return 0;
}
