// Two overlapping LP ranges; walk the price up and down and watch reserves and fees.

#include <cstdio>

#include "clmm/clmm_pool.hpp"

using namespace clmm;

int main() {
    const auto profile = profile_from_positions({{100.0, 0.8, 1.25}, {40.0, 0.5, 2.0}});
    CLMMPool pool{profile, 1.0, 0.997};
    const auto start = pool_reserves(pool);
    std::printf("%-8s %12s %12s %12s %12s\n", "price", "x", "y", "fees_x", "fees_y");
    std::printf("%-8.4f %12.6f %12.6f %12.6f %12.6f\n", pool.price, start.x, start.y, pool.fees_x, pool.fees_y);
    for (double target : {1.1, 1.5, 1.9, 1.2, 0.9, 0.6, 1.0}) {
        const auto swap = swap_to_price(pool, target);
        pool = swap.pool;
        const auto r = pool_reserves(pool);
        std::printf("%-8.4f %12.6f %12.6f %12.6f %12.6f\n", pool.price, r.x, r.y, pool.fees_x, pool.fees_y);
    }
    // Round trip: reserves return, fees stay with the LPs.
    const auto end = pool_reserves(pool);
    std::printf("round-trip reserve drift: x %.3g, y %.3g\n", end.x - start.x, end.y - start.y);
    return 0;
}
