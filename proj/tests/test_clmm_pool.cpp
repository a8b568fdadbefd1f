#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "clmm/clmm_pool.hpp"

using namespace clmm;
using Catch::Approx;

TEST_CASE("single-position reserves", "[clmm_pool]") {
    const Position pos{10, 0.4, 2.5};
    const Reserves mid = position_reserves(pos, 1.0);
    CHECK(mid.x == Approx(3.6754447).epsilon(1e-8));
    CHECK(mid.y == Approx(3.6754447).epsilon(1e-8));
    const Reserves above = position_reserves(pos, 3.0);
    CHECK(above.x == 0.0);
    CHECK(above.y == Approx(9.4868330).epsilon(1e-8));
    const Reserves below = position_reserves(pos, 0.2);
    CHECK(below.x == Approx(9.4868330).epsilon(1e-8));
    CHECK(below.y == 0.0);
    CHECK_THROWS_AS(position_reserves(pos, 0.0), DomainError);
    CHECK_THROWS_AS(position_reserves({1, 2, 1}, 1.0), ValidationError);
}

TEST_CASE("single-position value", "[clmm_pool]") {
    const Position pos{10, 0.4, 2.5};
    CHECK(position_value(pos, 3.0) == Approx(9.4868330).epsilon(1e-8));
    CHECK(position_value(pos, 0.2) == Approx(1.8973666).epsilon(1e-8));
    const Position narrow{3, 2.0, 2.0 * (1 + 1e-3)};
    const double flat = 3 * (std::sqrt(narrow.upper) - std::sqrt(narrow.lower));
    for (double P : {2.5, 10.0, 1e4}) CHECK(position_value(narrow, P) == Approx(flat).epsilon(1e-12));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pd(0.05, 20.0);
    for (int i = 0; i < 500; ++i) {
        const double P = pd(rng);
        const Reserves r = position_reserves(pos, P);
        CHECK(position_value(pos, P) == Approx(P * r.x + r.y).margin(1e-12));
        if (P >= pos.lower && P < pos.upper) {
            const double l = pos.liquidity;
            CHECK((r.x + l / std::sqrt(pos.upper)) * (r.y + l * std::sqrt(pos.lower)) == Approx(l * l).epsilon(1e-12));
        }
    }
}

TEST_CASE("position reserves match the profile integral", "[clmm_pool]") {
    const Position pos{7, 0.8, 5.0};
    const auto profile = profile_from_positions({pos});
    for (double P : {0.3, 0.8, 1.0, 2.2, 4.99, 5.0, 9.0}) {
        const Reserves a = position_reserves(pos, P);
        const Reserves b = quad_reserves(profile, P);
        CHECK(a.x == Approx(b.x).margin(1e-13));
        CHECK(a.y == Approx(b.y).margin(1e-13));
    }
}

TEST_CASE("covered-call bound", "[clmm_pool]") {
    const Position pos{1, 0.5, 2};
    CHECK(pos.width_ratio() == Approx(2.0));
    const auto zero = covered_call_bound(pos, 0.0);
    CHECK(zero.value == 0.0);
    CHECK(zero.bound == 0.0);
    const auto at_one = covered_call_bound(pos, 1.0);
    CHECK(at_one.value == Approx(0.5857864).epsilon(1e-7));
    CHECK(at_one.bound == Approx(0.7071068).epsilon(1e-7));
    CHECK(covered_call_count(pos) == Approx(0.7071068).epsilon(1e-7));
    CHECK_THROWS_AS(covered_call_bound(pos, -1.0), DomainError);

    double previous_gap = std::numeric_limits<double>::infinity();
    for (double r : {4.0, 1.1, 1.01, 1.001}) {
        const Position p{2.0, 3.0 / r, 3.0 * r};
        double worst = 0.0;
        for (int i = 0; i <= 500; ++i) {
            const auto c = covered_call_bound(p, 0.01 * i);
            CHECK(c.value <= c.bound + 1e-12);
            worst = std::max(worst, c.bound - c.value);
        }
        CHECK(worst < previous_gap);
        previous_gap = worst;
    }
}

TEST_CASE("pool-level reserves and swaps", "[clmm_pool]") {
    const CLMMPool uniform{LiquidityProfile::constant(10), 1.0, 1.0};
    SECTION("uniform swap 1 -> 4") {
        const PoolSwap s = swap_to_price(uniform, 4.0);
        CHECK(s.delta_x == Approx(-5.0).epsilon(1e-14));
        CHECK(s.delta_y == Approx(10.0).epsilon(1e-14));
        CHECK(s.fee_x == 0.0);
        CHECK(s.fee_y == 0.0);
        CHECK(s.pool.price == 4.0);
    }
    SECTION("no-op target") {
        const PoolSwap s = swap_to_price(uniform, 1.0);
        CHECK(s.delta_x == 0.0);
        CHECK(s.delta_y == 0.0);
        CHECK(s.fee_x + s.fee_y == 0.0);
    }
    SECTION("fee on the Y side when the price rises") {
        CLMMPool pool = uniform;
        pool.gamma = 0.997;
        const PoolSwap up = swap_to_price(pool, 4.0);
        CHECK(up.fee_y == Approx(0.003 / 0.997 * 10).epsilon(1e-12));
        CHECK(up.fee_y == Approx(0.0300903).epsilon(1e-6));
        CHECK(up.fee_x == 0.0);
        const PoolSwap down = swap_to_price(up.pool, 1.0);
        CHECK(down.fee_x == Approx(0.003 / 0.997 * 5).epsilon(1e-12));
        CHECK(down.pool.fees_y == up.fee_y);
    }
    SECTION("zero-fee swaps compose") {
        const auto profile = profile_from_positions({{10, 0.5, 3}, {4, 1.5, 8}});
        const CLMMPool pool{profile, 1.0, 1.0};
        const PoolSwap one = swap_to_price(pool, 5.0);
        const PoolSwap a = swap_to_price(pool, 2.0);
        const PoolSwap b = swap_to_price(a.pool, 5.0);
        CHECK(a.delta_x + b.delta_x == Approx(one.delta_x).margin(1e-13));
        CHECK(a.delta_y + b.delta_y == Approx(one.delta_y).margin(1e-13));
    }
    SECTION("fees are additive along monotone paths") {
        const auto profile = profile_from_positions({{10, 0.5, 3}, {4, 1.5, 8}});
        const CLMMPool pool{profile, 1.0, 0.99};
        const PoolSwap one = swap_to_price(pool, 5.0);
        const PoolSwap b = swap_to_price(swap_to_price(pool, 2.0).pool, 5.0);
        CHECK(b.pool.fees_y == Approx(one.pool.fees_y).epsilon(1e-13));
    }
    SECTION("tangency and convexity") {
        const auto profile = profile_from_positions({{10, 0.5, 3}});
        const CLMMPool pool{profile, 1.3, 1.0};
        const double h = 1e-6;
        const PoolSwap s = swap_to_price(pool, pool.price * (1 + h));
        CHECK(-s.delta_y / s.delta_x == Approx(pool.price).epsilon(1e-5));
        // d^2y/dx^2 = 2 P^{3/2} / l(P) from three nearby points
        const double dp = 1e-3;
        const Reserves lo = quad_reserves(profile, pool.price - dp), mid = quad_reserves(profile, pool.price),
                       hi = quad_reserves(profile, pool.price + dp);
        const double slope_hi = (hi.y - mid.y) / (hi.x - mid.x), slope_lo = (mid.y - lo.y) / (mid.x - lo.x);
        const double curvature = (slope_hi - slope_lo) / (0.5 * (hi.x - lo.x));
        CHECK(curvature == Approx(2 * std::pow(pool.price, 1.5) / 10).epsilon(1e-3));
    }
    SECTION("crossing a gap is refused") {
        const auto profile = profile_from_positions({{10, 0.5, 1.2}, {10, 1.5, 3}});
        const CLMMPool pool{profile, 1.0, 1.0};
        CHECK_NOTHROW(swap_to_price(pool, 1.1));
        try {
            swap_to_price(pool, 2.0);
            FAIL("expected InsufficientLiquidityError");
        } catch (const InsufficientLiquidityError& e) {
            CHECK(e.gap_lo() == 1.2);
            CHECK(e.gap_hi() == 1.5);
        }
    }
}

TEST_CASE("exact-input swaps invert swap_to_price", "[clmm_pool]") {
    const auto profile = profile_from_positions({{10, 0.2, 3}, {25, 0.9, 1.4}});
    const CLMMPool pool{profile, 1.0, 0.997};
    const PoolSwap in_y = swap_exact_input(pool, Asset::y, 3.0);
    CHECK(in_y.pool.price > 1.0);
    CHECK(in_y.delta_y == Approx(0.997 * 3.0).epsilon(1e-12));
    CHECK(in_y.delta_y + in_y.fee_y == Approx(3.0).epsilon(1e-12));
    const PoolSwap in_x = swap_exact_input(pool, Asset::x, 3.0);
    CHECK(in_x.pool.price < 1.0);
    CHECK(in_x.delta_x == Approx(0.997 * 3.0).epsilon(1e-12));
    CHECK(in_x.delta_x + in_x.fee_x == Approx(3.0).epsilon(1e-12));
    CHECK(swap_exact_input(pool, Asset::x, 0.0).pool.price == 1.0);
    CHECK_THROWS_AS(swap_exact_input(pool, Asset::x, 1e6), InsufficientLiquidityError);
}

TEST_CASE("pool validation", "[clmm_pool]") {
    CHECK_THROWS_AS((CLMMPool{LiquidityProfile::constant(1), 1.0, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((CLMMPool{LiquidityProfile::constant(1), -1.0, 1.0}.validate()), DomainError);
    const CLMMPool pool{LiquidityProfile::constant(4), 9.0, 1.0};
    CHECK(pool_reserves(pool).x == Approx(4.0 / 3.0));
    CHECK(pool_reserves(pool).y == Approx(12.0));
}
