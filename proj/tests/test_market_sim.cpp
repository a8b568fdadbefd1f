#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "clmm/market_sim.hpp"
#include "clmm/stats.hpp"

using namespace clmm;
using Catch::Approx;

namespace {

std::vector<double> exp_path(const std::vector<double>& log_s) {
    std::vector<double> out(log_s.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_s[i]);
    return out;
}

void check_ledger_identities(const SimLedger& ledger) {
    for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
        const auto& r = ledger.rows[i];
        CHECK(r.il == Approx(r.hold - r.value).margin(1e-10));
        CHECK(r.lvr == Approx(r.rebalance - r.value).margin(1e-10));
        if (i > 0) {
            CHECK(r.lvr >= ledger.rows[i - 1].lvr - 1e-10);
            CHECK(r.fees_x >= ledger.rows[i - 1].fees_x);
            CHECK(r.fees_y >= ledger.rows[i - 1].fees_y);
        }
    }
}

}  // namespace

TEST_CASE("GBM paths", "[market_sim]") {
    SECTION("zero volatility is deterministic drift") {
        const PathConfig cfg{0.3, 0.0, 0.01, 1.0, 7, 1, 0.5};
        const auto path = gbm_log_path(cfg, 0);
        REQUIRE(path.size() == 101);
        for (std::size_t n = 0; n < path.size(); ++n) CHECK(path[n] == Approx(0.5 + 0.3 * n * 0.01).margin(1e-14));
    }
    SECTION("fixed seed gives bitwise-identical paths regardless of threading") {
        const PathConfig cfg{0.0, 0.2, 0.01, 1.0, 99, 16};
        const auto a = simulate_gbm(cfg);
        const auto b = simulate_gbm(cfg);
        CHECK(a == b);
        CHECK(a[3] == gbm_log_path(cfg, 3));
        CHECK(a[3] != a[4]);
    }
    SECTION("terminal log-price mean") {
        const PathConfig cfg{0.0, 0.2, 0.25, 1.0, 2024, 100000};
        const auto paths = simulate_gbm(cfg);
        std::vector<double> terminal(paths.size());
        for (std::size_t i = 0; i < paths.size(); ++i) terminal[i] = paths[i].back();
        const auto s = summarize(terminal);
        CHECK(std::abs(s.mean) < 4 * 0.2 / std::sqrt(1e5));
        CHECK(s.std_dev == Approx(0.2).epsilon(0.01));
    }
    SECTION("invalid configs") {
        CHECK_THROWS_AS((PathConfig{0, 0.2, 0.0}.validate()), ValidationError);
        CHECK_THROWS_AS((PathConfig{0, -0.2, 0.1}.validate()), ValidationError);
        CHECK_THROWS_AS((PathConfig{0, 0.2, 0.1, 0.05}.validate()), ValidationError);
        CHECK_THROWS_AS((PathConfig{0, 0.2, 0.1, 1, 1, 0}.validate()), ValidationError);
    }
}

TEST_CASE("LVR accumulators", "[market_sim]") {
    const PathConfig cfg{-0.02, 0.2, 1e-3, 1.0, 5, 1};
    const auto prices = exp_path(gbm_log_path(cfg, 0));
    const auto uniform = LiquidityProfile::constant(10);
    const auto clmm_lvr = accumulate_lvr(uniform, prices);
    const auto g3m_lvr = accumulate_lvr(G3MCurve{0.5, 10}, prices);
    for (std::size_t i = 0; i < prices.size(); ++i) CHECK(clmm_lvr[i] == Approx(g3m_lvr[i]).epsilon(1e-12).margin(1e-15));

    const std::vector<double> flat(50, 3.0);
    for (double v : accumulate_lvr(uniform, flat)) CHECK(v == 0.0);

    const auto doubled = accumulate_lvr(uniform.scaled(2.0), prices);
    for (std::size_t i = 0; i < prices.size(); ++i) CHECK(doubled[i] == Approx(2 * clmm_lvr[i]).epsilon(1e-14).margin(1e-300));
}

TEST_CASE("ledger identities", "[market_sim]") {
    SECTION("flat path") {
        const std::vector<double> log_s(20, std::log(2.0));
        const auto ledger = ledger_for_path(G3MCurve{0.5, 10}, log_s, 0.01);
        for (const auto& r : ledger.rows) {
            CHECK(r.hold == Approx(r.value));
            CHECK(r.rebalance == Approx(r.value));
            CHECK(r.il == Approx(0.0).margin(1e-13));
            CHECK(r.lvr == Approx(0.0).margin(1e-13));
        }
    }
    SECTION("one-step move decomposes into hedgeable part plus LVR") {
        const std::vector<double> log_s{0.0, std::log(4.0)};
        const auto ledger = ledger_for_path(G3MCurve{0.5, 10}, log_s, 1.0);
        const auto& end = ledger.final();
        CHECK(end.il == Approx(10.0).epsilon(1e-14));
        CHECK(end.lvr == Approx(10.0).epsilon(1e-14));
        CHECK(end.il == Approx(ledger.hedgeable_part().back() + end.lvr).margin(1e-12));
    }
    SECTION("random paths over several pool types") {
        const PathConfig cfg{-0.02, 0.2, 1e-2, 1.0, 77, 10};
        const auto paths = simulate_gbm(cfg);
        const auto profile = profile_from_positions({{10, 0.2, 5}, {30, 0.8, 1.25}});
        for (const auto& log_s : paths) {
            const auto g = ledger_for_path(G3MCurve{0.3, 4}, log_s, cfg.dt);
            check_ledger_identities(g);
            const auto c = ledger_for_path(CLMMPool{profile, 1.0, 0.997}, log_s, cfg.dt, PoolPricing::frictionless);
            check_ledger_identities(c);
            for (std::size_t i = 0; i < log_s.size(); ++i) {
                CHECK(c.rows[i].il == Approx(c.hedgeable_part()[i] + c.rows[i].lvr).margin(1e-10));
            }
            const auto m = ledger_for_path(CLMMPool{profile, 1.0, 0.997}, log_s, cfg.dt, PoolPricing::myopic);
            check_ledger_identities(m);
        }
    }
    SECTION("LVR is unchanged by shifting time stamps") {
        const PathConfig cfg{0.0, 0.2, 1e-2, 1.0, 8, 1};
        const auto log_s = gbm_log_path(cfg, 0);
        const auto a = ledger_for_path(G3MCurve{0.5, 10}, log_s, 0.01);
        const auto b = ledger_for_path(G3MCurve{0.5, 10}, log_s, 0.5);
        CHECK(a.final().lvr == b.final().lvr);
    }
    SECTION("frictionless pool must start at S0") {
        const std::vector<double> log_s{0.0, 0.1};
        CHECK_THROWS_AS(ledger_for_path(CLMMPool{LiquidityProfile::constant(1), 2.0, 1.0}, log_s, 1.0, PoolPricing::frictionless),
                        DomainError);
    }
    SECTION("crossing into a gap is reported") {
        const std::vector<double> log_s{0.0, std::log(3.0)};
        const CLMMPool pool{profile_from_positions({{10, 0.5, 2}}), 1.0, 1.0};
        CHECK_THROWS_AS(ledger_for_path(pool, log_s, 1.0, PoolPricing::frictionless), InsufficientLiquidityError);
    }
}

TEST_CASE("expected impermanent loss is nonnegative under martingale prices", "[market_sim]") {
    PathConfig cfg{PathConfig::martingale_drift(0.2), 0.2, 0.01, 1.0, 31, 4000};
    const auto paths = simulate_gbm(cfg);
    std::vector<double> il(paths.size());
    const G3MCurve cpmm{0.5, 1.0};
    parallel_for(paths.size(), [&](std::size_t i) { il[i] = ledger_for_path(cpmm, paths[i], cfg.dt).final().il; });
    const auto s = summarize(il);
    CHECK(s.mean + 3 * s.std_err >= 0.0);
    CHECK(s.mean > 0.0);
}

TEST_CASE("discrete LVR converges at the square-root rate", "[market_sim]") {
    // Fine path at dt = 1/4096, coarsened by subsampling so every level sees
    // the same Brownian path.
    const int fine_steps = 4096;
    const PathConfig cfg{0.0, 0.2, 1.0 / fine_steps, 1.0, 12, 400};
    const auto paths = simulate_gbm(cfg);
    const auto uniform = LiquidityProfile::constant(1.0);
    const std::vector<int> strides{16, 8, 4, 2, 1};
    std::vector<double> mean_change(strides.size() - 1, 0.0);
    for (const auto& log_s : paths) {
        std::vector<double> terminal;
        for (int stride : strides) {
            std::vector<double> prices;
            for (int n = 0; n <= fine_steps; n += stride) prices.push_back(std::exp(log_s[n]));
            terminal.push_back(accumulate_lvr(uniform, prices).back());
        }
        for (std::size_t k = 0; k + 1 < terminal.size(); ++k) mean_change[k] += std::abs(terminal[k + 1] - terminal[k]);
    }
    // least-squares slope of log(change) on log(dt)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(mean_change.size());
    for (std::size_t k = 0; k < mean_change.size(); ++k) {
        const double x = std::log(strides[k] / double(fine_steps));
        const double y = std::log(mean_change[k] / paths.size());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope >= 0.3);
    CHECK(slope <= 0.7);
}

TEST_CASE("liquidity schedules report the adjustment separately", "[market_sim]") {
    const std::vector<double> log_s{0.0, 0.1, 0.05, -0.02};
    const auto base = profile_from_positions({{10, 0.5, 2}});
    const std::vector<LiquidityProfile> schedule{base, base, base.scaled(2.0), base.scaled(2.0)};
    const auto ledger = ledger_for_schedule(schedule, log_s, 1.0);
    const double p = std::exp(0.1);
    const Reserves r = quad_reserves(base, p);
    CHECK(ledger.rows[1].liquidity_adjustment == Approx(p * r.x + r.y).epsilon(1e-13));
    CHECK(ledger.rows[0].liquidity_adjustment == 0.0);
    CHECK(ledger.rows[3].liquidity_adjustment == ledger.rows[1].liquidity_adjustment);
    for (const auto& row : ledger.rows) CHECK(row.il == Approx(row.hold - row.value).margin(1e-12));
    CHECK_THROWS_AS(ledger_for_schedule(std::span<const LiquidityProfile>(schedule).first(2), log_s, 1.0), ValidationError);
}

TEST_CASE("order-flow step", "[market_sim]") {
    const CLMMPool pool{LiquidityProfile::constant(10), 1.0, 0.997};
    const CLMMPool balanced = order_flow_step(pool, 2.0, 2.0, 0.01);
    CHECK(balanced.price == 1.0);
    CHECK(balanced.fees_x > 0.0);
    CHECK(balanced.fees_y > 0.0);
    const CLMMPool pushed = order_flow_step(pool, 1.0, 0.0, 0.01);
    CHECK(pushed.price - 1.0 == Approx(-0.002).epsilon(1e-12));
    const CLMMPool no_fee = order_flow_step({LiquidityProfile::constant(10), 1.0, 1.0}, 3.0, 1.0, 0.01);
    CHECK(no_fee.fees_x == 0.0);
    CHECK(no_fee.fees_y == 0.0);
    CHECK_THROWS_AS(order_flow_step({profile_from_positions({{1, 2, 3}}), 1.0, 1.0}, 1.0, 0.0, 0.01),
                    InsufficientLiquidityError);
}
