#pragma once

// The oracle suite behind `clmm_lab verify` and the acceptance binary. Each
// check reports a measured error against its tolerance; the numbering
// follows the acceptance criteria 1-12 (13, determinism, is a property of
// the CLI run as a whole).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "clmm/arb_control.hpp"
#include "clmm/cfmm_core.hpp"
#include "clmm/clmm_pool.hpp"
#include "clmm/cli_io.hpp"
#include "clmm/liquidity_measure.hpp"
#include "clmm/market_sim.hpp"
#include "clmm/myopic.hpp"
#include "clmm/random.hpp"
#include "clmm/stats.hpp"

namespace clmm::verify {

enum class Direction {
    at_most,   // pass when measured <= tolerance
    at_least,  // pass when measured >= tolerance
};

struct CheckResult {
    int criterion = 0;
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    Direction direction = Direction::at_most;
    bool passed = false;
    double seconds = 0.0;  // wall time of the group; not part of the CSV
};

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    unsigned threads = 0;
};

namespace detail {

inline CheckResult make(int criterion, std::string name, double measured, double tolerance,
                        Direction dir = Direction::at_most) {
    CheckResult r{criterion, std::move(name), measured, tolerance, dir};
    r.passed = std::isfinite(measured) &&
               (dir == Direction::at_most ? measured <= tolerance : measured >= tolerance);
    return r;
}

inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return v;
}

// The four cases of the two-position example.
inline Reserves two_position_cases(double a, double b, double c, double k1, double k2, double P) {
    using std::sqrt;
    if (P >= c) return {0.0, k1 * (sqrt(b) - sqrt(a)) + k2 * (sqrt(c) - sqrt(b))};
    if (P >= b) return {k2 * (1 / sqrt(P) - 1 / sqrt(c)), k1 * (sqrt(b) - sqrt(a)) + k2 * (sqrt(P) - sqrt(b))};
    if (P >= a) {
        return {k1 * (1 / sqrt(P) - 1 / sqrt(b)) + k2 * (1 / sqrt(b) - 1 / sqrt(c)), k1 * (sqrt(P) - sqrt(a))};
    }
    return {k1 / sqrt(a) + (k2 - k1) / sqrt(b) - k2 / sqrt(c), 0.0};
}

inline LiquidityProfile random_step_profile(random::UniformStream& u) {
    const int count = 1 + static_cast<int>(u.next() * 6);
    std::vector<Position> positions;
    for (int i = 0; i < count; ++i) {
        double lo = u.next(0.05, 20.0), hi = u.next(0.05, 20.0);
        if (lo > hi) std::swap(lo, hi);
        positions.push_back({u.next(0.0, 50.0), lo, hi});
    }
    return profile_from_positions(positions);
}

}  // namespace detail

inline std::vector<CheckResult> check_closed_form_reserves() {
    const double a = 1, b = 4, c = 9, k1 = 10, k2 = 20;
    const auto profile = profile_from_positions({{k1, a, b}, {k2, b, c}});
    double worst = 0.0;
    for (double P : {0.01, 0.5, 0.999, 1.0, 2.5, 3.999, 4.0, 6.0, 8.999, 9.0, 10.0, 1e4}) {
        const Reserves got = quad_reserves(profile, P);
        const Reserves want = detail::two_position_cases(a, b, c, k1, k2, P);
        worst = std::max({worst, std::abs(got.x - want.x), std::abs(got.y - want.y)});
    }
    const Reserves at9 = quad_reserves(profile, 9.0), at4 = quad_reserves(profile, 4.0), low = quad_reserves(profile, 0.5);
    const double examples = std::max({std::abs(at9.x), std::abs(at9.y - 30.0), std::abs(at4.x - 10.0 / 3.0),
                                      std::abs(at4.y - 10.0), std::abs(low.x - 25.0 / 3.0), std::abs(low.y)});
    return {detail::make(1, "two_position_case_formulas", worst, 1e-12),
            detail::make(1, "two_position_worked_examples", examples, 1e-12)};
}

inline std::vector<CheckResult> check_cpmm_limit() {
    const double level = 3.0;
    const auto step = LiquidityProfile::constant(level);
    const auto density = LiquidityProfile::from_density(
        {[level](double) { return level; }, 0.0, std::numeric_limits<double>::infinity()});
    double worst_step = 0.0, worst_density = 0.0;
    for (double P : detail::log_space(1e-3, 1e3, 50)) {
        const Reserves s = quad_reserves(step, P), d = quad_reserves(density, P);
        worst_step = std::max(worst_step, std::abs(s.x * s.y / (level * level) - 1.0));
        worst_density = std::max(worst_density, std::abs(d.x * d.y / (level * level) - 1.0));
    }
    return {detail::make(2, "cpmm_product_quadrature_rel", worst_density, 1e-9),
            detail::make(2, "cpmm_product_closed_form_rel", worst_step, 1e-12)};
}

inline std::vector<CheckResult> check_integration_by_parts(const VerifyOptions& opts) {
    random::UniformStream u(opts.seed, 0, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto profile = detail::random_step_profile(u);
        for (int j = 0; j < 10; ++j) {
            const double P = std::exp(u.next(std::log(0.01), std::log(50.0)));
            const Reserves direct = quad_reserves(profile, P);
            const Reserves parts = reserves_from_atoms(profile, P);
            worst = std::max({worst, std::abs(direct.x - parts.x), std::abs(direct.y - parts.y)});
        }
    }
    return {detail::make(3, "atom_representation_max_abs", worst, 1e-12)};
}

inline std::vector<CheckResult> check_riccati() {
    const ControlParams p{0.05, 0.2, 0.1, 0.4, 0.1, 1.0};
    const auto value = solve_finite(p);
    const auto grid = riccati_oracle(p, 1e-4);
    double d2 = 0, d1 = 0, d0 = 0;
    for (std::size_t i = 0; i < grid.t.size(); i += 10) {
        const double t = grid.t[i];
        d2 = std::max(d2, std::abs(value.h2(t) - grid.h2[i]));
        d1 = std::max(d1, std::abs(value.h1(t) - grid.h1[i]));
        d0 = std::max(d0, std::abs(value.h0(t) - grid.h0[i]));
    }
    const double terminal = std::abs(value.h2(1.0)) + std::abs(value.h1(1.0)) + std::abs(value.h0(1.0));

    ControlParams unit = p;
    unit.lambda = unit.tau = 1.0;
    const auto flat = solve_finite(unit);
    const auto flat_grid = riccati_oracle(unit, 1e-3);
    double singular = 0.0;
    for (std::size_t i = 0; i < flat_grid.t.size(); ++i) {
        const double t = flat_grid.t[i];
        singular = std::max({singular, std::abs(flat.h2(t)), std::abs(flat.h1(t)), std::abs(flat.h0(t)),
                             std::abs(flat_grid.h2[i]), std::abs(flat_grid.h1[i]), std::abs(flat_grid.h0[i])});
    }
    return {detail::make(4, "riccati_max_dev_h2", d2, 1e-6), detail::make(4, "riccati_max_dev_h1", d1, 1e-6),
            detail::make(4, "riccati_max_dev_h0", d0, 1e-6), detail::make(4, "finite_terminal_values", terminal, 0.0),
            detail::make(4, "singular_lambda_tau_one", singular, 0.0)};
}

inline std::vector<CheckResult> check_discounted() {
    const ControlParams p{0.0, 0.2, 0.1, 0.4, 0.1, 1.0};
    const auto sol = solve_discounted(p);
    const auto zs = uniform_grid(-1.0, 1.0, 0.01);
    ControlParams drift = p;
    drift.mu = 0.05;
    const auto with_drift = solve_discounted(drift);
    return {detail::make(5, "discounted_hjb_residual", hjb_residual_discounted(sol.value, p, zs), 1e-10),
            detail::make(5, "discounted_hjb_residual_drift", hjb_residual_discounted(with_drift.value, drift, zs), 1e-10),
            detail::make(5, "discounted_h2_quadratic", std::abs(sol.quadratic_residual(sol.value.h2, p.tau)), 1e-12),
            detail::make(5, "discounted_h2_value", std::abs(sol.value.h2 - 0.7813373), 5e-8)};
}

inline std::vector<CheckResult> check_regimes() {
    ControlParams p{0.05, 0.2, 0.1, 0.4, 1e-10, 50.0};
    const double ergodic = solve_ergodic(p).relative_value.h2;
    const double discounted = solve_discounted(p).value.h2;
    const double finite = solve_finite(p).h2(0.0);
    return {detail::make(6, "ergodic_vs_discounted_rho_to_zero", std::abs(ergodic - discounted), 1e-6),
            detail::make(6, "ergodic_vs_finite_T50", std::abs(ergodic - finite), 1e-6)};
}

inline std::vector<CheckResult> check_ergodic_constant(const VerifyOptions& opts) {
    const ControlParams p{0.0, 0.2, 0.1, 0.4, 0.0, 2000.0};
    const auto erg = solve_ergodic(p);
    const PathConfig cfg{0.0, p.sigma, 0.01, 2000.0, opts.seed, 64};
    ControlledSimOptions sim;
    sim.threads = opts.threads;
    const auto run = simulate_controlled(p, FeedbackLaw::stationary(erg.relative_value), cfg, sim);
    const auto& s = run.average_reward_summary;
    return {detail::make(7, "mc_distance_to_eta_hjb_in_se", std::abs(s.mean - erg.eta_hjb) / s.std_err, 3.0),
            detail::make(7, "mc_distance_to_eta_alternative_in_se", std::abs(s.mean - erg.eta_alternative) / s.std_err, 5.0,
                         Direction::at_least),
            detail::make(7, "alternative_gap_in_se", (erg.eta_alternative - erg.eta_hjb) / s.std_err, 5.0, Direction::at_least)};
}

inline std::vector<CheckResult> check_rho_limit() {
    const ControlParams p{0.0, 0.2, 0.1, 0.4, 0.1, 1.0};
    const std::vector<double> rhos{1e-1, 1e-2, 1e-3};
    const auto table = rho_limit_check(p, rhos);
    double monotone_violation = 0.0;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        monotone_violation = std::max(monotone_violation, table.rows[i].gap_hjb - table.rows[i - 1].gap_hjb);
        // the sequence must also approach from one side
        const double step = table.rows[i].rho_value - table.rows[i - 1].rho_value;
        const double toward = table.eta_hjb - table.rows[i - 1].rho_value;
        if (step * toward < 0) monotone_violation = std::max(monotone_violation, std::abs(step));
    }
    return {detail::make(8, "rho_limit_monotone_violation", monotone_violation, 0.0),
            detail::make(8, "rho_limit_final_gap", table.rows.back().gap_hjb, 1e-3)};
}

inline std::vector<CheckResult> check_reflection(const VerifyOptions& opts) {
    const double gamma = std::exp(-0.01);
    const PathConfig cfg{0.0, 0.2, 1e-3, 1.0, opts.seed, 100};
    const auto paths = simulate_gbm(cfg);
    double worst_band = 0, worst_identity = 0;
    double violations = 0;
    for (const auto& log_s : paths) {
        const auto r = skorokhod_reflect(log_s, gamma, 1.0);
        for (std::size_t n = 0; n < r.size(); ++n) {
            worst_band = std::max({worst_band, r.z[n] - r.upper, r.lower - r.z[n]});
            worst_identity = std::max(worst_identity, std::abs(r.z[n] - (r.log_s[n] - r.log_p0 + r.g[n] - r.d[n])));
            if (r.dg(n) < 0 || r.dd(n) < 0) ++violations;
            if (r.dg(n) > 0 && r.z[n] != r.lower) ++violations;
            if (r.dd(n) > 0 && r.z[n] != r.upper) ++violations;
        }
    }
    const std::vector<double> hand{0.0, 0.02, 0.015, -0.015};
    const auto h = skorokhod_reflect(hand, gamma, 1.0);
    const double want_z[] = {0.0, 0.01, 0.005, -0.01}, want_dd[] = {0, 0.01, 0, 0}, want_dg[] = {0, 0, 0, 0.015};
    double hand_err = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
        hand_err = std::max({hand_err, std::abs(h.z[n] - want_z[n]), std::abs(h.dd(n) - want_dd[n]),
                             std::abs(h.dg(n) - want_dg[n])});
    }
    return {detail::make(9, "band_excursion", std::max(worst_band, 0.0), 0.0),
            detail::make(9, "decomposition_identity", worst_identity, 1e-12),
            detail::make(9, "regulator_violations", violations, 0.0),
            detail::make(9, "hand_example_max_abs", hand_err, 1e-15)};
}

// Fine path at dt/4; the coarse path is every fourth point of it.
inline std::vector<CheckResult> check_myopic_vanishing(const VerifyOptions& opts) {
    const double gamma = std::exp(-0.01);
    const std::size_t coarse_steps = 250;
    const PathConfig fine_cfg{0.0, 0.2, 1.0 / (4 * coarse_steps), 1.0, opts.seed, 100};
    const auto paths = simulate_gbm(fine_cfg);
    const auto uniform = LiquidityProfile::constant(1.0);
    std::vector<int> shrank(paths.size(), 0);
    parallel_for(
        paths.size(),
        [&](std::size_t i) {
            std::vector<double> coarse;
            for (std::size_t n = 0; n < paths[i].size(); n += 4) coarse.push_back(paths[i][n]);
            const double fine = std::abs(myopic_pnl(skorokhod_reflect(paths[i], gamma, 1.0), uniform, gamma).cumulative.back());
            const double rough = std::abs(myopic_pnl(skorokhod_reflect(coarse, gamma, 1.0), uniform, gamma).cumulative.back());
            shrank[i] = fine < rough ? 1 : 0;
        },
        opts.threads);
    double fraction = 0.0;
    for (int s : shrank) fraction += s;
    fraction /= static_cast<double>(paths.size());
    return {detail::make(10, "arb_shrinks_on_quartered_dt_fraction", fraction, 0.8, Direction::at_least)};
}

inline std::vector<CheckResult> check_lvr(const VerifyOptions& opts) {
    std::vector<CheckResult> out;
    {
        const PathConfig cfg{0.0, 0.2, 1e-3, 1.0, opts.seed, 20};
        const auto uniform = LiquidityProfile::constant(10.0);
        const G3MCurve cpmm{0.5, 10.0};
        double worst = 0.0;
        for (const auto& log_s : simulate_gbm(cfg)) {
            std::vector<double> prices(log_s.size());
            for (std::size_t i = 0; i < prices.size(); ++i) prices[i] = std::exp(log_s[i]);
            const auto a = accumulate_lvr(uniform, prices);
            const auto b = accumulate_lvr(cpmm, prices);
            for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        }
        out.push_back(detail::make(11, "uniform_clmm_vs_g3m_lvr", worst, 1e-12));
    }
    const auto profile = profile_from_positions({{1.0, 0.01, 100.0}, {5.0, 0.8, 1.25}});
    {
        const PathConfig cfg{PathConfig::martingale_drift(0.2), 0.2, 1e-2, 1.0, opts.seed + 1, 50};
        double worst = 0.0;
        for (const auto& log_s : simulate_gbm(cfg)) {
            for (const auto pricing : {PoolPricing::frictionless, PoolPricing::myopic}) {
                const auto ledger = ledger_for_path(CLMMPool{profile, 1.0, 0.997}, log_s, cfg.dt, pricing);
                for (const auto& r : ledger.rows) {
                    worst = std::max({worst, std::abs(r.il - (r.hold - r.value)), std::abs(r.lvr - (r.rebalance - r.value))});
                }
            }
        }
        out.push_back(detail::make(11, "ledger_identities", worst, 1e-10));
    }
    {
        const PathConfig cfg{PathConfig::martingale_drift(0.2), 0.2, 1e-2, 1.0, opts.seed + 2, 10000};
        const auto paths = simulate_gbm(cfg);
        std::vector<double> il(paths.size());
        const CLMMPool pool{profile, 1.0, 1.0};
        parallel_for(
            paths.size(),
            [&](std::size_t i) { il[i] = ledger_for_path(pool, paths[i], cfg.dt, PoolPricing::frictionless).final().il; },
            opts.threads);
        const auto s = summarize(il);
        // E[IL_T] >= 0: the mean may sit at most 3 standard errors below zero
        out.push_back(detail::make(11, "expected_il_in_se", s.mean / s.std_err, -3.0, Direction::at_least));
    }
    return out;
}

inline std::vector<CheckResult> check_covered_call() {
    std::vector<CheckResult> out;
    for (double r : {4.0, 1.1, 1.01}) {
        const Position pos{1.0, 1.0 / r, r};  // p_m = 1, width ratio sqrt(p_u / p_l) = r
        double excess = -std::numeric_limits<double>::infinity(), gap = 0.0;
        for (int i = 0; i <= 500; ++i) {
            const auto c = covered_call_bound(pos, 0.01 * i);
            excess = std::max(excess, c.value - c.bound);
            gap = std::max(gap, c.bound - c.value);
        }
        const std::string tag = io::format_number(r);
        out.push_back(detail::make(12, "value_minus_bound_r" + tag, std::max(excess, 0.0), 1e-12));
        if (r == 1.01) out.push_back(detail::make(12, "sup_gap_over_slope_r" + tag, gap / covered_call_count(pos), 0.01));
    }
    return out;
}

struct Group {
    int criterion;
    std::function<std::vector<CheckResult>(const VerifyOptions&)> run;
};

inline std::vector<Group> groups() {
    return {
        {1, [](const VerifyOptions&) { return check_closed_form_reserves(); }},
        {2, [](const VerifyOptions&) { return check_cpmm_limit(); }},
        {3, check_integration_by_parts},
        {4, [](const VerifyOptions&) { return check_riccati(); }},
        {5, [](const VerifyOptions&) { return check_discounted(); }},
        {6, [](const VerifyOptions&) { return check_regimes(); }},
        {7, check_ergodic_constant},
        {8, [](const VerifyOptions&) { return check_rho_limit(); }},
        {9, check_reflection},
        {10, check_myopic_vanishing},
        {11, check_lvr},
        {12, [](const VerifyOptions&) { return check_covered_call(); }},
    };
}

// Runs every group; a group that throws is recorded as a single failed check.
inline std::vector<CheckResult> run_verification(const VerifyOptions& opts = {}) {
    std::vector<CheckResult> all;
    for (const auto& g : groups()) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<CheckResult> results;
        try {
            results = g.run(opts);
        } catch (const std::exception& e) {
            results = {detail::make(g.criterion, std::string("exception: ") + e.what(),
                                    std::numeric_limits<double>::quiet_NaN(), 0.0)};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& r : results) {
            r.seconds = secs;
            all.push_back(std::move(r));
        }
    }
    return all;
}

// criterion,check,passed,measured,tolerance,direction
inline io::CsvTable verification_table(const std::vector<CheckResult>& results) {
    io::CsvTable table({"criterion", "check", "passed", "measured", "tolerance", "direction"});
    for (const auto& r : results) {
        table.add_row({static_cast<std::int64_t>(r.criterion), r.name, std::string(r.passed ? "pass" : "fail"), r.measured,
                       r.tolerance, std::string(r.direction == Direction::at_most ? "<=" : ">=")});
    }
    return table;
}

}  // namespace clmm::verify
