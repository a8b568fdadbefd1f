#pragma once

// Command-line front end: clmm_lab <global options> <command> <options>.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clmm/arb_control.hpp"
#include "clmm/cli_io.hpp"
#include "clmm/clmm_pool.hpp"
#include "clmm/errors.hpp"
#include "clmm/liquidity_measure.hpp"
#include "clmm/market_sim.hpp"
#include "clmm/myopic.hpp"
#include "clmm/stats.hpp"
#include "clmm/verify.hpp"

namespace clmm::app {

namespace fs = std::filesystem;
using io::CsvTable;
using io::Series;

inline constexpr const char* kOutputEnv = "CLMM_LAB_OUTPUT_DIR";

// Config files may be TOML/INI (CLI11's own reader) or JSON objects whose
// nested objects name subcommands: {"arb": {"ergodic": {"lambda": 0.1}}}.
class JsonOrTomlConfig : public CLI::ConfigTOML {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::stringstream buf;
        buf << input.rdbuf();
        const std::string text = buf.str();
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{') {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
                throw CLI::FileError("config file is not valid JSON: " + std::string(e.what()));
            }
            std::vector<CLI::ConfigItem> items;
            flatten(doc, {}, items);
            return items;
        }
        std::istringstream toml(text);
        return CLI::ConfigTOML::from_config(toml);
    }

private:
    static void flatten(const nlohmann::json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
        if (!j.is_object()) throw CLI::FileError("JSON config values must be nested in objects");
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto next = parents;
                next.push_back(key);
                flatten(value, next, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            auto scalar = [&](const nlohmann::json& v) -> std::string {
                if (v.is_string()) return v.get<std::string>();
                if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
                if (v.is_number()) return v.dump();
                throw CLI::FileError("unsupported JSON value for '" + key + "'");
            };
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            out.push_back(std::move(item));
        }
    }
};

struct GlobalOptions {
    std::string out_dir = "clmm_out";
    bool svg = false;
    std::uint64_t seed = 42;
    unsigned threads = 0;
};

// Which liquidity profile a command works on.
struct ProfileSpec {
    std::vector<std::string> positions;  // "liquidity:lower:upper"
    std::string ticks_file;
    double uniform = 1.0;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--position", positions, "LP position liquidity:lower:upper (repeatable)");
        cmd->add_option("--ticks", ticks_file, "tick snapshot JSON {\"base\": b, \"ticks\": [[tick, liquidity], ...]}")
            ->check(CLI::ExistingFile);
        cmd->add_option("--uniform", uniform, "uniform liquidity level when no positions or ticks are given")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
    }

    LiquidityProfile build() const {
        if (!ticks_file.empty() && !positions.empty()) throw ValidationError("use either --position or --ticks, not both");
        if (!ticks_file.empty()) return io::ingest_ticks_file(ticks_file);
        if (positions.empty()) return LiquidityProfile::constant(uniform);
        std::vector<Position> list;
        for (const auto& text : positions) list.push_back(parse_position(text));
        return profile_from_positions(list);
    }

    static Position parse_position(const std::string& text) {
        double v[3];
        std::size_t start = 0;
        for (int i = 0; i < 3; ++i) {
            const std::size_t end = i < 2 ? text.find(':', start) : text.size();
            if (end == std::string::npos) throw ValidationError("position '" + text + "': expected liquidity:lower:upper");
            const char* first = text.data() + start;
            const char* last = text.data() + end;
            const auto res = std::from_chars(first, last, v[i]);
            if (res.ec != std::errc{} || res.ptr != last) {
                throw ValidationError("position '" + text + "': '" + std::string(first, last) + "' is not a number");
            }
            start = end + 1;
        }
        Position p{v[0], v[1], v[2]};
        p.validate();
        return p;
    }
};

struct ControlOptions {
    ControlParams params;
    void add_options(CLI::App* cmd, bool horizon, bool rho) {
        cmd->add_option("--mu", params.mu, "mispricing drift")->capture_default_str();
        cmd->add_option("--sigma", params.sigma, "mispricing volatility")->capture_default_str();
        cmd->add_option("--lambda", params.lambda, "control penalty weight")->capture_default_str();
        cmd->add_option("--tau", params.tau, "mispricing penalty weight")->capture_default_str();
        if (horizon) cmd->add_option("--horizon", params.horizon, "horizon T")->capture_default_str();
        if (rho) cmd->add_option("--rho", params.rho, "discount rate")->capture_default_str();
    }
};

namespace detail {

inline void emit_svg(const GlobalOptions& g, const std::string& file, const std::string& title, const std::string& x_label,
                     const std::vector<double>& x, const std::vector<Series>& series) {
    if (!g.svg) return;
    try {
        io::write_text(fs::path(g.out_dir) / file, io::svg_line_chart(title, x_label, x, series));
    } catch (const std::exception& e) {
        std::cerr << "warning: plot " << file << " not written: " << e.what() << "\n";
    }
}

inline void write_csv(const GlobalOptions& g, const std::string& file, const CsvTable& table, std::ostream& log) {
    const fs::path path = fs::path(g.out_dir) / file;
    table.write(path);
    log << "wrote " << path.string() << " (" << table.size() << " rows)\n";
}

inline std::vector<double> column(const std::vector<LedgerRow>& rows, double LedgerRow::*field) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.*field);
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------- commands

struct PoolCommand {
    ProfileSpec profile;
    double pmin = 0.25, pmax = 4.0;
    std::size_t points = 201;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("pool", "reserve curves x(P), y(P) over a log-spaced price grid");
        profile.add_options(cmd);
        cmd->add_option("--pmin", pmin, "lowest price")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--pmax", pmax, "highest price")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--points", points, "grid size")->capture_default_str()->check(CLI::Range(2, 1000000));
        cmd->footer("pool.csv columns: price,liquidity,x,y,value");
    }

    void run(const GlobalOptions& g, std::ostream& log) const {
        if (!(pmax > pmin)) throw ValidationError("--pmax must exceed --pmin");
        const auto prof = profile.build();
        CsvTable table({"price", "liquidity", "x", "y", "value"});
        std::vector<double> ps, xs, ys;
        for (std::size_t i = 0; i < points; ++i) {
            const double P = std::exp(std::log(pmin) + (std::log(pmax) - std::log(pmin)) * static_cast<double>(i) /
                                                           static_cast<double>(points - 1));
            const Reserves r = quad_reserves(prof, P);
            table.add_row({P, prof.value(P), r.x, r.y, P * r.x + r.y});
            ps.push_back(P);
            xs.push_back(r.x);
            ys.push_back(r.y);
        }
        detail::write_csv(g, "pool.csv", table, log);
        detail::emit_svg(g, "pool.svg", "Pool reserves", "price", ps, {{"x(P)", xs}, {"y(P)", ys}});
    }
};

struct PositionCommand {
    Position pos{1.0, 0.5, 2.0};
    double kmax = 5.0, kstep = 0.01;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("position", "single-position reserves, value and covered-call bound");
        cmd->add_option("--liquidity", pos.liquidity, "position liquidity")->capture_default_str();
        cmd->add_option("--lower", pos.lower, "lower price")->capture_default_str();
        cmd->add_option("--upper", pos.upper, "upper price")->capture_default_str();
        cmd->add_option("--kmax", kmax, "largest price ratio k = P / p_m")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--kstep", kstep, "k grid step")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->footer("position.csv columns: k,price,x,y,value,bound");
    }

    void run(const GlobalOptions& g, std::ostream& log) const {
        pos.validate();
        CsvTable table({"k", "price", "x", "y", "value", "bound"});
        std::vector<double> ks, values, bounds;
        const auto n = static_cast<std::size_t>(std::floor(kmax / kstep + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) {
            const double k = static_cast<double>(i) * kstep;
            const double P = k * pos.mid_price();
            const auto cc = covered_call_bound(pos, k);
            const Reserves r = k > 0 ? position_reserves(pos, P) : position_reserves(pos, pos.lower * 0.5);
            table.add_row({k, P, r.x, k > 0 ? r.y : 0.0, cc.value, cc.bound});
            ks.push_back(k);
            values.push_back(cc.value);
            bounds.push_back(cc.bound);
        }
        detail::write_csv(g, "position.csv", table, log);
        detail::emit_svg(g, "position.svg", "Position value vs covered-call bound", "k", ks,
                         {{"value", values}, {"bound", bounds}});
    }
};

struct SimCommand {
    ProfileSpec profile;
    PathConfig path{PathConfig::martingale_drift(0.2), 0.2, 0.01, 1.0, 42, 1000};
    bool mu_given = false;
    double gamma = 1.0;
    std::string pricing = "frictionless";

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("sim", "IL / LVR Monte Carlo under GBM prices");
        profile.add_options(cmd);
        cmd->add_option("--mu", path.mu, "drift of ln S (default: martingale, -sigma^2/2)");
        cmd->add_option("--sigma", path.sigma, "volatility")->capture_default_str();
        cmd->add_option("--dt", path.dt, "time step")->capture_default_str();
        cmd->add_option("--horizon", path.horizon, "horizon")->capture_default_str();
        cmd->add_option("--paths", path.paths, "number of paths")->capture_default_str();
        cmd->add_option("--gamma", gamma, "fee retention in (0, 1]")->capture_default_str();
        cmd->add_option("--pricing", pricing, "pool price: frictionless (tracks S) or myopic (fee band)")
            ->capture_default_str()
            ->check(CLI::IsMember({"frictionless", "myopic"}));
        cmd->footer(
            "sim_paths.csv columns: path,final_price,il,lvr,hedgeable,fees_x,fees_y\n"
            "sim_summary.csv columns: metric,mean,std_dev,std_err,count\n"
            "sim_path0.csv columns: t,s,p,x,y,hold,value,rebalance,il,lvr,fees_x,fees_y,g,d");
        cmd->preparse_callback([this](std::size_t) { mu_given = false; });
        cmd->final_callback([this, cmd] { mu_given = cmd->count("--mu") > 0; });
    }

    void run(const GlobalOptions& g, std::ostream& log) const {
        PathConfig cfg = path;
        cfg.seed = g.seed;
        if (!mu_given) cfg.mu = PathConfig::martingale_drift(cfg.sigma);
        cfg.validate();
        const auto prof = profile.build();
        const CLMMPool pool{prof, 1.0, gamma};
        pool.validate();
        const PoolPricing mode = pricing == "myopic" ? PoolPricing::myopic : PoolPricing::frictionless;

        const auto paths = simulate_gbm(cfg);
        std::vector<SimLedger> ledgers(paths.size());
        parallel_for(paths.size(), [&](std::size_t i) { ledgers[i] = ledger_for_path(pool, paths[i], cfg.dt, mode); },
                     g.threads);

        CsvTable per_path({"path", "final_price", "il", "lvr", "hedgeable", "fees_x", "fees_y"});
        std::vector<double> il, lvr, hedge, fx, fy;
        for (std::size_t i = 0; i < ledgers.size(); ++i) {
            const auto& f = ledgers[i].final();
            const double h = ledgers[i].hedgeable_part().back();
            per_path.add_row({static_cast<std::int64_t>(i), f.p, f.il, f.lvr, h, f.fees_x, f.fees_y});
            il.push_back(f.il);
            lvr.push_back(f.lvr);
            hedge.push_back(h);
            fx.push_back(f.fees_x);
            fy.push_back(f.fees_y);
        }
        CsvTable summary({"metric", "mean", "std_dev", "std_err", "count"});
        for (const auto& [name, data] : std::vector<std::pair<std::string, const std::vector<double>*>>{
                 {"il", &il}, {"lvr", &lvr}, {"hedgeable", &hedge}, {"fees_x", &fx}, {"fees_y", &fy}}) {
            const auto s = summarize(*data);
            summary.add_row({name, s.mean, s.std_dev, s.std_err, static_cast<std::int64_t>(s.count)});
        }
        CsvTable first({"t", "s", "p", "x", "y", "hold", "value", "rebalance", "il", "lvr", "fees_x", "fees_y", "g", "d"});
        for (const auto& r : ledgers[0].rows) {
            first.add_row({r.t, r.s, r.p, r.x, r.y, r.hold, r.value, r.rebalance, r.il, r.lvr, r.fees_x, r.fees_y, r.g, r.d});
        }
        detail::write_csv(g, "sim_paths.csv", per_path, log);
        detail::write_csv(g, "sim_summary.csv", summary, log);
        detail::write_csv(g, "sim_path0.csv", first, log);
        const auto& rows = ledgers[0].rows;
        detail::emit_svg(g, "sim_path0.svg", "Path 0: impermanent loss and LVR", "t", detail::column(rows, &LedgerRow::t),
                         {{"IL", detail::column(rows, &LedgerRow::il)}, {"LVR", detail::column(rows, &LedgerRow::lvr)}});
    }
};

struct ArbCommand {
    // myopic
    ProfileSpec profile;
    double gamma = std::exp(-0.01);
    PathConfig path{0.0, 0.2, 1e-3, 1.0, 42, 1};
    // control problems
    ControlOptions finite, discounted, ergodic;
    double oracle_step = 1e-4;
    std::size_t rows = 101;
    std::vector<double> rho_list{1e-1, 1e-2, 1e-3};
    std::size_t mc_paths = 0;
    double mc_horizon = 2000.0, mc_dt = 0.01;

    CLI::App* myopic_cmd = nullptr;
    CLI::App* finite_cmd = nullptr;
    CLI::App* discounted_cmd = nullptr;
    CLI::App* ergodic_cmd = nullptr;

    void add(CLI::App& app) {
        auto* arb = app.add_subcommand("arb", "arbitrage models");
        arb->require_subcommand(1);

        myopic_cmd = arb->add_subcommand("myopic", "reflected mispricing, inventory, fees and arbitrage profit on one GBM path");
        profile.add_options(myopic_cmd);
        myopic_cmd->add_option("--gamma", gamma, "fee retention in (0, 1]")->capture_default_str();
        myopic_cmd->add_option("--mu", path.mu, "drift of ln S")->capture_default_str();
        myopic_cmd->add_option("--sigma", path.sigma, "volatility")->capture_default_str();
        myopic_cmd->add_option("--dt", path.dt, "time step")->capture_default_str();
        myopic_cmd->add_option("--horizon", path.horizon, "horizon")->capture_default_str();
        myopic_cmd->footer("arb_myopic.csv columns: t,log_s,z,g,d,pool_price,dx,dy,fees_x,fees_y,arb");

        finite_cmd = arb->add_subcommand("finite", "finite-horizon coefficients against the RK4 oracle");
        finite.add_options(finite_cmd, true, false);
        finite_cmd->add_option("--oracle-step", oracle_step, "RK4 step as a fraction of T")->capture_default_str();
        finite_cmd->add_option("--rows", rows, "output rows")->capture_default_str()->check(CLI::Range(2, 1000000));
        finite_cmd->footer("arb_finite.csv columns: t,h2,h1,h0,h2_rk4,h1_rk4,h0_rk4");

        discounted_cmd = arb->add_subcommand("discounted", "discounted solution and the rho -> 0 table");
        discounted.add_options(discounted_cmd, false, true);
        discounted_cmd->add_option("--rho-list", rho_list, "decreasing rho values for the limit table");
        discounted_cmd->footer(
            "arb_discounted.csv columns: quantity,value\n"
            "arb_rho_limit.csv columns: rho,rho_value,gap_eta_hjb,gap_eta_alternative");

        ergodic_cmd = arb->add_subcommand("ergodic", "ergodic constant, both candidate values, optional Monte Carlo");
        ergodic.add_options(ergodic_cmd, false, false);
        ergodic_cmd->add_option("--mc-paths", mc_paths, "Monte Carlo paths (0 = skip)")->capture_default_str();
        ergodic_cmd->add_option("--mc-horizon", mc_horizon, "Monte Carlo horizon")->capture_default_str();
        ergodic_cmd->add_option("--mc-dt", mc_dt, "Monte Carlo time step")->capture_default_str();
        ergodic_cmd->footer("arb_ergodic.csv columns: quantity,value");
    }

    void run(const GlobalOptions& g, std::ostream& log) const {
        if (myopic_cmd->parsed()) run_myopic(g, log);
        if (finite_cmd->parsed()) run_finite(g, log);
        if (discounted_cmd->parsed()) run_discounted(g, log);
        if (ergodic_cmd->parsed()) run_ergodic(g, log);
    }

    void run_myopic(const GlobalOptions& g, std::ostream& log) const {
        PathConfig cfg = path;
        cfg.seed = g.seed;
        cfg.validate();
        const auto prof = profile.build();
        const auto log_s = gbm_log_path(cfg, 0);
        const auto r = skorokhod_reflect(log_s, gamma, std::exp(log_s[0]));
        const auto flows = myopic_inventory_and_fees(r, prof, gamma);
        const auto pnl = myopic_pnl(r, prof, gamma);
        CsvTable table({"t", "log_s", "z", "g", "d", "pool_price", "dx", "dy", "fees_x", "fees_y", "arb"});
        double fx = 0, fy = 0;
        std::vector<double> ts, zs;
        for (std::size_t n = 0; n < r.size(); ++n) {
            fx += flows.dfees_x[n];
            fy += flows.dfees_y[n];
            const double t = static_cast<double>(n) * cfg.dt;
            table.add_row({t, log_s[n], r.z[n], r.g[n], r.d[n], r.pool_price(n), flows.dx[n], flows.dy[n], fx, fy,
                           pnl.cumulative[n]});
            ts.push_back(t);
            zs.push_back(r.z[n]);
        }
        detail::write_csv(g, "arb_myopic.csv", table, log);
        detail::emit_svg(g, "arb_myopic.svg", "Reflected mispricing Z", "t", ts, {{"Z", zs}});
    }

    void run_finite(const GlobalOptions& g, std::ostream& log) const {
        const auto value = solve_finite(finite.params);
        const auto grid = riccati_oracle(finite.params, oracle_step);
        CsvTable table({"t", "h2", "h1", "h0", "h2_rk4", "h1_rk4", "h0_rk4"});
        std::vector<double> ts, h2s, h1s;
        const std::size_t last = grid.t.size() - 1;
        for (std::size_t k = 0; k < rows; ++k) {
            const std::size_t i = static_cast<std::size_t>(std::llround(static_cast<double>(k) * last / (rows - 1.0)));
            const double t = grid.t[i];
            table.add_row({t, value.h2(t), value.h1(t), value.h0(t), grid.h2[i], grid.h1[i], grid.h0[i]});
            ts.push_back(t);
            h2s.push_back(value.h2(t));
            h1s.push_back(value.h1(t));
        }
        detail::write_csv(g, "arb_finite.csv", table, log);
        detail::emit_svg(g, "arb_finite.svg", "Finite-horizon coefficients", "t", ts, {{"h2", h2s}, {"h1", h1s}});
    }

    void run_discounted(const GlobalOptions& g, std::ostream& log) const {
        const auto& p = discounted.params;
        const auto sol = solve_discounted(p);
        const auto zs = uniform_grid(-1.0, 1.0, 0.01);
        const auto law = feedback_law(sol.value);
        CsvTable table({"quantity", "value"});
        const std::vector<std::pair<std::string, double>> items{
            {"rho", p.rho},
            {"h2", sol.value.h2},
            {"h1", sol.value.h1},
            {"h0", sol.value.h0},
            {"h2_plus_root", sol.plus.h2},
            {"h1_alternative", sol.h1_alternative},
            {"h0_alternative", sol.h0_alternative},
            {"h2_quadratic_residual", sol.quadratic_residual(sol.value.h2, p.tau)},
            {"hjb_residual", hjb_residual_discounted(sol.value, p, zs)},
            {"hjb_residual_plus_root", hjb_residual_discounted(sol.plus, p, zs)},
            {"control_slope", law.slope},
            {"control_intercept", law.intercept},
        };
        for (const auto& [k, v] : items) table.add_row({k, v});
        detail::write_csv(g, "arb_discounted.csv", table, log);

        const auto limit = rho_limit_check(p, rho_list);
        CsvTable lim({"rho", "rho_value", "gap_eta_hjb", "gap_eta_alternative"});
        for (const auto& row : limit.rows) lim.add_row({row.rho, row.rho_value, row.gap_hjb, row.gap_alternative});
        detail::write_csv(g, "arb_rho_limit.csv", lim, log);
    }

    void run_ergodic(const GlobalOptions& g, std::ostream& log) const {
        const auto& p = ergodic.params;
        const auto erg = solve_ergodic(p);
        const auto zs = uniform_grid(-1.0, 1.0, 0.01);
        const auto law = feedback_law(erg.relative_value);
        CsvTable table({"quantity", "value"});
        table.add_row({std::string("eta_hjb"), erg.eta_hjb});
        table.add_row({std::string("eta_alternative"), erg.eta_alternative});
        table.add_row({std::string("h2"), erg.relative_value.h2});
        table.add_row({std::string("h1"), erg.relative_value.h1});
        table.add_row({std::string("control_slope"), law.slope});
        table.add_row({std::string("control_intercept"), law.intercept});
        table.add_row({std::string("hjb_residual_eta_hjb"), hjb_residual_ergodic(erg.relative_value, erg.eta_hjb, p, zs)});
        table.add_row({std::string("hjb_residual_eta_alternative"), hjb_residual_ergodic(erg.relative_value, erg.eta_alternative, p, zs)});
        if (mc_paths > 0) {
            const PathConfig cfg{0.0, p.sigma, mc_dt, mc_horizon, g.seed, mc_paths};
            ControlledSimOptions opts;
            opts.threads = g.threads;
            const auto run = simulate_controlled(p, FeedbackLaw::stationary(erg.relative_value), cfg, opts);
            const auto& s = run.average_reward_summary;
            table.add_row({std::string("mc_mean_reward"), s.mean});
            table.add_row({std::string("mc_std_err"), s.std_err});
            table.add_row({std::string("mc_se_from_eta_hjb"), (s.mean - erg.eta_hjb) / s.std_err});
            table.add_row({std::string("mc_se_from_eta_alternative"), (s.mean - erg.eta_alternative) / s.std_err});
        }
        detail::write_csv(g, "arb_ergodic.csv", table, log);
    }
};

struct VerifyCommand {
    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("verify", "run the full oracle suite and report each check");
        cmd->footer("verify.csv columns: criterion,check,passed,measured,tolerance,direction");
    }

    // Returns false when any check failed.
    bool run(const GlobalOptions& g, std::ostream& log) const {
        verify::VerifyOptions opts;
        opts.seed = g.seed;
        opts.threads = g.threads;
        const auto results = verify::run_verification(opts);
        bool ok = true;
        for (const auto& r : results) {
            log << (r.passed ? "PASS " : "FAIL ") << "[" << r.criterion << "] " << r.name << "  measured "
                << io::format_number(r.measured) << (r.direction == verify::Direction::at_most ? " <= " : " >= ")
                << io::format_number(r.tolerance) << "\n";
            ok = ok && r.passed;
        }
        detail::write_csv(g, "verify.csv", verify::verification_table(results), log);
        return ok;
    }
};

inline void print_error_json(std::ostream& err, const std::string& kind, const std::string& message,
                             const std::string& command) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"command", command}};
    err << j.dump() << "\n";
}

// Every option value in TOML form. Unset string options are left out so the
// file can be fed straight back through --config.
inline std::string effective_config(const CLI::App& app) {
    std::istringstream in(app.config_to_str(true, false));
    std::string line, kept;
    while (std::getline(in, line)) {
        if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
        kept += line + "\n";
    }
    return kept;
}

// Exit codes: 0 success, 1 runtime failure (JSON on stderr), 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"clmm_lab: concentrated-liquidity market maker laboratory"};
    app.name("clmm_lab");
    app.config_formatter(std::make_shared<JsonOrTomlConfig>());
    app.set_config("--config", "", "TOML or JSON config file (flags override it)");
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--out", g.out_dir, "output directory")->envname(kOutputEnv)->capture_default_str();
    app.add_flag("--svg", g.svg, "also write SVG line plots");
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)")->capture_default_str();

    PoolCommand pool;
    PositionCommand position;
    SimCommand sim;
    ArbCommand arb;
    VerifyCommand verify_cmd;
    pool.add(app);
    position.add(app);
    sim.add(app);
    arb.add(app);
    verify_cmd.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    std::string command;
    for (const auto* sub : app.get_subcommands()) {
        command = sub->get_name();
        for (const auto* inner : sub->get_subcommands()) command += " " + inner->get_name();
    }

    try {
        fs::create_directories(g.out_dir);
        io::write_text(fs::path(g.out_dir) / "effective_config.toml", effective_config(app));
        bool ok = true;
        if (app.got_subcommand("pool")) pool.run(g, out);
        if (app.got_subcommand("position")) position.run(g, out);
        if (app.got_subcommand("sim")) sim.run(g, out);
        if (app.got_subcommand("arb")) arb.run(g, out);
        if (app.got_subcommand("verify")) ok = verify_cmd.run(g, out);
        if (!ok) {
            print_error_json(err, "verification_failed", "one or more checks failed; see verify.csv", command);
            return 1;
        }
    } catch (const InsufficientLiquidityError& e) {
        print_error_json(err, "insufficient_liquidity", e.what(), command);
        return 1;
    } catch (const io::ParseError& e) {
        print_error_json(err, "parse_error", e.what(), command);
        return 1;
    } catch (const ValidationError& e) {
        print_error_json(err, "validation_error", e.what(), command);
        return 1;
    } catch (const DomainError& e) {
        print_error_json(err, "domain_error", e.what(), command);
        return 1;
    } catch (const NumericError& e) {
        print_error_json(err, "numeric_error", e.what(), command);
        return 1;
    } catch (const std::exception& e) {
        print_error_json(err, "error", e.what(), command);
        return 1;
    }
    return 0;
}

}  // namespace clmm::app
