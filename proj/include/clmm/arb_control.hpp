#pragma once

// Arbitrage control of the mispricing dZ = (mu - u) dt + sigma dW with
// running reward Z u - (lambda/2) u^2 - (tau/2) Z^2, solved with the
// quadratic ansatz V(z) = h2 z^2 / 2 + h1 z + h0:
//
//   finite horizon   h2' + (1 - h2)^2 / lambda - tau = 0,
//                    h1' + mu h2 - (1 - h2) h1 / lambda = 0,
//                    h0' + sigma^2 h2 / 2 + mu h1 + h1^2 / (2 lambda) = 0,   h(T) = 0
//   discounted       same system with h' replaced by -rho h
//   ergodic          rho h -> 0 for h2, h1; eta = sigma^2 h2 / 2 + mu h1 + h1^2 / (2 lambda)
//
// The closed forms below are derived from these systems; riccati_oracle and
// simulate_controlled are the independent checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "clmm/errors.hpp"
#include "clmm/market_sim.hpp"
#include "clmm/myopic.hpp"
#include "clmm/parallel.hpp"
#include "clmm/random.hpp"
#include "clmm/stats.hpp"

namespace clmm {

struct ControlParams {
    double mu = 0.05;
    double sigma = 0.2;
    double lambda = 0.1;  // control penalty weight
    double tau = 0.4;     // mispricing penalty weight
    double rho = 0.1;     // discount rate
    double horizon = 1.0;

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
        if (!std::isfinite(mu)) throw ValidationError("mu must be finite");
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be >= 0");
    }

    // sqrt(lambda * tau); the Riccati flow has fixed points 1 -+ this.
    double root_lt() const { return std::sqrt(lambda * tau); }
    // lambda * tau == 1: xi is undefined and h2 == 0 is the fixed point.
    bool singular() const { return std::abs(root_lt() - 1.0) <= 1e-14; }
};

struct QuadraticValue {
    double h2 = 0.0;
    double h1 = 0.0;
    double h0 = 0.0;
    double lambda = 1.0;

    double operator()(double z) const { return 0.5 * h2 * z * z + h1 * z + h0; }
    double gradient(double z) const { return h2 * z + h1; }
};

// u* = (z - dV/dz) / lambda = ((1 - h2) z - h1) / lambda
inline double optimal_control(const QuadraticValue& v, double z) { return (z - v.gradient(z)) / v.lambda; }

struct AffineFeedback {
    double slope = 0.0;
    double intercept = 0.0;
    double operator()(double z) const { return slope * z + intercept; }
};

inline AffineFeedback feedback_law(const QuadraticValue& v) {
    return {(1.0 - v.h2) / v.lambda, -v.h1 / v.lambda};
}

// ---------------------------------------------------------------- finite horizon

class FiniteHorizonValue {
public:
    explicit FiniteHorizonValue(const ControlParams& params) : p_(params) {
        p_.validate();
        if (!(p_.horizon > 0.0) || !std::isfinite(p_.horizon)) throw ValidationError("horizon T must be positive");
        a_ = p_.root_lt();
        phi_ = std::sqrt(p_.tau / p_.lambda);
        singular_ = p_.singular();
        xi_ = singular_ ? std::numeric_limits<double>::infinity() : (1.0 + a_) / (1.0 - a_);
    }

    const ControlParams& params() const { return p_; }
    double horizon() const { return p_.horizon; }
    double xi() const { return xi_; }
    double phi() const { return phi_; }
    bool singular() const { return singular_; }

    // h2(t) = 1 + a (1 + xi E) / (1 - xi E),  E = e^{2 phi (T - t)},
    // evaluated as (1 + a)(1 - 1/E) / (xi - 1/E), which is exactly 0 at t = T.
    double h2(double t) const {
        if (singular_) return 0.0;
        const double s = remaining(t);
        return (1.0 + a_) * -std::expm1(-2.0 * phi_ * s) / (xi_ - std::exp(-2.0 * phi_ * s));
    }

    // h1(t) = lambda mu (1 + 1/a) (e^{phi s} + e^{-phi s} - 2) / (xi e^{phi s} - e^{-phi s}),  s = T - t
    double h1(double t) const {
        if (singular_ || p_.mu == 0.0) return 0.0;
        const double s = remaining(t);
        const double gap = std::expm1(-phi_ * s);  // e^{-phi s} - 1
        return p_.lambda * p_.mu * (1.0 + 1.0 / a_) * gap * gap / (xi_ - std::exp(-2.0 * phi_ * s));
    }

    // h0(t) = int_t^T (sigma^2/2 h2 + mu h1 + h1^2 / (2 lambda)) ds
    double h0(double t, double rel_tol = 1e-13) const {
        if (singular_) return 0.0;
        const double s = remaining(t);
        if (s == 0.0) return 0.0;
        auto running = [&](double u) { return running_h0(p_.horizon - u); };
        double error = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(running, 0.0, s, 15, rel_tol,
                                                                                       &error);
        // The integrand is smooth; depth 15 is ample. Boost's error estimate
        // is unreliable on very short intervals, so only divergence is fatal.
        if (!std::isfinite(v)) throw NumericError("finite-horizon h0 quadrature diverged", error);
        return v;
    }

    QuadraticValue at(double t) const { return {h2(t), h1(t), h0(t), p_.lambda}; }

    double value(double t, double z) const { return at(t)(z); }

    // The integrand of h0 at time t (i.e. -dh0/dt).
    double running_h0(double t) const {
        const double g2 = h2(t);
        const double g1 = h1(t);
        return 0.5 * p_.sigma * p_.sigma * g2 + p_.mu * g1 + g1 * g1 / (2.0 * p_.lambda);
    }

private:
    double remaining(double t) const {
        if (!(t <= p_.horizon + 1e-15) || !std::isfinite(t)) throw DomainError("time beyond the horizon");
        return std::max(p_.horizon - t, 0.0);
    }

    ControlParams p_;
    double a_ = 0.0;
    double phi_ = 0.0;
    double xi_ = 0.0;
    bool singular_ = false;
};

inline FiniteHorizonValue solve_finite(const ControlParams& params) { return FiniteHorizonValue(params); }

struct RiccatiGrid {
    std::vector<double> t;  // ascending, t.back() == T
    std::vector<double> h2;
    std::vector<double> h1;
    std::vector<double> h0;
};

// Classical RK4 backward from t = T in s = T - t with step <= step_fraction * T.
inline RiccatiGrid riccati_oracle(const ControlParams& params, double step_fraction = 1e-4) {
    params.validate();
    if (!(params.horizon > 0.0)) throw ValidationError("horizon T must be positive");
    if (!(step_fraction > 0.0 && step_fraction <= 1.0)) throw ValidationError("step fraction must lie in (0, 1]");
    const auto steps = static_cast<std::size_t>(std::ceil(1.0 / step_fraction - 1e-9));
    const double h = params.horizon / static_cast<double>(steps);
    if (!(h > params.horizon * std::numeric_limits<double>::epsilon() * 16)) {
        throw NumericError("riccati_oracle: step underflow", h);
    }

    struct State {
        double h2, h1, h0;
    };
    const double lam = params.lambda;
    auto rhs = [&](const State& v) {
        const double g = 1.0 - v.h2;
        return State{g * g / lam - params.tau, params.mu * v.h2 - g * v.h1 / lam,
                     0.5 * params.sigma * params.sigma * v.h2 + params.mu * v.h1 + v.h1 * v.h1 / (2.0 * lam)};
    };
    auto axpy = [](const State& x, double c, const State& k) {
        return State{x.h2 + c * k.h2, x.h1 + c * k.h1, x.h0 + c * k.h0};
    };

    RiccatiGrid grid;
    grid.t.resize(steps + 1);
    grid.h2.resize(steps + 1);
    grid.h1.resize(steps + 1);
    grid.h0.resize(steps + 1);
    State v{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i <= steps; ++i) {
        const std::size_t slot = steps - i;  // s = i h  <->  t = T - i h
        grid.t[slot] = params.horizon - static_cast<double>(i) * h;
        grid.h2[slot] = v.h2;
        grid.h1[slot] = v.h1;
        grid.h0[slot] = v.h0;
        if (i == steps) break;
        const State k1 = rhs(v);
        const State k2 = rhs(axpy(v, 0.5 * h, k1));
        const State k3 = rhs(axpy(v, 0.5 * h, k2));
        const State k4 = rhs(axpy(v, h, k3));
        v = State{v.h2 + h / 6.0 * (k1.h2 + 2 * k2.h2 + 2 * k3.h2 + k4.h2),
                  v.h1 + h / 6.0 * (k1.h1 + 2 * k2.h1 + 2 * k3.h1 + k4.h1),
                  v.h0 + h / 6.0 * (k1.h0 + 2 * k2.h0 + 2 * k3.h0 + k4.h0)};
    }
    grid.t.front() = 0.0;
    return grid;
}

// ---------------------------------------------------------------- discounted

struct DiscountedSolution {
    double rho = 0.0;
    QuadraticValue value;   // admissible (minus) root
    QuadraticValue plus;    // other root of the h2 quadratic; fails the transversality check
    double h1_alternative = 0.0;
    double h0_alternative = 0.0;

    // rho h2 - (1 - h2)^2 / lambda + tau
    double quadratic_residual(double h2, double tau) const {
        return rho * h2 - (1.0 - h2) * (1.0 - h2) / value.lambda + tau;
    }
};

inline QuadraticValue discounted_coefficients(const ControlParams& p, double h2) {
    const double h1 = p.lambda * p.mu * h2 / (p.rho * p.lambda + 1.0 - h2);
    const double h0 = (0.5 * p.sigma * p.sigma * h2 + p.mu * h1 + h1 * h1 / (2.0 * p.lambda)) / p.rho;
    return {h2, h1, h0, p.lambda};
}

inline DiscountedSolution solve_discounted(const ControlParams& params) {
    params.validate();
    if (!(params.rho > 0.0)) throw DomainError("solve_discounted: rho must be positive (use solve_ergodic for rho = 0)");
    const double rl = params.rho * params.lambda;
    const double disc = std::sqrt(rl * rl / 4.0 + rl + params.tau * params.lambda);
    DiscountedSolution out;
    out.rho = params.rho;
    out.value = discounted_coefficients(params, 1.0 + rl / 2.0 - disc);
    out.plus = discounted_coefficients(params, 1.0 + rl / 2.0 + disc);

    const double h2 = out.value.h2;
    const double rt = params.rho + params.tau;
    out.h1_alternative = -params.mu / rt * ((1.0 + rl) * h2 - (1.0 - params.tau * params.lambda));
    out.h0_alternative =
        ((0.5 * params.sigma * params.sigma + params.rho * params.mu * params.mu / (rt * rt) * (1.0 + rl) * (1.0 + rl) / 2.0) * h2 +
         params.mu * params.mu / (rt * rt) * (1.0 - params.lambda * params.tau) *
             (params.tau / 2.0 - params.rho * params.rho * params.lambda / 2.0)) /
        params.rho;
    return out;
}

// ---------------------------------------------------------------- ergodic

struct ErgodicSolution {
    double eta_hjb = 0.0;          // from the HJB consistency equation
    double eta_alternative = 0.0;  // sigma^2/2 + (mu^2/2)(1/tau - lambda); fails the HJB check
    QuadraticValue relative_value; // h0 = 0
};

inline ErgodicSolution solve_ergodic(const ControlParams& params) {
    params.validate();
    const double a = params.root_lt();
    const double h2 = 1.0 - a;
    const double h1 = params.mu * (std::sqrt(params.lambda / params.tau) - params.lambda);
    ErgodicSolution out;
    out.relative_value = {h2, h1, 0.0, params.lambda};
    out.eta_hjb = 0.5 * params.sigma * params.sigma * h2 + params.mu * h1 + h1 * h1 / (2.0 * params.lambda);
    out.eta_alternative =
        0.5 * params.sigma * params.sigma + 0.5 * params.mu * params.mu * (1.0 / params.tau - params.lambda);
    return out;
}

// ---------------------------------------------------------------- HJB residuals

namespace detail {
// sigma^2/2 V'' + mu V' + (z - V')^2 / (2 lambda) - tau z^2 / 2 for quadratic V
inline double hjb_generator(const QuadraticValue& v, const ControlParams& p, double z) {
    const double grad = v.gradient(z);
    return 0.5 * p.sigma * p.sigma * v.h2 + p.mu * grad + (z - grad) * (z - grad) / (2.0 * v.lambda) -
           0.5 * p.tau * z * z;
}
}  // namespace detail

// max |rho V - generator| over the grid
inline double hjb_residual_discounted(const QuadraticValue& v, const ControlParams& p, std::span<const double> zs) {
    double worst = 0.0;
    for (double z : zs) worst = std::max(worst, std::abs(p.rho * v(z) - detail::hjb_generator(v, p, z)));
    return worst;
}

// max |eta - generator| over the grid
inline double hjb_residual_ergodic(const QuadraticValue& v, double eta, const ControlParams& p,
                                   std::span<const double> zs) {
    double worst = 0.0;
    for (double z : zs) worst = std::max(worst, std::abs(eta - detail::hjb_generator(v, p, z)));
    return worst;
}

// max |dV/dt + generator| over interior grid times (central differences in t).
inline double hjb_residual_finite(const RiccatiGrid& grid, const ControlParams& p, std::span<const double> zs,
                                  std::size_t time_stride = 1) {
    double worst = 0.0;
    if (time_stride == 0) time_stride = 1;
    for (std::size_t i = 1; i + 1 < grid.t.size(); i += time_stride) {
        const double dt = grid.t[i + 1] - grid.t[i - 1];
        const QuadraticValue v{grid.h2[i], grid.h1[i], grid.h0[i], p.lambda};
        const QuadraticValue dv{(grid.h2[i + 1] - grid.h2[i - 1]) / dt, (grid.h1[i + 1] - grid.h1[i - 1]) / dt,
                                (grid.h0[i + 1] - grid.h0[i - 1]) / dt, p.lambda};
        for (double z : zs) worst = std::max(worst, std::abs(dv(z) + detail::hjb_generator(v, p, z)));
    }
    return worst;
}

inline double hjb_residual_finite(const FiniteHorizonValue& value, std::span<const double> zs,
                                  std::span<const double> ts, double dt = 1e-4) {
    const ControlParams& p = value.params();
    double worst = 0.0;
    for (double t : ts) {
        const double lo = std::max(t - dt, 0.0);
        const double hi = std::min(t + dt, p.horizon);
        const QuadraticValue v = value.at(t);
        const QuadraticValue a = value.at(lo);
        const QuadraticValue b = value.at(hi);
        const QuadraticValue dv{(b.h2 - a.h2) / (hi - lo), (b.h1 - a.h1) / (hi - lo), (b.h0 - a.h0) / (hi - lo),
                                p.lambda};
        for (double z : zs) worst = std::max(worst, std::abs(dv(z) + detail::hjb_generator(v, p, z)));
    }
    return worst;
}

inline std::vector<double> uniform_grid(double lo, double hi, double step) {
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
    g.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

// ---------------------------------------------------------------- rho -> 0

struct RhoLimitRow {
    double rho = 0.0;
    double rho_value = 0.0;  // rho * V_rho(0)
    double gap_hjb = 0.0;
    double gap_alternative = 0.0;
};

struct RhoLimitTable {
    std::vector<RhoLimitRow> rows;
    double extrapolated = 0.0;  // Richardson on the last two rows (linear in rho)
    double eta_hjb = 0.0;
    double eta_alternative = 0.0;
};

inline RhoLimitTable rho_limit_check(const ControlParams& params, std::span<const double> rhos) {
    const ErgodicSolution erg = solve_ergodic(params);
    RhoLimitTable table;
    table.eta_hjb = erg.eta_hjb;
    table.eta_alternative = erg.eta_alternative;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        if (!(rhos[i] > 0.0)) throw DomainError("rho_limit_check: rho values must be positive");
        if (i > 0 && !(rhos[i] < rhos[i - 1])) throw DomainError("rho_limit_check: rho values must decrease");
        ControlParams p = params;
        p.rho = rhos[i];
        const double rv = p.rho * solve_discounted(p).value(0.0);
        table.rows.push_back({p.rho, rv, std::abs(rv - erg.eta_hjb), std::abs(rv - erg.eta_alternative)});
    }
    if (table.rows.size() >= 2) {
        const auto& a = table.rows[table.rows.size() - 2];
        const auto& b = table.rows.back();
        table.extrapolated = b.rho_value - (a.rho_value - b.rho_value) * b.rho / (a.rho - b.rho);
    } else if (!table.rows.empty()) {
        table.extrapolated = table.rows.back().rho_value;
    }
    return table;
}

// ---------------------------------------------------------------- controlled simulation

class FeedbackLaw {
public:
    static FeedbackLaw affine(AffineFeedback f) {
        FeedbackLaw law;
        law.affine_ = f;
        law.rate_ = [f](double, double z) { return f(z); };
        return law;
    }

    static FeedbackLaw stationary(const QuadraticValue& v) { return affine(feedback_law(v)); }

    // Time-dependent optimal law of the finite-horizon problem.
    static FeedbackLaw finite_horizon(const FiniteHorizonValue& value) {
        FeedbackLaw law;
        law.rate_ = [value](double t, double z) {
            const double tt = std::min(t, value.horizon());
            return ((1.0 - value.h2(tt)) * z - value.h1(tt)) / value.params().lambda;
        };
        return law;
    }

    static FeedbackLaw general(std::function<double(double, double)> rate) {
        FeedbackLaw law;
        law.rate_ = std::move(rate);
        return law;
    }

    double operator()(double t, double z) const { return rate_(t, z); }
    const std::optional<AffineFeedback>& affine_form() const { return affine_; }

private:
    std::function<double(double, double)> rate_;
    std::optional<AffineFeedback> affine_;
};

enum class Scheme {
    automatic,  // exact OU transition for affine laws, Euler otherwise
    euler,
};

struct ControlledSimOptions {
    Scheme scheme = Scheme::automatic;
    double z0 = 0.0;
    std::size_t record_every = 0;  // store every k-th Z of each path; 0 = none
    unsigned threads = 0;
};

struct ControlledRun {
    std::vector<double> total_reward;       // int_0^T r dt per path
    std::vector<double> discounted_reward;  // int_0^T e^{-rho t} r dt per path
    std::vector<double> average_reward;     // total / T
    std::vector<double> average_z2;         // time average of Z^2
    std::vector<std::vector<double>> z_samples;
    SampleSummary average_reward_summary;
    SampleSummary average_z2_summary;
};

// r = Z u - (lambda / 2) u^2 - (tau / 2) Z^2
inline double running_reward(const ControlParams& p, double z, double u) {
    return z * u - 0.5 * p.lambda * u * u - 0.5 * p.tau * z * z;
}

inline ControlledRun simulate_controlled(const ControlParams& params, const FeedbackLaw& law, const PathConfig& config,
                                         const ControlledSimOptions& options = {}) {
    params.validate();
    config.validate();
    const std::size_t steps = config.steps();
    const double dt = config.dt;
    const double horizon = static_cast<double>(steps) * dt;
    const bool exact = options.scheme == Scheme::automatic && law.affine_form().has_value();

    // Exact transition Z' = m + (Z - m) e^{-k dt} + sd * xi for u = k z + c.
    double decay = 1.0, mean_level = 0.0, shift = 0.0, sd = params.sigma * std::sqrt(dt);
    if (exact) {
        const AffineFeedback f = *law.affine_form();
        const double drift = params.mu - f.intercept;
        if (f.slope != 0.0) {
            decay = std::exp(-f.slope * dt);
            mean_level = drift / f.slope;
            sd = params.sigma * std::sqrt(-std::expm1(-2.0 * f.slope * dt) / (2.0 * f.slope));
        } else {
            shift = drift * dt;
        }
    }

    ControlledRun run;
    run.total_reward.assign(config.paths, 0.0);
    run.discounted_reward.assign(config.paths, 0.0);
    run.average_reward.assign(config.paths, 0.0);
    run.average_z2.assign(config.paths, 0.0);
    if (options.record_every > 0) run.z_samples.resize(config.paths);

    parallel_for(
        config.paths,
        [&](std::size_t path) {
            const random::NormalStream noise(config.seed, static_cast<std::uint32_t>(path), 1);
            std::vector<double> xi(std::min<std::size_t>(steps, 1 << 16));
            double z = options.z0;
            double total = 0.0, discounted = 0.0, z2 = 0.0;
            std::vector<double> samples;
            for (std::size_t base = 0; base < steps; base += xi.size()) {
                const std::size_t chunk = std::min(xi.size(), steps - base);
                noise.fill(std::span<double>(xi.data(), chunk), base);
                for (std::size_t j = 0; j < chunk; ++j) {
                    const std::size_t n = base + j;
                    const double t = static_cast<double>(n) * dt;
                    if (options.record_every > 0 && n % options.record_every == 0) samples.push_back(z);
                    const double u = law(t, z);
                    const double r = running_reward(params, z, u) * dt;
                    total += r;
                    discounted += std::exp(-params.rho * t) * r;
                    z2 += z * z * dt;
                    if (exact) {
                        z = mean_level + (z - mean_level) * decay + shift + sd * xi[j];
                    } else {
                        z += (params.mu - u) * dt + params.sigma * std::sqrt(dt) * xi[j];
                    }
                }
            }
            if (options.record_every > 0) {
                samples.push_back(z);
                run.z_samples[path] = std::move(samples);
            }
            run.total_reward[path] = total;
            run.discounted_reward[path] = discounted;
            run.average_reward[path] = total / horizon;
            run.average_z2[path] = z2 / horizon;
        },
        options.threads);

    run.average_reward_summary = summarize(run.average_reward);
    run.average_z2_summary = summarize(run.average_z2);
    return run;
}

}  // namespace clmm
