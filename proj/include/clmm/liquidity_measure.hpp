#pragma once

// Liquidity profiles l(p) as right-continuous step functions plus optional
// smooth density components, the signed measure dl, and the reserve
// integrals
//
//   x(P) = 1/2 * int_P^inf l(p) p^{-3/2} dp,   y(P) = 1/2 * int_0^P l(p) p^{-1/2} dp.
//
// Step parts are integrated in closed form. Density parts are integrated
// with adaptive Gauss-Kronrod in s = p^{-1/2} (for x) and t = p^{1/2}
// (for y), where both integrals become plain integrals of l:
//
//   x(P) = int_0^{P^{-1/2}} l(s^{-2}) ds,      y(P) = int_0^{P^{1/2}} l(t^2) dt.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "clmm/errors.hpp"
#include "clmm/position.hpp"

namespace clmm {

struct Reserves {
    double x = 0.0;  // risk asset
    double y = 0.0;  // numeraire
};

struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

// Point masses of dl. Zero-mass breakpoints are not listed.
struct SignedAtomSet {
    std::vector<Atom> atoms;

    double net_mass() const {
        double m = 0.0;
        for (const auto& a : atoms) m += a.mass;
        return m;
    }
};

// Smooth liquidity l_c(p) >= 0 on [support_lo, support_hi]; support_hi may be
// +inf. The function must be bounded on its support.
struct DensityComponent {
    std::function<double(double)> density;
    double support_lo = 0.0;
    double support_hi = std::numeric_limits<double>::infinity();
    double weight = 1.0;

    bool contains(double p) const { return p >= support_lo && p <= support_hi; }
    double operator()(double p) const { return contains(p) ? weight * density(p) : 0.0; }
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    unsigned max_depth = 25;
};

class LiquidityProfile {
public:
    // l == 0 everywhere.
    LiquidityProfile() : levels_{0.0} { rebuild_cache(); }

    // Uniform liquidity on (0, inf): the constant-product pool.
    static LiquidityProfile constant(double level) {
        return from_steps({}, {level});
    }

    // levels[0] applies below breakpoints[0], levels[i] on
    // [breakpoints[i-1], breakpoints[i]), levels.back() above the last one.
    static LiquidityProfile from_steps(std::vector<double> breakpoints, std::vector<double> levels) {
        if (levels.size() != breakpoints.size() + 1) {
            throw ValidationError("step profile needs exactly one more level than breakpoints");
        }
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            if (!(breakpoints[i] > 0.0) || !std::isfinite(breakpoints[i])) {
                throw ValidationError("breakpoint " + std::to_string(i) + " must be a finite positive price");
            }
            if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) {
                throw ValidationError("breakpoints must be strictly increasing (index " + std::to_string(i) + ")");
            }
        }
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!std::isfinite(levels[i]) || levels[i] < 0.0) {
                throw ValidationError("liquidity level " + std::to_string(i) + " must be finite and >= 0");
            }
        }
        LiquidityProfile p;
        p.breaks_ = std::move(breakpoints);
        p.levels_ = std::move(levels);
        p.rebuild_cache();
        return p;
    }

    static LiquidityProfile from_density(DensityComponent component) {
        return LiquidityProfile{}.with_density(std::move(component));
    }

    LiquidityProfile with_density(DensityComponent component) const {
        if (!component.density) throw ValidationError("density component has no function");
        if (!(component.support_lo >= 0.0) || !(component.support_hi > component.support_lo)) {
            throw ValidationError("density support must satisfy 0 <= lo < hi");
        }
        if (!(component.weight >= 0.0) || !std::isfinite(component.weight)) {
            throw ValidationError("density weight must be finite and >= 0");
        }
        LiquidityProfile p = *this;
        p.densities_.push_back(std::move(component));
        return p;
    }

    std::span<const double> breakpoints() const { return breaks_; }
    std::span<const double> levels() const { return levels_; }
    std::span<const DensityComponent> densities() const { return densities_; }

    double level_below() const { return levels_.front(); }
    double level_above() const { return levels_.back(); }

    bool has_step_component() const {
        return std::any_of(levels_.begin(), levels_.end(), [](double l) { return l != 0.0; });
    }
    bool has_density() const { return !densities_.empty(); }

    // Number of breakpoints <= p, i.e. the index of the step piece holding p.
    std::size_t piece_index(double p) const {
        return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), p) - breaks_.begin());
    }

    double step_value(double p) const { return levels_[piece_index(p)]; }

    double density_value(double p) const {
        double v = 0.0;
        for (const auto& d : densities_) v += d(p);
        return v;
    }

    double value(double p) const {
        if (!(p > 0.0)) throw DomainError("liquidity profile evaluated at non-positive price " + std::to_string(p));
        return step_value(p) + density_value(p);
    }

    // Closed-form reserves of the step part.
    Reserves step_reserves(double P) const {
        const std::size_t k = piece_index(P);
        const std::size_t n = breaks_.size();
        const double level = levels_[k];
        Reserves r;
        r.y = (k == 0) ? level * std::sqrt(P)
                       : y_at_break_[k - 1] + level * (std::sqrt(P) - std::sqrt(breaks_[k - 1]));
        r.x = (k == n) ? level / std::sqrt(P)
                       : x_at_break_[k] + level * (1.0 / std::sqrt(P) - 1.0 / std::sqrt(breaks_[k]));
        return r;
    }

    Reserves density_reserves(double P, const QuadratureOptions& opts = {}) const {
        Reserves r;
        for (const auto& d : densities_) {
            // x: s in [hi^{-1/2}, max(P, lo)^{-1/2}]
            const double x_from = std::max(P, d.support_lo);
            if (x_from < d.support_hi) {
                const double s_lo = std::isinf(d.support_hi) ? 0.0 : 1.0 / std::sqrt(d.support_hi);
                const double s_hi = 1.0 / std::sqrt(x_from);
                r.x += d.weight * integrate([&](double s) { return d.density(1.0 / (s * s)); }, s_lo, s_hi, opts);
            }
            // y: t in [lo^{1/2}, min(P, hi)^{1/2}]
            const double y_to = std::min(P, d.support_hi);
            if (y_to > d.support_lo) {
                r.y += d.weight * integrate([&](double t) { return d.density(t * t); }, std::sqrt(d.support_lo),
                                            std::sqrt(y_to), opts);
            }
        }
        return r;
    }

    // First sub-interval of the open interval (a, b) where l == 0, if any.
    // Density components count as strictly positive inside their support.
    std::optional<std::pair<double, double>> find_gap(double a, double b) const {
        if (a > b) std::swap(a, b);
        if (!(b > a)) return std::nullopt;
        for (std::size_t k = piece_index(a); k < levels_.size(); ++k) {
            const double lo = std::max(a, k == 0 ? 0.0 : breaks_[k - 1]);
            const double hi = std::min(b, k == breaks_.size() ? std::numeric_limits<double>::infinity() : breaks_[k]);
            if (lo >= b) break;
            if (!(hi > lo) || levels_[k] > 0.0) continue;
            const bool covered = std::any_of(densities_.begin(), densities_.end(), [&](const DensityComponent& d) {
                return d.weight > 0.0 && d.support_lo <= lo && d.support_hi >= hi;
            });
            if (!covered) return std::make_pair(lo, hi);
        }
        return std::nullopt;
    }

    LiquidityProfile scaled(double alpha) const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("profile scale must be finite and >= 0");
        LiquidityProfile p = *this;
        for (auto& l : p.levels_) l *= alpha;
        for (auto& d : p.densities_) d.weight *= alpha;
        p.rebuild_cache();
        return p;
    }

    friend LiquidityProfile operator+(const LiquidityProfile& a, const LiquidityProfile& b) {
        std::vector<double> merged;
        merged.reserve(a.breaks_.size() + b.breaks_.size());
        std::set_union(a.breaks_.begin(), a.breaks_.end(), b.breaks_.begin(), b.breaks_.end(),
                       std::back_inserter(merged));
        std::vector<double> levels;
        levels.reserve(merged.size() + 1);
        levels.push_back(a.level_below() + b.level_below());
        for (double p : merged) levels.push_back(a.step_value(p) + b.step_value(p));
        LiquidityProfile sum = from_steps(std::move(merged), std::move(levels));
        sum.densities_ = a.densities_;
        sum.densities_.insert(sum.densities_.end(), b.densities_.begin(), b.densities_.end());
        return sum;
    }

private:
    template <class F>
    static double integrate(F&& f, double a, double b, const QuadratureOptions& opts) {
        if (!(b > a)) return 0.0;
        double error = 0.0;
        double l1 = 0.0;
        const double value =
            boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, opts.max_depth, opts.rel_tol,
                                                                          &error, &l1);
        if (!std::isfinite(value) || error > opts.rel_tol * std::max(l1, std::numeric_limits<double>::min())) {
            const double achieved = l1 > 0.0 ? error / l1 : error;
            throw NumericError("density quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                                   "] reached relative error " + std::to_string(achieved),
                               achieved);
        }
        return value;
    }

    void rebuild_cache() {
        const std::size_t n = breaks_.size();
        y_at_break_.assign(n, 0.0);
        x_at_break_.assign(n, 0.0);
        if (n == 0) return;
        y_at_break_[0] = levels_[0] * std::sqrt(breaks_[0]);
        for (std::size_t i = 1; i < n; ++i) {
            y_at_break_[i] = y_at_break_[i - 1] + levels_[i] * (std::sqrt(breaks_[i]) - std::sqrt(breaks_[i - 1]));
        }
        x_at_break_[n - 1] = levels_[n] / std::sqrt(breaks_[n - 1]);
        for (std::size_t i = n - 1; i-- > 0;) {
            x_at_break_[i] =
                x_at_break_[i + 1] + levels_[i + 1] * (1.0 / std::sqrt(breaks_[i]) - 1.0 / std::sqrt(breaks_[i + 1]));
        }
    }

    std::vector<double> breaks_;
    std::vector<double> levels_;
    std::vector<DensityComponent> densities_;
    std::vector<double> y_at_break_;
    std::vector<double> x_at_break_;
};

// Sum of indicator profiles l_i * 1_[p_l_i, p_u_i).
inline LiquidityProfile profile_from_positions(std::span<const Position> positions) {
    std::vector<double> points;
    points.reserve(2 * positions.size());
    for (const auto& pos : positions) {
        pos.validate();
        if (pos.liquidity == 0.0) continue;
        points.push_back(pos.lower);
        points.push_back(pos.upper);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    std::vector<double> levels(points.size() + 1, 0.0);
    for (std::size_t k = 1; k < points.size(); ++k) {
        const double left = points[k - 1];
        for (const auto& pos : positions) {
            if (pos.liquidity != 0.0 && pos.lower <= left && left < pos.upper) levels[k] += pos.liquidity;
        }
    }
    return LiquidityProfile::from_steps(std::move(points), std::move(levels));
}

inline LiquidityProfile profile_from_positions(std::initializer_list<Position> positions) {
    return profile_from_positions(std::span<const Position>(positions.begin(), positions.size()));
}

inline double profile_value(const LiquidityProfile& profile, double p) { return profile.value(p); }

// Atom at each breakpoint with mass = right level - left level.
inline SignedAtomSet atoms_of(const LiquidityProfile& profile) {
    SignedAtomSet set;
    const auto breaks = profile.breakpoints();
    const auto levels = profile.levels();
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        const double jump = levels[i + 1] - levels[i];
        if (jump != 0.0) set.atoms.push_back({breaks[i], jump});
    }
    return set;
}

inline Reserves quad_reserves(const LiquidityProfile& profile, double P, const QuadratureOptions& opts = {}) {
    if (!(P > 0.0) || !std::isfinite(P)) throw DomainError("reserves requested at non-positive price " + std::to_string(P));
    Reserves r = profile.step_reserves(P);
    if (profile.has_density()) {
        const Reserves d = profile.density_reserves(P, opts);
        r.x += d.x;
        r.y += d.y;
    }
    return r;
}

// The same reserves written against the atoms of dl (integration by parts):
//   x(P) = l(P) / sqrt(P) + sum_{k > P} m_k / sqrt(k)
//   y(P) = l(P) sqrt(P)   - sum_{k <= P} m_k sqrt(k)
// Step profiles only.
inline Reserves reserves_from_atoms(const LiquidityProfile& profile, double P) {
    if (profile.has_density()) throw DomainError("reserves_from_atoms: profile has a density component");
    if (!(P > 0.0) || !std::isfinite(P)) throw DomainError("reserves requested at non-positive price " + std::to_string(P));
    const double level = profile.step_value(P);
    Reserves r{level / std::sqrt(P), level * std::sqrt(P)};
    for (const Atom& a : atoms_of(profile).atoms) {
        if (a.location > P) {
            r.x += a.mass / std::sqrt(a.location);
        } else {
            r.y -= a.mass * std::sqrt(a.location);
        }
    }
    return r;
}

// Liquidity shaped like a chi-squared density with `dof` degrees of freedom,
// scaled by `scale`, on (0, inf).
inline LiquidityProfile chi_squared_profile(double dof, double scale) {
    if (!(dof >= 2.0)) throw ValidationError("chi-squared liquidity needs dof >= 2 so that l stays bounded");
    boost::math::chi_squared_distribution<double> dist(dof);
    return LiquidityProfile::from_density(
        {[dist](double p) { return p > 0.0 && std::isfinite(p) ? boost::math::pdf(dist, p) : 0.0; }, 0.0,
         std::numeric_limits<double>::infinity(), scale});
}

}  // namespace clmm
