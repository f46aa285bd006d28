#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "prob.hpp"

namespace tlsh {

/// Which closed-form collision bounds drive the planner. Simple uses the
/// loose cubic-tail forms (guaranteed only for delta >= 2c) and overshoots
/// widths by roughly 4x; Tight uses the sharp rational-tail forms and is the
/// default.
enum class BoundMode { Simple, Tight };

inline const char* bound_mode_name(BoundMode m) {
    return m == BoundMode::Tight ? "tight" : "simple";
}

inline BoundMode bound_mode_from_name(const std::string& s) {
    if (s == "tight") return BoundMode::Tight;
    if (s == "simple") return BoundMode::Simple;
    throw std::invalid_argument("bound mode must be 'simple' or 'tight'");
}

/// Output of the width planners. For a single-lookup plan, repeats == 1 and
/// one table of n entries of width w answers a query in one search. For a
/// multi-lookup plan, repeats independent signature banks of width w are
/// searched in turn. k is the real-valued per-distance budget the width was
/// ceiled from; feasible records whether the bound regime backing the plan
/// actually held at the chosen delta.
struct Plan {
    std::size_t n = 0;
    double c = 0.0;
    double eps = 0.0;
    BoundMode mode = BoundMode::Tight;
    double delta = 0.0;
    double k = 0.0;
    std::size_t w = 0;
    std::size_t repeats = 1;
    bool feasible = false;
};

namespace detail {

/// Upper bound on the per-ternion mismatch probability of a pair at
/// (normalized) distance <= 1.
inline double near_mismatch_bound(double delta, BoundMode mode) {
    return mode == BoundMode::Tight ? phi_tight_upper(delta) : p1_mismatch(delta);
}

/// Lower bound on the per-ternion mismatch probability of a pair at
/// (normalized) distance >= c.
inline double far_mismatch_bound(double delta, double c, BoundMode mode) {
    if (mode == BoundMode::Tight)
        return phi_tight_lower(delta / c) - phi_tight_upper(2.0 * delta / c);
    return p2_mismatch(delta / c);
}

} // namespace detail

/// Pick (delta, w) for a one-table, one-lookup index on n points that
/// answers the (1, c) decision problem with error probability at most eps.
///
/// The failure budget eps is split evenly between the two error sides, so
/// with eps' = eps/2 the width must satisfy both
///   w * nu1(delta) <= eps'                 (near pair loses a ternion)
///   (1 - nu2(delta))^w <= eps'/n           (any far pair survives all w)
/// where nu1/nu2 are the near/far mismatch bounds above. Both constraints
/// bind simultaneously when nu2/nu1 = (1/eps') log2(n/eps'); that equation
/// is solved for delta by bisection (the ratio grows monotonically with
/// delta), then k = 1/nu2 and w = ceil(k log2(n/eps')).
inline Plan plan_single_lookup(std::size_t n, double c, double eps,
                               BoundMode mode = BoundMode::Tight) {
    if (n == 0) throw std::invalid_argument("plan_single_lookup: n must be positive");
    if (!(c > 1.0)) throw std::invalid_argument("plan_single_lookup: c must exceed 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("plan_single_lookup: eps must lie in (0,1)");

    const double epsp = eps / 2.0;
    const double target = (1.0 / epsp) * std::log2(double(n) / epsp);
    auto balance = [&](double delta) {
        double nu1 = detail::near_mismatch_bound(delta, mode);
        double nu2 = detail::far_mismatch_bound(delta, c, mode);
        // The far bound is non-positive in two regimes with opposite
        // meanings: at small delta the lower bound is vacuous (true ratio
        // tiny), at huge delta both tails underflow double precision (true
        // ratio astronomically large, since the near tail decays faster).
        // nu1 underflowing first distinguishes the second case.
        if (nu2 <= 0.0) return nu1 <= 0.0 ? target : -target;
        if (nu1 <= 0.0) return target;
        return nu2 / nu1 - target;
    };

    double lo = 2.0 * c, hi = 50.0 * c;
    while (balance(hi) < 0.0 && hi < 1e6 * c) hi *= 2.0;
    while (balance(lo) > 0.0 && lo > 1e-9 * c) lo *= 0.5;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (balance(mid) < 0.0 ? lo : hi) = mid;
    }

    Plan plan;
    plan.n = n;
    plan.c = c;
    plan.eps = eps;
    plan.mode = mode;
    plan.delta = 0.5 * (lo + hi);
    double nu2 = detail::far_mismatch_bound(plan.delta, c, mode);
    plan.feasible = mode == BoundMode::Simple ? plan.delta >= 2.0 * c - 1e-9 : nu2 > 0.0;
    if (nu2 > 0.0) {
        plan.k = 1.0 / nu2;
        plan.w = static_cast<std::size_t>(std::ceil(plan.k * std::log2(double(n) / epsp)));
    } else {
        plan.feasible = false;
    }
    return plan;
}

/// Pick (delta, w, repeats) for a multi-lookup index: repeats independent
/// signature banks, each planned for a fixed per-trial failure probability
/// of 1/4, searched one lookup per bank. Independent trials push the
/// overall error below eps after ceil(log2(1/eps)) repeats, trading a much
/// narrower word for a handful of extra searches.
inline Plan plan_multi_lookup(std::size_t n, double c, double eps,
                              BoundMode mode = BoundMode::Tight) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("plan_multi_lookup: eps must lie in (0,1)");
    Plan plan = plan_single_lookup(n, c, 0.25, mode);
    plan.eps = eps;
    plan.repeats = static_cast<std::size_t>(std::ceil(std::log2(1.0 / eps)));
    if (plan.repeats == 0) plan.repeats = 1;
    return plan;
}

/// Smallest per-trial budget the fixed-budget planner accepts: the far-side
/// bound must give each ternion at least 1/k mismatch probability somewhere
/// in its guaranteed regime, which caps 1/k at the regime-edge value.
inline double log_width_min_budget() { return 1.0 / p2_mismatch(2.0); }

/// Plan a width that is logarithmic in n for a given real-valued budget k:
/// delta is chosen as the largest value whose far-side mismatch bound still
/// meets 1/k (solving p2_mismatch(delta/c) = 1/k on the guaranteed regime),
/// and w = ceil(k log2(n/eps)). Requires k >= log_width_min_budget()
/// (about 740.86); below that no delta in the regime satisfies the budget.
/// feasible reports whether c is large enough for the one-sided error
/// argument, i.e. c^2 >= ln((k/eps) log2(n/eps)).
struct LogWidthPlan {
    std::size_t n = 0;
    double c = 0.0;
    double eps = 0.0;
    double k = 0.0;
    double delta = 0.0;
    std::size_t w = 0;
    bool feasible = false;
};

inline LogWidthPlan plan_log_width(std::size_t n, double c, double eps, double k) {
    if (n == 0) throw std::invalid_argument("plan_log_width: n must be positive");
    if (!(c > 1.0)) throw std::invalid_argument("plan_log_width: c must exceed 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("plan_log_width: eps must lie in (0,1)");
    if (!(k >= log_width_min_budget()))
        throw std::invalid_argument("plan_log_width: k below the minimum budget (~740.86)");

    // p2_mismatch is strictly decreasing, so bisect for p2_mismatch(alpha) = 1/k.
    double lo = 2.0, hi = 60.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (p2_mismatch(mid) > 1.0 / k ? lo : hi) = mid;
    }

    LogWidthPlan plan;
    plan.n = n;
    plan.c = c;
    plan.eps = eps;
    plan.k = k;
    plan.delta = 0.5 * (lo + hi) * c;
    plan.w = static_cast<std::size_t>(std::ceil(k * std::log2(double(n) / eps)));
    plan.feasible = c * c >= std::log((k / eps) * std::log2(double(n) / eps));
    return plan;
}

inline nlohmann::json to_json(const Plan& p) {
    return {{"n", p.n},         {"c", p.c},
            {"eps", p.eps},     {"mode", bound_mode_name(p.mode)},
            {"delta", p.delta}, {"k", p.k},
            {"w", p.w},         {"repeats", p.repeats},
            {"feasible", p.feasible}};
}

inline nlohmann::json to_json(const LogWidthPlan& p) {
    return {{"n", p.n}, {"c", p.c},         {"eps", p.eps},          {"k", p.k},
            {"delta", p.delta}, {"w", p.w}, {"feasible", p.feasible}};
}

} // namespace tlsh
