#pragma once

// Single mark-to-market policy: exceedance probability q(tau, y), inversion to
// PFE and the scan over candidate days.

#include <cmath>
#include <limits>
#include <vector>

#include "mtm/model.hpp"
#include "mtm/numerics.hpp"
#include "mtm/stochastics.hpp"

namespace mtm {

/// The contract as seen by the evaluators. Unlike Config, c0 need not equal
/// beta * v0: the second stage of the sequential scheme restarts the contract
/// on the first MTM day with whatever collateral is then held.
struct Contract {
    double v0 = 1.0;
    double c0 = 1.1;
    double alpha = 0.9;
    double beta = 1.1;
    double sigma = 0.2;
    int horizon = 24;
    double q = 0.05;
    NumericsSpec numerics{};

    double trigger() const { return alpha * c0; }

    /// Collateral held after an MTM day that observed value x.
    double collateral_after(double x) const { return x > trigger() ? beta * x : c0; }

    static Contract from(const Config& cfg) {
        return Contract{cfg.market.v0,      cfg.collateral.c0, cfg.collateral.alpha,
                        cfg.collateral.beta, cfg.market.sigma,  cfg.market.maturity,
                        cfg.risk.q,          cfg.numerics};
    }
};

/// The contract from day tau1 onwards given V(tau1) = x.
inline Contract restart(const Contract& c, int tau1, double x) {
    Contract r = c;
    r.v0 = x;
    r.c0 = c.collateral_after(x);
    r.horizon = c.horizon - tau1;
    return r;
}

namespace detail {

inline numerics::QuadOptions quad_options(const NumericsSpec& n) {
    return {n.quad_rel_tol, 1e-15, 4000};
}

struct GaussianRange {
    double mean;
    double sd;
    double lo;
    double hi;
};

inline GaussianRange value_at(const Contract& c, double start, double dt) {
    const double sd = c.sigma * std::sqrt(dt);
    const double w = c.numerics.quad_trunc_sds * sd;
    return {start, sd, start - w, start + w};
}

}  // namespace detail

/// The five scenario probabilities that make up q for one (tau, y).
struct ScenarioSplit {
    double p_no_call = 0.0;         // P(V_tau <= alpha C0)
    double p_call = 0.0;            // complement
    double pre_ok_no_call = 0.0;    // P(V_A - C0 <= y, no call)
    double post_ok_no_call = 0.0;   // P(V_B - C0 <= y, no call)
    double pre_ok_call = 0.0;       // P(V_A - C0 <= y, call)
    double post_ok_call = 0.0;      // P(V_B - beta V_tau <= y, call)
};

inline double prob_no_call(const Contract& c, int tau) {
    const double sd = c.sigma * std::sqrt(static_cast<double>(tau));
    return numerics::normal_cdf((c.trigger() - c.v0) / sd);
}

inline double prob_call(const Contract& c, int tau) {
    const double sd = c.sigma * std::sqrt(static_cast<double>(tau));
    return numerics::normal_cdf((c.v0 - c.trigger()) / sd);
}

inline double prob_pre_ok_no_call(const Contract& c, int tau, double y) {
    return stochastics::joint_max_below_and_end_below(c.v0, y + c.c0, c.trigger(), tau, c.sigma);
}

inline double prob_pre_ok_call(const Contract& c, int tau, double y) {
    return stochastics::joint_max_below_and_end_above(c.v0, y + c.c0, c.trigger(), tau, c.sigma);
}

inline double prob_post_ok_no_call(const Contract& c, int tau, double y) {
    const auto g = detail::value_at(c, c.v0, tau);
    const double rest = c.horizon - tau;
    const double barrier = c.c0 + y;
    auto f = [&](double x) {
        return (1.0 - stochastics::running_max_exceed_prob(x, barrier, rest, c.sigma)) *
               numerics::normal_pdf(x, g.mean, g.sd);
    };
    const double kinks[] = {barrier};
    return stochastics::clamp01(numerics::integrate(f, g.lo, std::min(c.trigger(), g.hi), kinks,
                                                    detail::quad_options(c.numerics)));
}

inline double prob_post_ok_call(const Contract& c, int tau, double y) {
    const auto g = detail::value_at(c, c.v0, tau);
    const double rest = c.horizon - tau;
    auto f = [&](double x) {
        return (1.0 - stochastics::running_max_exceed_prob(x, c.beta * x + y, rest, c.sigma)) *
               numerics::normal_pdf(x, g.mean, g.sd);
    };
    // With beta < 1 the barrier beta x + y drops below x for x >= y / (1 - beta).
    const double kink = c.beta < 1.0 ? y / (1.0 - c.beta) : g.hi;
    const double kinks[] = {kink};
    return stochastics::clamp01(numerics::integrate(f, std::max(c.trigger(), g.lo), g.hi, kinks,
                                                    detail::quad_options(c.numerics)));
}

inline ScenarioSplit scenario_split(const Contract& c, int tau, double y) {
    return {prob_no_call(c, tau),          prob_call(c, tau),
            prob_pre_ok_no_call(c, tau, y), prob_post_ok_no_call(c, tau, y),
            prob_pre_ok_call(c, tau, y),    prob_post_ok_call(c, tau, y)};
}

/// Scenario-factorized composition: within each margin-call scenario the pre-
/// and post-MTM survival events are treated as independent.
inline double compose_factorized(const ScenarioSplit& s) {
    double survive = 0.0;
    if (s.p_no_call > 1e-300) survive += s.pre_ok_no_call * s.post_ok_no_call / s.p_no_call;
    if (s.p_call > 1e-300) survive += s.pre_ok_call * s.post_ok_call / s.p_call;
    return stochastics::clamp01(1.0 - survive);
}

/// Exact composition: conditional on V_tau = x the two segment maxima are
/// independent, so the survival is integrated against the law of V_tau.
inline double exceed_prob_single_exact(const Contract& c, int tau, double y) {
    const auto g = detail::value_at(c, c.v0, tau);
    const double rest = c.horizon - tau;
    const double m = c.c0 + y;
    auto f = [&](double x) {
        const double pre = 1.0 - stochastics::bridge_max_exceed_prob({c.v0, x, double(tau), c.sigma}, m);
        const double post =
            1.0 - stochastics::running_max_exceed_prob(x, c.collateral_after(x) + y, rest, c.sigma);
        return pre * post * numerics::normal_pdf(x, g.mean, g.sd);
    };
    std::vector<double> kinks{c.trigger(), m};
    if (c.beta < 1.0) kinks.push_back(y / (1.0 - c.beta));
    const double survive =
        numerics::integrate(f, g.lo, g.hi, kinks, detail::quad_options(c.numerics));
    return stochastics::clamp01(1.0 - survive);
}

inline double exceed_prob_single(const Contract& c, int tau, double y, EvalMode mode) {
    if (mode == EvalMode::PaperFactorized) return compose_factorized(scenario_split(c, tau, y));
    return exceed_prob_single_exact(c, tau, y);
}

/// Smallest y >= 0 with exceed_prob_single(tau, y) = q; 0 when already met at y = 0.
inline double pfe_single(const Contract& c, int tau, EvalMode mode, double root_tol) {
    auto g = [&](double y) { return exceed_prob_single(c, tau, y, mode); };
    if (g(0.0) <= c.q) return 0.0;
    const double seed = std::max(c.sigma * std::sqrt(static_cast<double>(c.horizon)), root_tol);
    return numerics::bisect_decreasing(g, c.q, 0.0, seed, root_tol);
}

inline double pfe_single(const Contract& c, int tau, EvalMode mode) {
    return pfe_single(c, tau, mode, c.numerics.root_abs_tol);
}

struct SingleScanOptions {
    bool full_curve = true;  // false: skip days that cannot beat the incumbent
    double root_tol = 0.0;   // 0: use the contract's root_abs_tol
};

/// Scans tau = 1..horizon-1 and returns the smallest PFE (ties to the earliest day).
inline PfeResult optimize_single(const Contract& c, EvalMode mode, SingleScanOptions opt = {}) {
    const double tol = opt.root_tol > 0.0 ? opt.root_tol : c.numerics.root_abs_tol;
    PfeResult r;
    r.mode = mode;
    int best_tau = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int tau = 1; tau <= c.horizon - 1; ++tau) {
        if (!opt.full_curve && best_tau != 0 &&
            exceed_prob_single(c, tau, best, mode) >= c.q)
            continue;
        const double y = pfe_single(c, tau, mode, tol);
        if (opt.full_curve)
            r.curve.push_back({tau, 0, y, exceed_prob_single(c, tau, y, mode)});
        if (y < best) {
            best = y;
            best_tau = tau;
        }
    }
    r.times = {best_tau};
    r.pfe = best;
    r.achieved_q = exceed_prob_single(c, best_tau, best, mode);
    return r;
}

inline PfeResult optimize_single(const Config& cfg, EvalMode mode) {
    return optimize_single(Contract::from(cfg), mode);
}

}  // namespace mtm
