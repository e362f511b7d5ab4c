#pragma once

// Twice mark-to-market policies.
//
// Simultaneous: both days fixed at inception; the exceedance probability is a
// two-dimensional integral over (V1, V2).
// Sequential: the first day is fixed, the second is chosen on the first day
// after observing V1 by re-running the single-day model on the restarted
// contract; the objective is the expected PFE over V1.

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "mtm/model.hpp"
#include "mtm/numerics.hpp"
#include "mtm/single_mtm.hpp"
#include "mtm/stochastics.hpp"

namespace mtm {

namespace detail {

// Per-scenario masses for the factorized composition. Scenario index is
// 2 * (call on day 1) + (call on day 2); each scenario holds
// {P(S), P(A ok, S), P(B ok, S), P(C ok, S)}.
using ScenarioMasses = std::array<double, 16>;

struct SecondSegment {
    double v1;
    double c1;
    double trigger2;
};

inline SecondSegment second_segment(const Contract& c, double v1) {
    const double c1 = c.collateral_after(v1);
    return {v1, c1, c.alpha * c1};
}

}  // namespace detail

/// P(E > y) with MTM days tau1 < tau2, both fixed at inception.
inline double exceed_prob_twice(const Contract& c, int tau1, int tau2, double y, EvalMode mode) {
    using stochastics::bridge_max_exceed_prob;
    using stochastics::running_max_exceed_prob;
    const auto g1 = detail::value_at(c, c.v0, tau1);
    const double dt2 = tau2 - tau1;
    const double rest = c.horizon - tau2;
    const double m_a = c.c0 + y;
    const auto qo = detail::quad_options(c.numerics);
    const double beta_kink = c.beta < 1.0 ? y / (1.0 - c.beta) : std::numeric_limits<double>::max();

    if (mode == EvalMode::ExactConditional) {
        auto outer = [&](double v1) {
            const double pa = 1.0 - bridge_max_exceed_prob({c.v0, v1, double(tau1), c.sigma}, m_a);
            if (pa <= 0.0) return 0.0;
            const auto s = detail::second_segment(c, v1);
            const auto g2 = detail::value_at(c, v1, dt2);
            auto inner = [&](double v2) {
                const double pb = 1.0 - bridge_max_exceed_prob({v1, v2, dt2, c.sigma}, s.c1 + y);
                const double c2 = v2 > s.trigger2 ? c.beta * v2 : s.c1;
                const double pc = 1.0 - running_max_exceed_prob(v2, c2 + y, rest, c.sigma);
                return pb * pc * numerics::normal_pdf(v2, g2.mean, g2.sd);
            };
            const double kinks[] = {s.trigger2, s.c1 + y, beta_kink};
            const double surv = numerics::integrate(inner, g2.lo, g2.hi, kinks, qo);
            return pa * surv * numerics::normal_pdf(v1, g1.mean, g1.sd);
        };
        const double kinks[] = {c.trigger(), m_a, beta_kink};
        return stochastics::clamp01(1.0 - numerics::integrate(outer, g1.lo, g1.hi, kinks, qo));
    }

    // Factorized: per scenario, P(A ok, S) P(B ok, S) P(C ok, S) / P(S)^2. The first
    // segment's bridge law is applied on its stated domain only.
    auto outer = [&](double v1) {
        detail::ScenarioMasses out{};
        const auto s = detail::second_segment(c, v1);
        const auto g2 = detail::value_at(c, v1, dt2);
        auto inner = [&](double v2) {
            std::array<double, 6> r{};
            const bool call2 = v2 > s.trigger2;
            const double pb = 1.0 - bridge_max_exceed_prob({v1, v2, dt2, c.sigma}, s.c1 + y);
            const double c2 = call2 ? c.beta * v2 : s.c1;
            const double pc = 1.0 - running_max_exceed_prob(v2, c2 + y, rest, c.sigma);
            const double w = numerics::normal_pdf(v2, g2.mean, g2.sd);
            const int k = call2 ? 3 : 0;
            r[k] = w;
            r[k + 1] = pb * w;
            r[k + 2] = pc * w;
            return r;
        };
        const double kinks[] = {s.trigger2, s.c1 + y, beta_kink};
        const auto in = numerics::integrate(inner, g2.lo, g2.hi, kinks, qo);
        const double w1 = numerics::normal_pdf(v1, g1.mean, g1.sd);
        const double pa =
            1.0 - stochastics::bridge_max_exceed_prob_below_only({c.v0, v1, double(tau1), c.sigma}, m_a);
        const int call1 = v1 > c.trigger() ? 1 : 0;
        for (int call2 = 0; call2 < 2; ++call2) {
            const int base = 4 * (2 * call1 + call2);
            const double* seg = &in[3 * call2];
            out[base + 0] = w1 * seg[0];
            out[base + 1] = w1 * pa * seg[0];
            out[base + 2] = w1 * seg[1];
            out[base + 3] = w1 * seg[2];
        }
        return out;
    };
    const double kinks[] = {c.trigger(), m_a, beta_kink};
    const auto mass = numerics::integrate(outer, g1.lo, g1.hi, kinks, qo);
    double survive = 0.0;
    for (int sc = 0; sc < 4; ++sc) {
        const double ps = mass[4 * sc];
        if (ps > 1e-300)
            survive += mass[4 * sc + 1] * mass[4 * sc + 2] * mass[4 * sc + 3] / (ps * ps);
    }
    return stochastics::clamp01(1.0 - survive);
}

inline double pfe_twice(const Contract& c, int tau1, int tau2, EvalMode mode, double root_tol) {
    auto g = [&](double y) { return exceed_prob_twice(c, tau1, tau2, y, mode); };
    if (g(0.0) <= c.q) return 0.0;
    const double seed = std::max(c.sigma * std::sqrt(static_cast<double>(c.horizon)), root_tol);
    return numerics::bisect_decreasing(g, c.q, 0.0, seed, root_tol);
}

inline double pfe_twice(const Contract& c, int tau1, int tau2, EvalMode mode) {
    return pfe_twice(c, tau1, tau2, mode, c.numerics.root_abs_tol);
}

struct SimultaneousScanOptions {
    bool full_surface = true;     // false: prune pairs that cannot beat the incumbent
    std::optional<int> tau1{};    // restrict the scan to one first day
};

/// Scans ordered pairs (tau1, tau2); ties go to the lexicographically smallest pair.
inline PfeResult optimize_simultaneous(const Contract& c, EvalMode mode,
                                       SimultaneousScanOptions opt = {}) {
    if (c.horizon < 3) throw InvalidConfig("market.maturity", "twice-MTM needs T >= 3");
    PfeResult r;
    r.mode = mode;
    double best = std::numeric_limits<double>::infinity();
    int b1 = 0, b2 = 0;
    const int first_lo = opt.tau1 ? *opt.tau1 : 1;
    const int first_hi = opt.tau1 ? *opt.tau1 : c.horizon - 2;
    for (int t1 = first_lo; t1 <= first_hi; ++t1) {
        for (int t2 = t1 + 1; t2 <= c.horizon - 1; ++t2) {
            if (!opt.full_surface && b1 != 0 && exceed_prob_twice(c, t1, t2, best, mode) >= c.q)
                continue;
            const double y = pfe_twice(c, t1, t2, mode);
            if (opt.full_surface)
                r.curve.push_back({t1, t2, y, exceed_prob_twice(c, t1, t2, y, mode)});
            if (y < best) {
                best = y;
                b1 = t1;
                b2 = t2;
            }
        }
    }
    r.times = {b1, b2};
    r.pfe = best;
    r.achieved_q = exceed_prob_twice(c, b1, b2, best, mode);
    return r;
}

// ---------------------------------------------------------------------------
// Sequential scheme

/// PFE of the first segment given V(tau1) = x: closed-form inverse of the
/// bridge-maximum law at tail level q, floored at zero.
inline double pre_segment_pfe(const Contract& c, int tau1, double x) {
    const double d = x - c.v0;
    const double m =
        0.5 * ((x + c.v0) + std::sqrt(d * d - 2.0 * c.sigma * c.sigma * tau1 * std::log(c.q)));
    return std::max(m - c.c0, 0.0);
}

/// PFE of the first segment conditional on the day-1 scenario only
/// (V1 <= alpha C0 when first_call is false, V1 > alpha C0 otherwise).
inline double scenario_pre_segment_pfe(const Contract& c, int tau1, bool first_call) {
    const auto g = detail::value_at(c, c.v0, tau1);
    const double lo = first_call ? std::max(c.trigger(), g.lo) : g.lo;
    const double hi = first_call ? g.hi : std::min(c.trigger(), g.hi);
    const double mass = first_call ? prob_call(c, tau1) : prob_no_call(c, tau1);
    if (!(hi > lo) || mass <= 1e-300) return 0.0;
    const auto qo = detail::quad_options(c.numerics);
    auto exceed = [&](double y) {
        const double m = c.c0 + y;
        auto f = [&](double x) {
            return stochastics::bridge_max_exceed_prob({c.v0, x, double(tau1), c.sigma}, m) *
                   numerics::normal_pdf(x, g.mean, g.sd);
        };
        const double kinks[] = {m};
        return std::min(1.0, numerics::integrate(f, lo, hi, kinks, qo) / mass);
    };
    if (exceed(0.0) <= c.q) return 0.0;
    return numerics::bisect_decreasing(exceed, c.q, 0.0, g.sd, c.numerics.root_abs_tol * 1e-2);
}

struct SecondStage {
    int tau2 = 0;  // absolute month
    double y_b = 0.0;
};

/// Best second day and its PFE for the contract restarted on tau1 at value x.
inline SecondStage second_stage_opt(const Contract& c, int tau1, double x, EvalMode mode,
                                    double root_tol = 0.0) {
    if (tau1 > c.horizon - 2)
        throw InvalidConfig("policy.tau1", "second stage needs tau1 <= T-2");
    const Contract r = restart(c, tau1, x);
    const auto res = optimize_single(r, mode, {false, root_tol});
    return {tau1 + res.times.front(), res.pfe};
}

struct SequentialEvaluation {
    double expected_pfe = 0.0;
    SequentialPolicy policy;
};

/// Expected PFE over V(tau1) of max(first-segment PFE, optimal second-stage PFE).
///
/// PaperFactorized uses the scenario-level first-segment PFE and the factorized
/// single-day model for the second stage; ExactConditional uses the node-wise
/// closed form and the exact single-day model.
inline SequentialEvaluation expected_pfe_sequential(const Contract& c, int tau1, EvalMode mode) {
    if (c.horizon < 3 || tau1 < 1 || tau1 > c.horizon - 2)
        throw InvalidConfig("policy.tau1", "need 1 <= tau1 <= T-2");
    const auto g = detail::value_at(c, c.v0, tau1);
    const double inner_tol = c.numerics.root_abs_tol * 1e-2;

    double y_a_no_call = 0.0, y_a_call = 0.0;
    if (mode == EvalMode::PaperFactorized) {
        y_a_no_call = scenario_pre_segment_pfe(c, tau1, false);
        y_a_call = scenario_pre_segment_pfe(c, tau1, true);
    }

    std::map<double, SequentialNode> nodes;
    auto node = [&](double x) -> const SequentialNode& {
        auto it = nodes.find(x);
        if (it != nodes.end()) return it->second;
        SequentialNode n;
        n.x = x;
        if (mode == EvalMode::PaperFactorized)
            n.y_a = x > c.trigger() ? y_a_call : y_a_no_call;
        else
            n.y_a = pre_segment_pfe(c, tau1, x);
        const auto s = second_stage_opt(c, tau1, x, mode, inner_tol);
        n.tau2_star = s.tau2;
        n.y_b_star = s.y_b;
        return nodes.emplace(x, n).first->second;
    };
    auto f = [&](double x) {
        const auto& n = node(x);
        return std::max(n.y_a, n.y_b_star) * numerics::normal_pdf(x, g.mean, g.sd);
    };
    numerics::QuadOptions qo{c.numerics.quad_rel_tol, c.numerics.root_abs_tol, 4000};
    const double kinks[] = {c.trigger()};
    SequentialEvaluation out;
    out.expected_pfe = numerics::integrate(f, g.lo, g.hi, kinks, qo);
    out.policy.tau1 = tau1;
    out.policy.nodes.reserve(nodes.size());
    for (const auto& [x, n] : nodes) out.policy.nodes.push_back(n);
    return out;
}

/// Scans tau1 = 1..T-2; ties go to the earliest first day.
inline PfeResult optimize_sequential(const Contract& c, EvalMode mode) {
    if (c.horizon < 3) throw InvalidConfig("market.maturity", "twice-MTM needs T >= 3");
    PfeResult r;
    r.mode = mode;
    r.achieved_q = c.q;
    double best = std::numeric_limits<double>::infinity();
    for (int t1 = 1; t1 <= c.horizon - 2; ++t1) {
        auto ev = expected_pfe_sequential(c, t1, mode);
        r.curve.push_back({t1, 0, ev.expected_pfe, c.q});
        if (ev.expected_pfe < best) {
            best = ev.expected_pfe;
            r.times = {t1};
            r.sequential = std::move(ev.policy);
        }
    }
    r.pfe = best;
    return r;
}

/// Exact P(E > y) when the second day follows a fixed decision table
/// (nearest-node lookup on V1), the same rule the Monte Carlo oracle applies.
inline double exceed_prob_sequential(const Contract& c, const SequentialPolicy& policy, double y) {
    const int tau1 = policy.tau1;
    const auto g = detail::value_at(c, c.v0, tau1);
    const double m_a = c.c0 + y;
    auto f = [&](double x) {
        const double pa =
            1.0 - stochastics::bridge_max_exceed_prob({c.v0, x, double(tau1), c.sigma}, m_a);
        if (pa <= 0.0) return 0.0;
        const int tau2 = policy.lookup(x).tau2_star;
        const Contract r = restart(c, tau1, x);
        const double pb = 1.0 - exceed_prob_single_exact(r, tau2 - tau1, y);
        return pa * pb * numerics::normal_pdf(x, g.mean, g.sd);
    };
    // The lookup switches day halfway between neighbouring nodes.
    std::vector<double> kinks{c.trigger(), m_a};
    for (std::size_t i = 1; i < policy.nodes.size(); ++i)
        if (policy.nodes[i].tau2_star != policy.nodes[i - 1].tau2_star)
            kinks.push_back(0.5 * (policy.nodes[i].x + policy.nodes[i - 1].x));
    const double surv = numerics::integrate(f, g.lo, g.hi, kinks, detail::quad_options(c.numerics));
    return stochastics::clamp01(1.0 - surv);
}

}  // namespace mtm
