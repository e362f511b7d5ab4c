#pragma once

// Cross-checks of the analytic evaluators against the Monte Carlo oracle.
//
// Every ExactConditional comparison is gated at 4 standard errors; the
// PaperFactorized values are listed next to them but never gated, since the
// factorized composition is an approximation and is expected to differ.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mtm/mc_oracle.hpp"
#include "mtm/single_mtm.hpp"
#include "mtm/twice_mtm.hpp"

namespace mtm {

struct ValidationRequest {
    PolicyKind policy = PolicyKind::Single;
    std::vector<int> taus;          // single only; empty: three days around the optimum
    std::vector<double> y_grid;     // empty: 0.75, 1 and 1.25 times the exact PFE
    std::vector<double> q_grid;     // empty: the contract's q
    mc::McSpec mc{};
    double gate_sds = 4.0;
};

struct ValidationRow {
    std::string check;   // component id, q_exact, q_paper, pfe_exact, pfe_paper
    int tau1 = 0;
    int tau2 = 0;
    double y = 0.0;      // NaN for PFE rows
    double q = 0.0;      // NaN for probability rows
    double analytic = 0.0;
    double mc = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool gated = false;
    bool pass = true;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    double max_paper_exact_gap = 0.0;  // over composed q and PFE rows
    int gated = 0;
    int failed = 0;
    bool passed() const { return failed == 0; }
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Recorder {
    ValidationReport& rep;
    double gate;

    void prob(std::string check, int t1, int t2, double y, double analytic,
              const mc::McEstimate& e, bool gated) {
        // A zero-variance estimate (all paths agree) still resolves 1/n.
        const double floor = 1.0 / static_cast<double>(std::max<std::int64_t>(e.paths, 1));
        const double se = std::max(e.std_error, floor);
        add({std::move(check), t1, t2, y, kNaN, analytic, e.value, e.std_error, 0.0, gated, true},
            se, e.degenerate);
    }

    void pfe(std::string check, int t1, int t2, double q, double analytic,
             const mc::McEstimate& e, double root_tol, bool gated) {
        add({std::move(check), t1, t2, kNaN, q, analytic, e.value, e.std_error, 0.0, gated, true},
            std::hypot(e.std_error, root_tol), e.degenerate);
    }

    void add(ValidationRow r, double se, bool degenerate) {
        r.z = std::isfinite(se) && se > 0.0 ? (r.analytic - r.mc) / se : 0.0;
        if (r.gated) {
            ++rep.gated;
            r.pass = !degenerate && std::abs(r.z) <= gate;
            if (!r.pass) ++rep.failed;
        }
        rep.rows.push_back(std::move(r));
    }

    void gap(double paper, double exact) {
        rep.max_paper_exact_gap = std::max(rep.max_paper_exact_gap, std::abs(paper - exact));
    }
};

inline std::vector<double> default_y_grid(double pfe) { return {0.75 * pfe, pfe, 1.25 * pfe}; }

template <class Exceed>
double invert(const Contract& c, double q, Exceed&& g) {
    if (g(0.0) <= q) return 0.0;
    const double seed = c.sigma * std::sqrt(static_cast<double>(c.horizon));
    return numerics::bisect_decreasing(g, q, 0.0, seed, c.numerics.root_abs_tol);
}

}  // namespace detail

/// Runs the oracle on `simulated` and compares with the evaluators on
/// `analytic`. The two are the same contract except in harness tests, which
/// perturb the analytic side to check that the gate trips.
inline ValidationReport run_validation(const Contract& analytic, const Contract& simulated,
                                       const ValidationRequest& req) {
    ValidationReport rep;
    detail::Recorder rec{rep, req.gate_sds};
    const auto qs = req.q_grid.empty() ? std::vector<double>{analytic.q} : req.q_grid;
    const double tol = analytic.numerics.root_abs_tol;
    const auto paper = EvalMode::PaperFactorized;
    const auto exact = EvalMode::ExactConditional;

    auto with_q = [](Contract c, double q) {
        c.q = q;
        return c;
    };

    if (req.policy == PolicyKind::Single) {
        std::vector<int> taus = req.taus;
        if (taus.empty()) {
            const int best = optimize_single(analytic, exact, {false, 0.0}).times.front();
            for (int t : {best - 4, best, best + 4})
                taus.push_back(std::clamp(t, 1, analytic.horizon - 1));
            taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
        }
        auto ys = req.y_grid;
        if (ys.empty()) ys = detail::default_y_grid(pfe_single(analytic, taus[taus.size() / 2], exact));

        for (int tau : taus) {
            const auto paths = mc::simulate(simulated, SinglePolicy{tau}, req.mc);
            for (double y : ys) {
                const auto split = scenario_split(analytic, tau, y);
                const double closed[] = {split.p_no_call, split.pre_ok_no_call, split.post_ok_no_call,
                                         split.pre_ok_call, split.post_ok_call};
                int i = 0;
                for (auto k : mc::kAllComponents)
                    rec.prob(mc::to_string(k), tau, 0, y, closed[i++],
                             mc::estimate_component(paths, simulated, y, k, req.mc.antithetic), true);
                const auto e = mc::estimate_exceed_prob(paths, y, req.mc.antithetic);
                const double qe = exceed_prob_single(analytic, tau, y, exact);
                const double qp = compose_factorized(split);
                rec.prob("q_exact", tau, 0, y, qe, e, true);
                rec.prob("q_paper", tau, 0, y, qp, e, false);
                rec.gap(qp, qe);
            }
            for (double q : qs) {
                const auto e = mc::estimate_pfe(paths, q);
                const double pe = pfe_single(with_q(analytic, q), tau, exact);
                const double pp = pfe_single(with_q(analytic, q), tau, paper);
                rec.pfe("pfe_exact", tau, 0, q, pe, e, tol, true);
                rec.pfe("pfe_paper", tau, 0, q, pp, e, tol, false);
                rec.gap(pp, pe);
            }
        }
    } else if (req.policy == PolicyKind::TwiceSim) {
        const auto best = optimize_simultaneous(analytic, exact, {false, std::nullopt});
        const int t1 = best.times[0], t2 = best.times[1];
        const auto ys = req.y_grid.empty() ? detail::default_y_grid(best.pfe) : req.y_grid;
        const auto paths = mc::simulate(simulated, TwiceSimultaneousPolicy{t1, t2}, req.mc);
        for (double y : ys) {
            const auto e = mc::estimate_exceed_prob(paths, y, req.mc.antithetic);
            const double qe = exceed_prob_twice(analytic, t1, t2, y, exact);
            const double qp = exceed_prob_twice(analytic, t1, t2, y, paper);
            rec.prob("q_exact", t1, t2, y, qe, e, true);
            rec.prob("q_paper", t1, t2, y, qp, e, false);
            rec.gap(qp, qe);
        }
        for (double q : qs) {
            const auto e = mc::estimate_pfe(paths, q);
            const double pe = pfe_twice(with_q(analytic, q), t1, t2, exact);
            const double pp = pfe_twice(with_q(analytic, q), t1, t2, paper);
            rec.pfe("pfe_exact", t1, t2, q, pe, e, tol, true);
            rec.pfe("pfe_paper", t1, t2, q, pp, e, tol, false);
            rec.gap(pp, pe);
        }
    } else {
        // The decision table is fixed first; both sides then evaluate that table.
        const auto best = optimize_sequential(analytic, exact);
        const auto& table = *best.sequential;
        auto g = [&](double y) { return exceed_prob_sequential(analytic, table, y); };
        const auto ys = req.y_grid.empty() ? detail::default_y_grid(best.pfe) : req.y_grid;
        const auto paths = mc::simulate(simulated, table, req.mc);
        for (double y : ys)
            rec.prob("q_exact", table.tau1, 0, y, g(y),
                     mc::estimate_exceed_prob(paths, y, req.mc.antithetic), true);
        for (double q : qs)
            rec.pfe("pfe_exact", table.tau1, 0, q, detail::invert(analytic, q, g),
                    mc::estimate_pfe(paths, q), tol, true);
    }
    return rep;
}

inline ValidationReport run_validation(const Contract& c, const ValidationRequest& req) {
    return run_validation(c, c, req);
}

}  // namespace mtm
