#pragma once

// The four analysis commands behind the command-line tool. Each returns a
// Report; writing files is left to main.
//
// Exit codes: 0 success, 1 validation gate failed, 2 configuration error,
// 3 numerical convergence failure.

#include <ostream>
#include <string>
#include <vector>

#include "mtm/model.hpp"
#include "mtm/numerics.hpp"
#include "mtm/report.hpp"
#include "mtm/run_config.hpp"
#include "mtm/single_mtm.hpp"
#include "mtm/twice_mtm.hpp"
#include "mtm/validation.hpp"

namespace mtm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitGateFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConvergence = 3;

/// Runs a command body and maps library exceptions to exit codes.
template <class F>
int run_guarded(F&& body, std::ostream& err) {
    try {
        return body();
    } catch (const InvalidConfig& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConvergenceFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const BracketFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    }
}

namespace detail {

inline nlohmann::ordered_json report_header(const char* command, const RunConfig& rc,
                                            PolicyKind kind) {
    const auto& c = rc.config;
    nlohmann::ordered_json h;
    h["command"] = command;
    h["policy"] = to_string(kind);
    h["mode"] = to_string(rc.mode);
    h["config"] = {
        {"v0", cell_json(c.market.v0)},       {"sigma", cell_json(c.market.sigma)},
        {"maturity", c.market.maturity},      {"alpha", cell_json(c.collateral.alpha)},
        {"beta", cell_json(c.collateral.beta)}, {"c0", cell_json(c.collateral.c0)},
        {"q", cell_json(c.risk.q)},
    };
    return h;
}

inline Table sequential_table(const SequentialPolicy& p) {
    Table t{{"x", "y_a", "tau2_star", "y_b_star"}, {}};
    for (const auto& n : p.nodes)
        t.rows.push_back({n.x, n.y_a, std::int64_t{n.tau2_star}, n.y_b_star});
    return t;
}

inline PfeResult optimize(const Contract& c, PolicyKind kind, EvalMode mode, bool full) {
    switch (kind) {
        case PolicyKind::Single: return optimize_single(c, mode, {full, 0.0});
        case PolicyKind::TwiceSim: return optimize_simultaneous(c, mode, {full, std::nullopt});
        case PolicyKind::TwiceSeq: return optimize_sequential(c, mode);
    }
    return {};
}

inline std::string times_text(const PfeResult& r) {
    std::string s;
    for (std::size_t i = 0; i < r.times.size(); ++i)
        s += (i ? "," : "") + std::to_string(r.times[i]);
    return s;
}

}  // namespace detail

/// PFE for every candidate day (or pair, or first day) of a policy kind.
inline Report cmd_curve(const RunConfig& rc, PolicyKind kind) {
    const auto c = Contract::from(rc.config);
    const auto r = detail::optimize(c, kind, rc.mode, true);
    Report rep;
    rep.header = detail::report_header("curve", rc, kind);
    switch (kind) {
        case PolicyKind::Single:
            rep.table.columns = {"tau", "pfe", "achieved_q"};
            for (const auto& p : r.curve)
                rep.table.rows.push_back({std::int64_t{p.tau1}, p.pfe, p.achieved_q});
            break;
        case PolicyKind::TwiceSim:
            rep.table.columns = {"tau1", "tau2", "pfe", "achieved_q"};
            for (const auto& p : r.curve)
                rep.table.rows.push_back(
                    {std::int64_t{p.tau1}, std::int64_t{p.tau2}, p.pfe, p.achieved_q});
            break;
        case PolicyKind::TwiceSeq:
            rep.table.columns = {"tau1", "expected_pfe", "achieved_q"};
            for (const auto& p : r.curve)
                rep.table.rows.push_back({std::int64_t{p.tau1}, p.pfe, p.achieved_q});
            break;
    }
    rep.summary = std::string("curve ") + to_string(kind) + " " + to_string(rc.mode) + ": " +
                  std::to_string(rep.table.rows.size()) + " rows, minimum " +
                  format_number(r.pfe) + " at " + detail::times_text(r);
    return rep;
}

/// The optimal policy and its PFE (expected PFE for the sequential scheme).
inline Report cmd_optimize(const RunConfig& rc, PolicyKind kind) {
    const auto c = Contract::from(rc.config);
    const auto r = detail::optimize(c, kind, rc.mode, false);
    Report rep;
    rep.header = detail::report_header("optimize", rc, kind);
    switch (kind) {
        case PolicyKind::Single:
            rep.table = {{"tau", "pfe", "achieved_q"},
                         {{std::int64_t{r.times[0]}, r.pfe, r.achieved_q}}};
            break;
        case PolicyKind::TwiceSim:
            rep.table = {{"tau1", "tau2", "pfe", "achieved_q"},
                         {{std::int64_t{r.times[0]}, std::int64_t{r.times[1]}, r.pfe, r.achieved_q}}};
            break;
        case PolicyKind::TwiceSeq:
            rep.table = {{"tau1", "expected_pfe", "achieved_q"},
                         {{std::int64_t{r.times[0]}, r.pfe, r.achieved_q}}};
            rep.policy_table = detail::sequential_table(*r.sequential);
            break;
    }
    rep.summary = std::string("optimize ") + to_string(kind) + " " + to_string(rc.mode) +
                  ": times " + detail::times_text(r) + ", " +
                  (kind == PolicyKind::TwiceSeq ? "expected_pfe " : "pfe ") + format_number(r.pfe);
    return rep;
}

inline const std::vector<std::string>& sweep_params() {
    static const std::vector<std::string> names{"T", "q", "sigma", "v0", "alpha", "beta"};
    return names;
}

/// One optimization per value of a single parameter. A value that fails is
/// reported in its row and the sweep moves on; the exit code is that of the
/// first failure.
inline Report cmd_sweep(const RunConfig& rc, PolicyKind kind, const std::string& param,
                        const std::vector<double>& values) {
    Report rep;
    rep.header = detail::report_header("sweep", rc, kind);
    rep.header["param"] = param;
    switch (kind) {
        case PolicyKind::Single: rep.table.columns = {"value", "tau", "pfe", "status"}; break;
        case PolicyKind::TwiceSim: rep.table.columns = {"value", "tau1", "tau2", "pfe", "status"}; break;
        case PolicyKind::TwiceSeq: rep.table.columns = {"value", "tau1", "expected_pfe", "status"}; break;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int failures = 0;
    for (double v : values) {
        Config cfg = rc.config;
        std::vector<Cell> row{v};
        std::string status = "ok";
        PfeResult r;
        try {
            if (param == "T") {
                if (std::floor(v) != v) throw InvalidConfig("market.maturity", "must be an integer");
                cfg.market.maturity = static_cast<int>(v);
            } else if (param == "q") cfg.risk.q = v;
            else if (param == "sigma") cfg.market.sigma = v;
            else if (param == "v0") cfg.market.v0 = v;
            else if (param == "alpha") cfg.collateral.alpha = v;
            else if (param == "beta") cfg.collateral.beta = v;
            else throw InvalidConfig("--param", "unknown sweep parameter " + param);
            r = detail::optimize(Contract::from(validate_config(cfg)), kind, rc.mode, false);
        } catch (const InvalidConfig& e) {
            status = e.what();
            if (!failures++) rep.exit_code = kExitConfig;
        } catch (const ConvergenceFailure& e) {
            status = e.what();
            if (!failures++) rep.exit_code = kExitConvergence;
        } catch (const BracketFailure& e) {
            status = e.what();
            if (!failures++) rep.exit_code = kExitConvergence;
        }
        const bool ok = status == "ok";
        const std::int64_t none = 0;
        row.push_back(ok ? std::int64_t{r.times[0]} : none);
        if (kind == PolicyKind::TwiceSim) row.push_back(ok ? std::int64_t{r.times[1]} : none);
        row.push_back(ok ? r.pfe : nan);
        row.push_back(status);
        rep.table.rows.push_back(std::move(row));
    }
    rep.summary = "sweep " + param + " (" + to_string(kind) + ", " + to_string(rc.mode) + "): " +
                  std::to_string(values.size()) + " values, " + std::to_string(failures) + " failed";
    return rep;
}

/// Monte Carlo cross-check. `analytic_sigma_scale` != 1 corrupts the analytic
/// side only; it exists so the gate itself can be tested.
inline Report cmd_validate(const RunConfig& rc, ValidationRequest req,
                           double analytic_sigma_scale = 1.0) {
    req.mc = rc.mc;
    const auto sim = Contract::from(rc.config);
    auto analytic = sim;
    analytic.sigma *= analytic_sigma_scale;
    const auto v = run_validation(analytic, sim, req);

    Report rep;
    rep.header = detail::report_header("validate", rc, req.policy);
    rep.header["paths"] = rc.mc.paths;
    rep.header["seed"] = rc.mc.seed;
    rep.header["antithetic"] = rc.mc.antithetic;
    rep.header["gate_sds"] = cell_json(req.gate_sds);
    rep.header["summary"] = {{"comparisons", v.rows.size()},
                             {"gated", v.gated},
                             {"failed", v.failed},
                             {"max_paper_exact_gap", cell_json(v.max_paper_exact_gap)},
                             {"passed", v.passed()}};
    rep.table.columns = {"check", "tau1", "tau2", "y",  "q",     "analytic",
                         "mc",    "std_error", "z", "gated", "pass"};
    for (const auto& r : v.rows)
        rep.table.rows.push_back({r.check, std::int64_t{r.tau1}, std::int64_t{r.tau2}, r.y, r.q,
                                  r.analytic, r.mc, r.std_error, r.z, r.gated, r.pass});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.table.rows.push_back({std::string("max_paper_exact_gap"), std::int64_t{0}, std::int64_t{0},
                              nan, nan, v.max_paper_exact_gap, nan, nan, nan, false, true});
    rep.exit_code = v.passed() ? kExitOk : kExitGateFailed;
    rep.summary = std::string("validate ") + to_string(req.policy) + ": " +
                  std::to_string(v.gated - v.failed) + "/" + std::to_string(v.gated) +
                  " gated comparisons pass, max paper-exact gap " +
                  format_number(v.max_paper_exact_gap);
    return rep;
}

}  // namespace mtm
