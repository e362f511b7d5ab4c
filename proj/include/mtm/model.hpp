#pragma once

// Domain types shared by every part of the library.
//
// Units: time in months, sigma per sqrt(month), money in millions.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace mtm {

/// Contract value process: driftless Brownian motion started at v0.
struct MarketModel {
    double v0 = 1.0;
    double sigma = 0.2;
    int maturity = 24;
};

/// Unilateral cash collateral. c0 is derived (beta * v0) by validate_config.
struct CollateralAgreement {
    double alpha = 0.9;  // margin call fires when V > alpha * C
    double beta = 1.1;   // collateral is reset to beta * V
    double c0 = 0.0;
};

struct RiskSpec {
    double q = 0.05;  // exceedance probability; confidence level is 1 - q
};

struct NumericsSpec {
    double quad_rel_tol = 1e-8;
    double quad_trunc_sds = 8.0;
    double root_abs_tol = 1e-5;
};

enum class EvalMode { PaperFactorized, ExactConditional };

inline const char* to_string(EvalMode m) {
    return m == EvalMode::PaperFactorized ? "paper" : "exact";
}

inline std::optional<EvalMode> parse_mode(const std::string& s) {
    if (s == "paper" || s == "PaperFactorized") return EvalMode::PaperFactorized;
    if (s == "exact" || s == "ExactConditional") return EvalMode::ExactConditional;
    return std::nullopt;
}

struct Config {
    MarketModel market;
    CollateralAgreement collateral;
    RiskSpec risk;
    NumericsSpec numerics;
};

struct Violation {
    std::string field;
    std::string message;
};

class InvalidConfig : public std::runtime_error {
public:
    explicit InvalidConfig(std::vector<Violation> v)
        : std::runtime_error(summarize(v)), violations_(std::move(v)) {}
    InvalidConfig(std::string field, std::string message)
        : InvalidConfig(std::vector<Violation>{{std::move(field), std::move(message)}}) {}

    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& v) {
        std::string s = "invalid configuration:";
        for (const auto& x : v) s += " " + x.field + ": " + x.message + ";";
        return s;
    }
    std::vector<Violation> violations_;
};

/// Checks every field and derives c0 = beta * v0. Throws InvalidConfig listing
/// all violations at once. Idempotent.
inline Config validate_config(MarketModel market, CollateralAgreement collateral,
                              RiskSpec risk, NumericsSpec numerics) {
    std::vector<Violation> bad;
    auto check = [&](bool ok, const char* field, const char* msg) {
        if (!ok) bad.push_back({field, msg});
    };
    check(std::isfinite(market.v0) && market.v0 >= 0.0, "market.v0", "must be finite and >= 0");
    check(std::isfinite(market.sigma) && market.sigma > 0.0, "market.sigma", "must be > 0");
    check(market.maturity >= 2, "market.maturity", "must be an integer >= 2 months");
    check(std::isfinite(collateral.alpha) && collateral.alpha > 0.0, "collateral.alpha", "must be > 0");
    check(std::isfinite(collateral.beta) && collateral.beta > 0.0, "collateral.beta", "must be > 0");
    check(risk.q > 0.0 && risk.q < 1.0, "risk.q", "must lie in (0, 1)");
    check(numerics.quad_rel_tol > 0.0, "numerics.quad_rel_tol", "must be > 0");
    // Past ~38 sds the Gaussian density underflows; a wider window only starves the quadrature.
    check(numerics.quad_trunc_sds > 0.0 && numerics.quad_trunc_sds <= 40.0,
          "numerics.quad_trunc_sds", "must lie in (0, 40]");
    check(numerics.root_abs_tol > 0.0, "numerics.root_abs_tol", "must be > 0");
    if (!bad.empty()) throw InvalidConfig(std::move(bad));
    collateral.c0 = collateral.beta * market.v0;
    return Config{market, collateral, risk, numerics};
}

inline Config validate_config(const Config& c) {
    return validate_config(c.market, c.collateral, c.risk, c.numerics);
}

/// The benchmark contract: V0 = 1, sigma = 0.2, T = 24, alpha = 0.9, beta = 1.1, q = 0.05.
inline Config benchmark_config() {
    return validate_config(MarketModel{}, CollateralAgreement{}, RiskSpec{}, NumericsSpec{});
}

// ---------------------------------------------------------------------------
// MTM policies

struct SinglePolicy {
    int tau = 1;
};

struct TwiceSimultaneousPolicy {
    int tau1 = 1;
    int tau2 = 2;
};

/// Only the first day is fixed up front; the second is chosen on that day.
struct TwiceSequentialFirstStage {
    int tau1 = 1;
};

using MtmPolicy = std::variant<SinglePolicy, TwiceSimultaneousPolicy, TwiceSequentialFirstStage>;

inline void validate_policy(const MtmPolicy& policy, int maturity) {
    std::vector<Violation> bad;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SinglePolicy>) {
                if (p.tau < 1 || p.tau > maturity - 1)
                    bad.push_back({"policy.tau", "must lie in 1..T-1"});
            } else if constexpr (std::is_same_v<P, TwiceSimultaneousPolicy>) {
                if (p.tau1 < 1 || p.tau1 >= p.tau2 || p.tau2 > maturity - 1)
                    bad.push_back({"policy.tau1/tau2", "need 1 <= tau1 < tau2 <= T-1"});
            } else {
                if (p.tau1 < 1 || p.tau1 > maturity - 2)
                    bad.push_back({"policy.tau1", "must lie in 1..T-2"});
            }
        },
        policy);
    if (!bad.empty()) throw InvalidConfig(std::move(bad));
}

enum class PolicyKind { Single, TwiceSim, TwiceSeq };

inline const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Single: return "single";
        case PolicyKind::TwiceSim: return "twice-sim";
        case PolicyKind::TwiceSeq: return "twice-seq";
    }
    return "?";
}

inline std::optional<PolicyKind> parse_policy_kind(const std::string& s) {
    if (s == "single") return PolicyKind::Single;
    if (s == "twice-sim") return PolicyKind::TwiceSim;
    if (s == "twice-seq") return PolicyKind::TwiceSeq;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Results

struct CurvePoint {
    int tau1 = 0;
    int tau2 = 0;  // 0 when the policy has a single day
    double pfe = 0.0;
    double achieved_q = 0.0;
};

/// Second-stage decision at one first-day contract value.
struct SequentialNode {
    double x = 0.0;
    double y_a = 0.0;
    int tau2_star = 0;
    double y_b_star = 0.0;
};

struct SequentialPolicy {
    int tau1 = 0;
    std::vector<SequentialNode> nodes;  // sorted by x

    /// Nearest-node lookup on the observed first-day value.
    const SequentialNode& lookup(double v1) const;
};

struct PfeResult {
    std::vector<int> times;
    double pfe = 0.0;
    // Exceedance probability at pfe. For sequential results this is the per-stage
    // tail level every inversion targets.
    double achieved_q = 0.0;
    EvalMode mode = EvalMode::PaperFactorized;
    std::vector<CurvePoint> curve;
    std::optional<SequentialPolicy> sequential;
};

inline const SequentialNode& SequentialPolicy::lookup(double v1) const {
    if (nodes.empty()) throw std::logic_error("empty sequential policy table");
    auto it = std::lower_bound(nodes.begin(), nodes.end(), v1,
                               [](const SequentialNode& n, double x) { return n.x < x; });
    if (it == nodes.begin()) return *it;
    if (it == nodes.end()) return nodes.back();
    auto prev = std::prev(it);
    return (v1 - prev->x <= it->x - v1) ? *prev : *it;
}

}  // namespace mtm
