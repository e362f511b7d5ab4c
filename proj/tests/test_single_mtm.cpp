#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "mtm/single_mtm.hpp"
#include "reference_tables.hpp"

using Catch::Approx;
using namespace mtm;

namespace {

const Contract bench = Contract::from(benchmark_config());
constexpr EvalMode kPaper = EvalMode::PaperFactorized;
constexpr EvalMode kExact = EvalMode::ExactConditional;
constexpr double kBig = 50.0;

Contract scaled(const Contract& c, double lam) {
    Contract s = c;
    s.v0 *= lam;
    s.c0 *= lam;
    s.sigma *= lam;
    return s;
}

}  // namespace

TEST_CASE("margin-call probability") {
    CHECK(prob_no_call(bench, 10) == Approx(0.493692431511398283891045420078).epsilon(1e-13));
    CHECK(prob_no_call(bench, 10) + prob_call(bench, 10) == Approx(1.0).margin(1e-15));
    Contract at_median = bench;
    at_median.alpha = at_median.v0 / at_median.c0;
    CHECK(prob_no_call(at_median, 7) == Approx(0.5).margin(1e-15));
    Contract huge = bench;
    huge.alpha = 1e6;
    CHECK(prob_no_call(huge, 7) == 1.0);
}

TEST_CASE("component probabilities at the benchmark operands") {
    // Shares the 30-digit pin of the joint maximum/endpoint law.
    CHECK(prob_pre_ok_no_call(bench, 10, 1.3602) ==
          Approx(0.493690632701142505123604290658).epsilon(1e-12));
    CHECK(prob_pre_ok_call(bench, 10, 1.3602) ==
          Approx(0.485353514925329393649235181993).epsilon(1e-12));
}

TEST_CASE("components release to the scenario probabilities as y grows") {
    for (int tau : {1, 6, 10, 23}) {
        const double pn = prob_no_call(bench, tau), pc = prob_call(bench, tau);
        CHECK(prob_pre_ok_no_call(bench, tau, kBig) == Approx(pn).margin(1e-12));
        CHECK(prob_post_ok_no_call(bench, tau, kBig) == Approx(pn).margin(1e-8));
        CHECK(prob_pre_ok_call(bench, tau, kBig) == Approx(pc).margin(1e-12));
        CHECK(prob_post_ok_call(bench, tau, kBig) == Approx(pc).margin(1e-8));
    }
}

TEST_CASE("components: degenerate regions") {
    // Barrier below the starting value: the pre-MTM maximum already exceeds it.
    CHECK(prob_pre_ok_no_call(bench, 10, -0.2) == 0.0);
    CHECK(prob_pre_ok_call(bench, 10, -0.2) == 0.0);
    // A call needs V above alpha C0 >= y + C0, which breaches the barrier.
    Contract c = bench;
    c.alpha = 2.0;
    CHECK(prob_pre_ok_call(c, 10, 0.5) == 0.0);
    // One month left and a distant barrier: survival is the whole no-call mass.
    Contract late = bench;
    late.horizon = 11;
    CHECK(prob_post_ok_no_call(late, 10, 3.0) == Approx(prob_no_call(late, 10)).margin(1e-9));
}

TEST_CASE("post-call survival stays below the call probability for beta >= 1") {
    for (double beta : {1.0, 1.1, 1.5, 2.0})
        for (double y : {0.0, 0.5, 1.0, 2.0}) {
            Contract c = bench;
            c.beta = beta;
            c.c0 = beta * c.v0;
            const double p = prob_post_ok_call(c, 10, y);
            CHECK(p >= 0.0);
            CHECK(p <= prob_call(c, 10) + 1e-12);
        }
}

TEST_CASE("exceedance probability: large y and the benchmark point") {
    CHECK(exceed_prob_single(bench, 10, kBig, kPaper) < 1e-10);
    CHECK(exceed_prob_single(bench, 10, kBig, kExact) < 1e-10);
    CHECK(exceed_prob_single(bench, 10, 1.3602, kPaper) == Approx(0.05).margin(0.005));
}

TEST_CASE("exceedance probability is nonincreasing in y in both modes") {
    for (auto mode : {kPaper, kExact})
        for (int tau : {2, 10, 20}) {
            double prev = 1.0;
            for (int i = 0; i <= 60; ++i) {
                const double q = exceed_prob_single(bench, tau, -0.5 + 0.05 * i, mode);
                CHECK(q <= prev + 1e-12);
                CHECK(q >= 0.0);
                prev = q;
            }
        }
}

TEST_CASE("scale invariance: V0, sigma and y scaled together") {
    for (double lam : {0.5, 2.0, 10.0}) {
        const Contract s = scaled(bench, lam);
        for (auto mode : {kPaper, kExact})
            for (int tau : {3, 10, 17})
                for (double y : {0.8, 1.3602, 1.9}) {
                    const double a = exceed_prob_single(bench, tau, y, mode);
                    const double b = exceed_prob_single(s, tau, lam * y, mode);
                    CHECK(std::abs(a - b) <= 1e-10);
                }
        Contract st = s;
        st.numerics.root_abs_tol *= lam;
        for (auto mode : {kPaper, kExact})
            CHECK(optimize_single(st, mode).times == optimize_single(bench, mode).times);
    }
}

TEST_CASE("inversion identity on the benchmark grid") {
    for (auto mode : {kPaper, kExact})
        for (int tau = 1; tau <= 23; ++tau) {
            const double y = pfe_single(bench, tau, mode);
            const double tol = bench.numerics.root_abs_tol;
            INFO("tau = " << tau);
            CHECK(y >= 0.0);
            CHECK(exceed_prob_single(bench, tau, y - tol, mode) >= bench.q);
            CHECK(exceed_prob_single(bench, tau, y + tol, mode) <= bench.q);
        }
}

TEST_CASE("PFE is floored at zero when the margin already covers the tail") {
    Contract rich = bench;
    rich.c0 = 5.0;  // deep over-collateralization
    CHECK(pfe_single(rich, 10, kPaper) == 0.0);
    CHECK(pfe_single(rich, 10, kExact) == 0.0);
}

TEST_CASE("benchmark optimum") {
    const auto p = optimize_single(bench, kPaper);
    CHECK(p.times == std::vector<int>{10});
    CHECK(p.pfe == Approx(1.3602).margin(0.005));
    CHECK(std::abs(p.achieved_q - bench.q) <= 1e-4);
    CHECK(p.curve.size() == 23);
    CHECK(p.mode == kPaper);
    // Regression pin for the exact composition.
    const auto e = optimize_single(bench, kExact);
    CHECK(e.times == std::vector<int>{10});
    CHECK(e.pfe == Approx(1.36158).margin(2e-5));
}

TEST_CASE("pruned scan returns the exhaustive optimum") {
    for (auto mode : {kPaper, kExact}) {
        const auto full = optimize_single(bench, mode, {true, 0.0});
        const auto pruned = optimize_single(bench, mode, {false, 0.0});
        CHECK(full.times == pruned.times);
        CHECK(full.pfe == pruned.pfe);
        CHECK(pruned.curve.empty());
    }
}

TEST_CASE("sensitivity tables are reproduced") {
    for (const auto& row : reference::sensitivity_rows()) {
        if (reference::is_inconsistent_row(row)) continue;
        const auto r = optimize_single(Contract::from(reference::apply(row)), kPaper);
        INFO(row.param << " = " << row.value);
        CHECK(r.times.front() == row.tau);
        CHECK(r.pfe == Approx(row.pfe).margin(0.005));
    }
}

TEST_CASE("sigma 0.1 sensitivity row at T = 24", "[!shouldfail]") {
    // Known inconsistent row; kept so a future change that reproduces it shows up.
    const auto row = reference::SweepRow{"sigma", 0.1, 10, 0.4163};
    const auto r = optimize_single(Contract::from(reference::apply(row)), kPaper);
    CHECK(r.times.front() == 10);
    CHECK(r.pfe == Approx(0.4163).margin(0.005));
}

TEST_CASE("T = 12, sigma = 0.1 single-MTM curve") {
    const auto c = Contract::from(reference::twice_config());
    for (const auto& row : reference::twice_rows()) {
        INFO("tau = " << row.tau1);
        CHECK(pfe_single(c, row.tau1, kPaper) == Approx(row.single_pfe).margin(0.005));
    }
    const auto r = optimize_single(c, kPaper);
    CHECK(r.times.front() == 5);
    CHECK(r.pfe == Approx(0.4163).margin(0.005));
}

TEST_CASE("optimized PFE is nonincreasing in beta") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {1.0, 1.1, 1.5, 1.7, 1.9, 2.0}) {
        auto cfg = benchmark_config();
        cfg.collateral.beta = beta;
        const auto r = optimize_single(Contract::from(validate_config(cfg)), kPaper);
        CHECK(r.pfe <= prev);
        prev = r.pfe;
    }
}

TEST_CASE("two-month contract has a single candidate day") {
    auto cfg = benchmark_config();
    cfg.market.maturity = 2;
    const auto r = optimize_single(Contract::from(validate_config(cfg)), kPaper);
    CHECK(r.curve.size() == 1);
    CHECK(r.times.front() == 1);
}

TEST_CASE("restart carries the collateral forward") {
    const auto below = restart(bench, 4, 0.9);
    CHECK(below.v0 == 0.9);
    CHECK(below.c0 == bench.c0);
    CHECK(below.horizon == 20);
    const auto above = restart(bench, 4, 1.2);
    CHECK(above.c0 == Approx(1.1 * 1.2).epsilon(1e-15));
    CHECK(above.trigger() == Approx(0.9 * 1.1 * 1.2).epsilon(1e-15));
}
