#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mtm/commands.hpp"

using Catch::Approx;
using namespace mtm;

namespace {

const std::string kData = MTM_TEST_DATA_DIR;

RunConfig defaults() { return load_run_config("", {}); }

double pfe_at(const Report& r, std::size_t row, std::size_t col) { return std::get<double>(r.table.rows[row][col]); }
std::int64_t int_at(const Report& r, std::size_t row, std::size_t col) {
    return std::get<std::int64_t>(r.table.rows[row][col]);
}

std::string csv(const Report& r) {
    std::ostringstream os;
    write_csv(os, r.table);
    return os.str();
}

std::string json_text(const Report& r) {
    std::ostringstream os;
    write_json(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("defaults reproduce the benchmark contract") {
    const auto rc = defaults();
    const auto b = benchmark_config();
    CHECK(rc.config.market.v0 == b.market.v0);
    CHECK(rc.config.market.sigma == b.market.sigma);
    CHECK(rc.config.market.maturity == b.market.maturity);
    CHECK(rc.config.collateral.alpha == b.collateral.alpha);
    CHECK(rc.config.collateral.beta == b.collateral.beta);
    CHECK(rc.config.risk.q == b.risk.q);
    CHECK(rc.mode == EvalMode::PaperFactorized);
    CHECK(rc.output.format == OutputFormat::Csv);
    CHECK(rc.mc.paths >= 1);
}

TEST_CASE("configuration file and overrides") {
    const auto rc = load_run_config(kData + "/t12_sigma01.json", {{"risk.q", "0.01"}});
    CHECK(rc.config.market.maturity == 12);
    CHECK(rc.config.market.sigma == 0.1);
    CHECK(rc.config.risk.q == 0.01);
    const auto later_wins = load_run_config("", {{"market.sigma", "0.3"}, {"market.sigma", "0.25"}});
    CHECK(later_wins.config.market.sigma == 0.25);
    const auto m = load_run_config("", {{"mode", "exact"}, {"output.format", "json"}});
    CHECK(m.mode == EvalMode::ExactConditional);
    CHECK(m.output.format == OutputFormat::Json);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(load_run_config(kData + "/unknown_key.json", {}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config(kData + "/missing.json", {}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"market.drift", "0.1"}}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"market.sigma", "abc"}}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"market.maturity", "12.5"}}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"mc.antithetic", "1"}}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"mc.paths", "0"}}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"mode", "fast"}}), InvalidConfig);
    CHECK_THROWS_AS(load_run_config("", {{"output.format", "xml"}}), InvalidConfig);
    try {
        load_run_config("", {{"market.sigma", "-1"}, {"risk.q", "2"}});
        FAIL("expected InvalidConfig");
    } catch (const InvalidConfig& e) {
        CHECK(e.violations().size() == 2);
    }
}

TEST_CASE("unknown keys inside a section are rejected") {
    auto doc = detail::default_document();
    CHECK_THROWS_AS(merge_config_document(doc, nlohmann::json::parse(R"({"risk": {"level": 1}})")),
                    InvalidConfig);
    CHECK_THROWS_AS(merge_config_document(doc, nlohmann::json::parse(R"({"extra": 1})")),
                    InvalidConfig);
    CHECK_NOTHROW(merge_config_document(doc, nlohmann::json::parse(R"({"risk": {"q": 0.02}})")));
    CHECK(run_config_from_document(doc).config.risk.q == 0.02);
}

TEST_CASE("number formatting") {
    CHECK(format_number(1.36019) == "1.36019");
    CHECK(format_number(0.0500004123) == "0.0500004");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1e-7) == "1e-07");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_cell(Cell{std::int64_t{12}}) == "12");
    CHECK(format_cell(Cell{true}) == "true");
}

TEST_CASE("CSV quoting and line endings") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    Table t{{"a", "b"}, {{std::int64_t{1}, std::string("x,y")}}};
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str() == "a,b\n1,\"x,y\"\n");
}

TEST_CASE("JSON cells are rounded and non-finite values become null") {
    CHECK(cell_json(Cell{1.360193456}).get<double>() == 1.36019);
    CHECK(cell_json(Cell{std::numeric_limits<double>::quiet_NaN()}).is_null());
    CHECK(cell_json(Cell{std::string("ok")}) == "ok");
}

TEST_CASE("singleton sweep equals the benchmark optimum") {
    const auto rc = defaults();
    const auto sweep = cmd_sweep(rc, PolicyKind::Single, "alpha", {0.9});
    const auto opt = cmd_optimize(rc, PolicyKind::Single);
    REQUIRE(sweep.table.rows.size() == 1);
    CHECK(int_at(sweep, 0, 1) == int_at(opt, 0, 0));
    CHECK(pfe_at(sweep, 0, 2) == pfe_at(opt, 0, 1));
    CHECK(sweep.exit_code == kExitOk);
}

TEST_CASE("beta sweep") {
    const auto r = cmd_sweep(defaults(), PolicyKind::Single, "beta", {1.0, 1.1, 1.5, 1.7, 1.9, 2.0});
    const int taus[] = {10, 10, 10, 11, 12, 13};
    for (std::size_t i = 0; i < 6; ++i) CHECK(int_at(r, i, 1) == taus[i]);
    CHECK(pfe_at(r, 5, 2) == Approx(0.6364).margin(0.005));
}

TEST_CASE("v0 sweep is strictly decreasing") {
    const auto r = cmd_sweep(defaults(), PolicyKind::Single, "v0", {0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK(pfe_at(r, 0, 2) == Approx(1.4602).margin(0.005));
    CHECK(pfe_at(r, 4, 2) == Approx(1.2603).margin(0.005));
    for (std::size_t i = 1; i < 5; ++i) CHECK(pfe_at(r, i, 2) < pfe_at(r, i - 1, 2));
}

TEST_CASE("a failing sweep value is reported and the sweep continues") {
    const auto r = cmd_sweep(defaults(), PolicyKind::Single, "q", {0.05, 1.5, 0.1});
    REQUIRE(r.table.rows.size() == 3);
    CHECK(std::get<std::string>(r.table.rows[0][3]) == "ok");
    CHECK(std::get<std::string>(r.table.rows[1][3]) != "ok");
    CHECK(std::get<std::string>(r.table.rows[2][3]) == "ok");
    CHECK(r.exit_code == kExitConfig);
    CHECK(cmd_sweep(defaults(), PolicyKind::Single, "T", {12.5}).exit_code == kExitConfig);
}

TEST_CASE("curve command") {
    auto rc = load_run_config("", {{"market.maturity", "2"}});
    CHECK(cmd_curve(rc, PolicyKind::Single).table.rows.size() == 1);
    rc = load_run_config(kData + "/t12_sigma01.json", {});
    const auto r = cmd_curve(rc, PolicyKind::Single);
    REQUIRE(r.table.rows.size() == 11);
    CHECK(int_at(r, 4, 0) == 5);
    CHECK(pfe_at(r, 4, 1) == Approx(0.4163).margin(0.005));
    CHECK(cmd_curve(rc, PolicyKind::TwiceSim).table.rows.size() == 55);
    CHECK(cmd_curve(rc, PolicyKind::TwiceSeq).table.rows.size() == 10);
}

TEST_CASE("sequential optimize carries its decision table") {
    const auto rc = load_run_config(kData + "/t12_sigma01.json", {});
    const auto r = cmd_optimize(rc, PolicyKind::TwiceSeq);
    REQUIRE(r.policy_table.has_value());
    CHECK(r.policy_table->columns.size() == 4);
    CHECK_FALSE(r.policy_table->rows.empty());
    const auto j = nlohmann::json::parse(json_text(r));
    CHECK(j.contains("policy_table"));
}

TEST_CASE("exit codes") {
    std::ostringstream err;
    CHECK(run_guarded([] { return kExitOk; }, err) == 0);
    CHECK(run_guarded([]() -> int { throw InvalidConfig("x", "bad"); }, err) == 2);
    CHECK(run_guarded([]() -> int { throw ConvergenceFailure("no"); }, err) == 3);
    CHECK(run_guarded([]() -> int { throw BracketFailure("no"); }, err) == 3);
    CHECK(err.str().find("error:") != std::string::npos);
}

TEST_CASE("validation gate catches a corrupted analytic model") {
    auto rc = load_run_config("", {{"mc.paths", "200000"}, {"mc.seed", "7"}});
    const auto good = cmd_validate(rc, {});
    CHECK(good.exit_code == kExitOk);
    const auto bad = cmd_validate(rc, {}, 1.05);
    CHECK(bad.exit_code == kExitGateFailed);
}

TEST_CASE("validation reports are reproducible") {
    auto rc = load_run_config("", {{"mc.paths", "50000"}, {"mc.seed", "3"}, {"mode", "exact"}});
    ValidationRequest req;
    req.policy = PolicyKind::TwiceSim;
    const auto a = cmd_validate(rc, req);
    const auto b = cmd_validate(rc, req);
    CHECK(csv(a) == csv(b));
    CHECK(json_text(a) == json_text(b));
    rc.mc.workers = 3;
    CHECK(csv(cmd_validate(rc, req)) == csv(a));
}
