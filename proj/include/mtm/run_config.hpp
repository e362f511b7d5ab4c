#pragma once

// Run configuration for the command-line tool: one JSON document with sections
// market, collateral, risk, numerics, mc, mode and output. Missing fields take
// the benchmark defaults; unknown keys are rejected. Any field can be
// overridden by its dotted name (market.sigma = 0.1).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mtm/mc_oracle.hpp"
#include "mtm/model.hpp"

namespace mtm {

enum class OutputFormat { Csv, Json };

struct OutputSpec {
    std::string path;  // empty: standard output
    OutputFormat format = OutputFormat::Csv;
};

struct RunConfig {
    Config config = benchmark_config();
    mc::McSpec mc{};
    EvalMode mode = EvalMode::PaperFactorized;
    OutputSpec output{};
};

enum class FieldKind { Number, Integer, Unsigned, Boolean, Text };

struct FieldInfo {
    const char* path;
    FieldKind kind;
};

/// Every configurable field, in document order.
inline constexpr FieldInfo kConfigFields[] = {
    {"market.v0", FieldKind::Number},
    {"market.sigma", FieldKind::Number},
    {"market.maturity", FieldKind::Integer},
    {"collateral.alpha", FieldKind::Number},
    {"collateral.beta", FieldKind::Number},
    {"risk.q", FieldKind::Number},
    {"numerics.quad_rel_tol", FieldKind::Number},
    {"numerics.quad_trunc_sds", FieldKind::Number},
    {"numerics.root_abs_tol", FieldKind::Number},
    {"mc.paths", FieldKind::Integer},
    {"mc.seed", FieldKind::Unsigned},
    {"mc.antithetic", FieldKind::Boolean},
    {"mc.workers", FieldKind::Integer},
    {"mode", FieldKind::Text},
    {"output.path", FieldKind::Text},
    {"output.format", FieldKind::Text},
};

namespace detail {

using json = nlohmann::json;

inline const FieldInfo* find_field(const std::string& path) {
    for (const auto& f : kConfigFields)
        if (path == f.path) return &f;
    return nullptr;
}

inline std::pair<std::string, std::string> split_path(const std::string& path) {
    const auto dot = path.find('.');
    if (dot == std::string::npos) return {path, ""};
    return {path.substr(0, dot), path.substr(dot + 1)};
}

inline bool is_section(const std::string& name) {
    for (const auto& f : kConfigFields)
        if (split_path(f.path).first == name && std::string(f.path) != name) return true;
    return false;
}

inline json default_document() {
    const RunConfig d;
    return json{
        {"market", {{"v0", d.config.market.v0}, {"sigma", d.config.market.sigma},
                    {"maturity", d.config.market.maturity}}},
        {"collateral", {{"alpha", d.config.collateral.alpha}, {"beta", d.config.collateral.beta}}},
        {"risk", {{"q", d.config.risk.q}}},
        {"numerics", {{"quad_rel_tol", d.config.numerics.quad_rel_tol},
                      {"quad_trunc_sds", d.config.numerics.quad_trunc_sds},
                      {"root_abs_tol", d.config.numerics.root_abs_tol}}},
        {"mc", {{"paths", d.mc.paths}, {"seed", d.mc.seed}, {"antithetic", d.mc.antithetic},
                {"workers", d.mc.workers}}},
        {"mode", to_string(d.mode)},
        {"output", {{"path", d.output.path}, {"format", "csv"}}},
    };
}

inline json& slot(json& doc, const std::string& path) {
    const auto [head, tail] = split_path(path);
    return tail.empty() ? doc[head] : doc[head][tail];
}

inline const json& at(const json& doc, const std::string& path) {
    const auto [head, tail] = split_path(path);
    return tail.empty() ? doc.at(head) : doc.at(head).at(tail);
}

inline void check_value(const FieldInfo& f, const json& v, std::vector<Violation>& bad) {
    bool ok = false;
    switch (f.kind) {
        case FieldKind::Number: ok = v.is_number(); break;
        case FieldKind::Integer:
            ok = v.is_number_integer() ||
                 (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
            break;
        case FieldKind::Unsigned: ok = v.is_number_unsigned(); break;
        case FieldKind::Boolean: ok = v.is_boolean(); break;
        case FieldKind::Text: ok = v.is_string(); break;
    }
    if (!ok) {
        static const char* names[] = {"a number", "an integer", "a non-negative integer",
                                      "a boolean", "a string"};
        bad.push_back({f.path, std::string("must be ") + names[static_cast<int>(f.kind)]});
    }
}

}  // namespace detail

/// Merges a user document over `doc`, rejecting unknown sections and keys.
inline void merge_config_document(nlohmann::json& doc, const nlohmann::json& user) {
    std::vector<Violation> bad;
    if (!user.is_object()) throw InvalidConfig("<root>", "configuration must be a JSON object");
    for (const auto& [key, value] : user.items()) {
        if (detail::find_field(key)) {
            doc[key] = value;
        } else if (detail::is_section(key)) {
            if (!value.is_object()) {
                bad.push_back({key, "must be an object"});
                continue;
            }
            for (const auto& [sub, v] : value.items()) {
                const std::string path = key + "." + sub;
                if (detail::find_field(path))
                    doc[key][sub] = v;
                else
                    bad.push_back({path, "unknown key"});
            }
        } else {
            bad.push_back({key, "unknown key"});
        }
    }
    if (!bad.empty()) throw InvalidConfig(std::move(bad));
}

/// Applies `--section.key value`. The value is read as JSON when it parses
/// (numbers, booleans) and as a plain string otherwise.
inline void apply_override(nlohmann::json& doc, const std::string& path, const std::string& text) {
    if (!detail::find_field(path)) throw InvalidConfig(path, "unknown key");
    auto v = nlohmann::json::parse(text, nullptr, false);
    if (v.is_discarded() || v.is_object() || v.is_array()) v = text;
    detail::slot(doc, path) = std::move(v);
}

/// Converts a merged document into a validated RunConfig.
inline RunConfig run_config_from_document(const nlohmann::json& doc) {
    std::vector<Violation> bad;
    for (const auto& f : kConfigFields) detail::check_value(f, detail::at(doc, f.path), bad);
    if (!bad.empty()) throw InvalidConfig(std::move(bad));

    auto num = [&](const char* p) { return detail::at(doc, p).get<double>(); };
    auto text = [&](const char* p) { return detail::at(doc, p).get<std::string>(); };
    RunConfig rc;
    Config raw;
    raw.market = {num("market.v0"), num("market.sigma"), static_cast<int>(num("market.maturity"))};
    raw.collateral = {num("collateral.alpha"), num("collateral.beta"), 0.0};
    raw.risk = {num("risk.q")};
    raw.numerics = {num("numerics.quad_rel_tol"), num("numerics.quad_trunc_sds"),
                    num("numerics.root_abs_tol")};

    rc.mc.paths = static_cast<std::int64_t>(num("mc.paths"));
    rc.mc.seed = detail::at(doc, "mc.seed").get<std::uint64_t>();
    rc.mc.antithetic = detail::at(doc, "mc.antithetic").get<bool>();
    rc.mc.workers = static_cast<int>(num("mc.workers"));
    if (rc.mc.paths < 1) bad.push_back({"mc.paths", "must be >= 1"});
    if (rc.mc.workers < 1) bad.push_back({"mc.workers", "must be >= 1"});

    if (auto m = parse_mode(text("mode")))
        rc.mode = *m;
    else
        bad.push_back({"mode", "must be paper or exact"});
    rc.output.path = text("output.path");
    const auto fmt = text("output.format");
    if (fmt == "csv")
        rc.output.format = OutputFormat::Csv;
    else if (fmt == "json")
        rc.output.format = OutputFormat::Json;
    else
        bad.push_back({"output.format", "must be csv or json"});

    try {
        rc.config = validate_config(raw);
    } catch (const InvalidConfig& e) {
        bad.insert(bad.end(), e.violations().begin(), e.violations().end());
    }
    if (!bad.empty()) throw InvalidConfig(std::move(bad));
    return rc;
}

/// Reads a configuration file (may be empty path: defaults only) and applies
/// the overrides in order.
inline RunConfig load_run_config(const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& overrides) {
    auto doc = detail::default_document();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw InvalidConfig("--config", "cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto user = nlohmann::json::parse(ss.str(), nullptr, false);
        if (user.is_discarded()) throw InvalidConfig("--config", "not valid JSON: " + path);
        merge_config_document(doc, user);
    }
    for (const auto& [k, v] : overrides) apply_override(doc, k, v);
    return run_config_from_document(doc);
}

}  // namespace mtm
