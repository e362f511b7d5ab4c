// mtm-pfe: PFE curves, optimal MTM policies, parameter sweeps and Monte Carlo
// validation from the command line.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "mtm/commands.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string policy = "single";
    // Dotted overrides in registration order, then the short aliases.
    std::vector<std::pair<std::string, std::optional<std::string>>> dotted;
    std::optional<std::string> mode, format, out, paths, seed;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config_path, "JSON configuration file");
    sub->add_option("--policy", a.policy, "single | twice-sim | twice-seq")
        ->check(CLI::IsMember({"single", "twice-sim", "twice-seq"}));
    sub->add_option("--mode", a.mode, "paper | exact");
    sub->add_option("--format", a.format, "csv | json");
    sub->add_option("--out", a.out, "output file (default: standard output)");
    a.dotted.reserve(std::size(mtm::kConfigFields));
    for (const auto& f : mtm::kConfigFields) {
        if (std::string_view(f.path).find('.') == std::string_view::npos) continue;  // plain fields have aliases
        a.dotted.emplace_back(f.path, std::nullopt);
        sub->add_option(std::string("--") + f.path, a.dotted.back().second)->group("Overrides");
    }
}

std::vector<std::pair<std::string, std::string>> overrides(const CommonArgs& a) {
    std::vector<std::pair<std::string, std::string>> o;
    for (const auto& [path, v] : a.dotted)
        if (v) o.emplace_back(path, *v);
    if (a.mode) o.emplace_back("mode", *a.mode);
    if (a.format) o.emplace_back("output.format", *a.format);
    if (a.out) o.emplace_back("output.path", *a.out);
    if (a.paths) o.emplace_back("mc.paths", *a.paths);
    if (a.seed) o.emplace_back("mc.seed", *a.seed);
    return o;
}

std::string sibling_path(const std::string& path, const std::string& tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + "." + tag;
    return path.substr(0, dot) + "." + tag + path.substr(dot);
}

int emit(const mtm::RunConfig& rc, const mtm::Report& rep) {
    const bool to_file = !rc.output.path.empty();
    std::ofstream file;
    if (to_file) {
        file.open(rc.output.path, std::ios::binary);
        if (!file) throw mtm::InvalidConfig("output.path", "cannot write " + rc.output.path);
    }
    std::ostream& os = to_file ? static_cast<std::ostream&>(file) : std::cout;
    if (rc.output.format == mtm::OutputFormat::Json) {
        mtm::write_json(os, rep);
    } else {
        mtm::write_csv(os, rep.table);
        if (rep.policy_table && to_file) {
            std::ofstream aux(sibling_path(rc.output.path, "policy"), std::ios::binary);
            mtm::write_csv(aux, *rep.policy_table);
        }
    }
    (to_file ? std::cout : std::cerr) << rep.summary << '\n';
    return rep.exit_code;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw mtm::InvalidConfig(what, "not a number: '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Potential future exposure under mark-to-market collateral"};
    app.require_subcommand(1);

    CommonArgs curve_args, opt_args, sweep_args, val_args;
    auto* curve = app.add_subcommand("curve", "PFE for every candidate MTM day");
    add_common(curve, curve_args);
    auto* optimize = app.add_subcommand("optimize", "optimal MTM policy");
    add_common(optimize, opt_args);

    auto* sweep = app.add_subcommand("sweep", "optimize once per parameter value");
    add_common(sweep, sweep_args);
    std::string sweep_param, sweep_values;
    sweep->add_option("--param", sweep_param, "T | q | sigma | v0 | alpha | beta")
        ->required()
        ->check(CLI::IsMember(mtm::sweep_params()));
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();

    auto* validate = app.add_subcommand("validate", "Monte Carlo cross-check of the analytic results");
    add_common(validate, val_args);
    validate->add_option("--paths", val_args.paths, "Monte Carlo paths");
    validate->add_option("--seed", val_args.seed, "Monte Carlo seed");
    std::string y_grid, q_grid, taus;
    double sigma_scale = 1.0;
    validate->add_option("--y-grid", y_grid, "exposure levels, comma-separated");
    validate->add_option("--q-grid", q_grid, "tail probabilities, comma-separated");
    validate->add_option("--taus", taus, "MTM days for the single policy, comma-separated");
    validate->add_option("--analytic-sigma-scale", sigma_scale,
                         "scale sigma on the analytic side only (harness check)")
        ->group("Testing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mtm::kExitOk : mtm::kExitConfig;
    }

    return mtm::run_guarded([&] {
        if (*curve) {
            const auto rc = mtm::load_run_config(curve_args.config_path, overrides(curve_args));
            return emit(rc, mtm::cmd_curve(rc, *mtm::parse_policy_kind(curve_args.policy)));
        }
        if (*optimize) {
            const auto rc = mtm::load_run_config(opt_args.config_path, overrides(opt_args));
            return emit(rc, mtm::cmd_optimize(rc, *mtm::parse_policy_kind(opt_args.policy)));
        }
        if (*sweep) {
            const auto rc = mtm::load_run_config(sweep_args.config_path, overrides(sweep_args));
            return emit(rc, mtm::cmd_sweep(rc, *mtm::parse_policy_kind(sweep_args.policy), sweep_param,
                                           parse_list(sweep_values, "--values")));
        }
        const auto rc = mtm::load_run_config(val_args.config_path, overrides(val_args));
        mtm::ValidationRequest req;
        req.policy = *mtm::parse_policy_kind(val_args.policy);
        if (!y_grid.empty()) req.y_grid = parse_list(y_grid, "--y-grid");
        if (!q_grid.empty()) req.q_grid = parse_list(q_grid, "--q-grid");
        for (double t : taus.empty() ? std::vector<double>{} : parse_list(taus, "--taus")) {
            if (t < 1 || t > rc.config.market.maturity - 1 || t != static_cast<int>(t))
                throw mtm::InvalidConfig("--taus", "days must be integers in 1..T-1");
            req.taus.push_back(static_cast<int>(t));
        }
        for (double q : req.q_grid)
            if (!(q > 0.0 && q < 1.0)) throw mtm::InvalidConfig("--q-grid", "values must lie in (0, 1)");
        if (!(sigma_scale > 0.0)) throw mtm::InvalidConfig("--analytic-sigma-scale", "must be > 0");
        return emit(rc, mtm::cmd_validate(rc, req, sigma_scale));
    }, std::cerr);
}
