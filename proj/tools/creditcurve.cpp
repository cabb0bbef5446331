/// Batch front end for the credit curve library.
///
///   creditcurve <verb> [options]
///
/// Verbs: value, spread, fit, fit-grid, analytics, history.
/// Exit codes: 0 success, 2 input error, 3 non-convergence.

#include "creditcurve/errors.hpp"
#include "creditcurve/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace credit;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;

struct Options {
    std::string riskfree;
    std::string bonds;
    std::string cds;
    std::string sovereign;
    std::string config;
    std::string recovery;
    std::string fix_c;
    std::string em_alpha;
    std::string horizon;
    std::string convergence_fraction;
    std::string grid_step;
    std::string out;
    std::string fit;
    std::string mode;
    std::string snapshots;
    std::string transitions;
    std::string swap_curve;
    std::string as_of;
    bool allow_underdetermined = false;
};

RunConfig build_config(const Options& o) {
    RunConfig config;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in)
            throw InputError("cannot open '" + o.config + "'");
        try {
            config = parse_run_config(in);
        } catch (const InputError& e) {
            throw InputError(o.config + ": " + e.what());
        }
    }
    const std::pair<const char*, const std::string*> flags[] = {
        {"as_of", &o.as_of},
        {"recovery", &o.recovery},
        {"fix_c", &o.fix_c},
        {"em_alpha", &o.em_alpha},
        {"horizon", &o.horizon},
        {"convergence_fraction", &o.convergence_fraction},
        {"grid_step", &o.grid_step},
    };
    for (const auto& [key, value] : flags)
        if (!value->empty())
            apply_setting(config, key, *value);
    if (o.allow_underdetermined)
        config.allow_underdetermined = true;
    config.fit.validate();
    return config;
}

Date default_as_of(const RunConfig& config) {
    if (config.as_of)
        return *config.as_of;
    return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

UniverseSnapshot load_snapshot(const Options& o, const RunConfig& config) {
    if (o.riskfree.empty())
        throw InputError("--riskfree is required");
    if (o.bonds.empty() && o.cds.empty())
        throw InputError("no instruments: give --bonds and/or --cds");
    UniversePaths paths{o.riskfree, std::nullopt, std::nullopt, std::nullopt};
    if (!o.bonds.empty())
        paths.bonds = o.bonds;
    if (!o.cds.empty())
        paths.cds = o.cds;
    if (!o.sovereign.empty())
        paths.sovereign = o.sovereign;
    return load_universe(paths, default_as_of(config), config.riskfree_compounding);
}

FitMode parse_mode(const std::string& mode, FitMode fallback) {
    if (mode.empty())
        return fallback;
    if (mode == "single" || mode == "single-name")
        return FitMode::single_name;
    if (mode == "grid" || mode == "rating-grid")
        return FitMode::rating_grid;
    throw InputError("--mode: expected single or grid, got '" + mode + "'");
}

FitResult load_fit(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    try {
        return read_fit_result(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

/// Writes `body` to `<out>/<name>` when --out is set, else to stdout.
void emit(const Options& o, const std::string& name, const std::string& body) {
    if (o.out.empty()) {
        std::cout << body;
        return;
    }
    fs::create_directories(o.out);
    const auto path = fs::path(o.out) / name;
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw InputError("cannot write '" + path.string() + "'");
    file << body;
}

void report_diagnostics(const FitResult& result) {
    const auto& d = result.diagnostics;
    std::cerr << "objective " << format_fixed(result.objective, 12) << ", starts " << d.starts
              << ", iterations " << d.iterations << ", evaluations " << d.evaluations
              << (d.converged ? ", converged" : ", NOT converged") << "\n";
    if (!d.message.empty())
        std::cerr << d.message << "\n";
}

int check_fit(const FitResult& result, const RunConfig& config) {
    report_diagnostics(result);
    if (result.diagnostics.underdetermined) {
        std::cerr << "warning: the fit is underdetermined by the instrument set\n";
        if (!config.allow_underdetermined) {
            std::cerr << "rerun with --allow-underdetermined to accept it\n";
            return kExitInput;
        }
    }
    if (!result.diagnostics.converged)
        return kExitNoConvergence;
    return 0;
}

int run_fit_verb(const Options& o, FitMode mode) {
    const auto config = build_config(o);
    const auto snapshot = load_snapshot(o, config);
    const auto run = run_fit(snapshot, mode, config);
    const int status = check_fit(run.result, config);
    if (status == kExitInput)
        return status;
    std::ostringstream fit_text, report_text;
    write_fit_result(fit_text, run.result);
    write_instrument_report(report_text, run.report);
    if (o.out.empty()) {
        std::cout << fit_text.str() << "\n" << report_text.str();
    } else {
        emit(o, "fit.csv", fit_text.str());
        emit(o, "instruments.csv", report_text.str());
    }
    return status;
}

int run_value_verb(const Options& o) {
    if (o.fit.empty())
        throw InputError("value needs --fit <file> from a previous fit");
    const auto config = build_config(o);
    const auto snapshot = load_snapshot(o, config);
    const auto fit = load_fit(o.fit);
    const auto mode = std::holds_alternative<RatingGrid>(fit.params) ? FitMode::rating_grid
                                                                      : FitMode::single_name;
    std::ostringstream text;
    write_value_report(text, snapshot, fit, config.recovery_model(mode), config);
    emit(o, "value.csv", text.str());
    return 0;
}

int run_spread_verb(const Options& o) {
    const auto config = build_config(o);
    const auto snapshot = load_snapshot(o, config);
    std::optional<RiskfreeCurve> swap;
    if (!o.swap_curve.empty()) {
        std::ifstream in(o.swap_curve);
        if (!in)
            throw InputError("cannot open '" + o.swap_curve + "'");
        swap = parse_riskfree(in, config.riskfree_compounding);
    }
    std::ostringstream text;
    write_spread_report(text, snapshot, config.recovery_model(FitMode::single_name), config,
                        swap ? &*swap : nullptr);
    emit(o, "spreads.csv", text.str());
    return 0;
}

int run_analytics_verb(const Options& o) {
    const auto config = build_config(o);
    const auto snapshot = load_snapshot(o, config);
    FitResult fit = [&] {
        if (!o.fit.empty())
            return load_fit(o.fit);
        const auto run = run_fit(snapshot, parse_mode(o.mode, FitMode::single_name), config);
        return run.result;
    }();
    if (o.fit.empty()) {
        if (const int status = check_fit(fit, config); status != 0)
            return status;
    }
    const auto mode = std::holds_alternative<RatingGrid>(fit.params) ? FitMode::rating_grid
                                                                      : FitMode::single_name;
    std::optional<std::map<int, TransitionInputs>> transitions;
    if (!o.transitions.empty()) {
        std::ifstream in(o.transitions);
        if (!in)
            throw InputError("cannot open '" + o.transitions + "'");
        transitions = parse_transitions(in);
    }
    std::ostringstream text;
    write_analytics_report(text, snapshot, fit, config.recovery_model(mode), config,
                           transitions ? &*transitions : nullptr);
    emit(o, "analytics.csv", text.str());
    return 0;
}

int run_history_verb(const Options& o) {
    if (o.snapshots.empty())
        throw InputError("history needs --snapshots <manifest>");
    const auto config = build_config(o);
    const auto mode = parse_mode(o.mode, FitMode::rating_grid);
    const auto sources = read_manifest(o.snapshots, config.riskfree_compounding);
    if (sources.empty())
        throw InputError("the manifest lists no snapshots");
    const auto history = run_history(sources, mode, config);
    std::ostringstream text;
    write_history(text, history);
    emit(o, "history.csv", text.str());
    for (const auto& [date, why] : history.failures)
        std::cerr << "skipped " << format_date(date) << ": " << why << "\n";
    if (!history.failures.empty())
        std::cerr << history.failures.size() << " of " << sources.size()
                  << " dates failed\n";
    return history.failures.size() == sources.size() ? kExitNoConvergence : 0;
}

void add_market_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--riskfree", o.riskfree, "Riskfree zero curve (tenor_years,zero_rate)");
    cmd->add_option("--bonds", o.bonds, "Bond quotes");
    cmd->add_option("--cds", o.cds, "CDS quotes");
    cmd->add_option("--sovereign", o.sovereign, "Sovereign par spreads (country,tenor_years,par_spread)");
}

void add_common_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "Run configuration (key = value)");
    cmd->add_option("--as-of", o.as_of, "Valuation date YYYY-MM-DD (default: today)");
    cmd->add_option("--recovery", o.recovery, "fixed:<r>, <r>, or schedule");
    cmd->add_option("--fix-c", o.fix_c, "Fix the shape parameter c");
    cmd->add_option("--em-alpha", o.em_alpha, "Sovereign adjustment: fit, fixed:<v>, or off");
    cmd->add_option("--horizon", o.horizon, "Return horizon in years");
    cmd->add_option("--convergence-fraction", o.convergence_fraction,
                    "Fraction of relative value assumed to converge");
    cmd->add_option("--grid-step", o.grid_step, "Quadrature step in years");
    cmd->add_option("--out", o.out, "Output directory (default: stdout)");
    cmd->add_flag("--allow-underdetermined", o.allow_underdetermined,
                  "Accept fits the instrument set cannot pin down");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit survival curves from bond and CDS quotes"};
    app.require_subcommand(1);
    Options o;

    auto* value = app.add_subcommand("value", "Model values on a previously fitted curve");
    auto* spread = app.add_subcommand("spread", "Yield, Z-spread, asset-swap and par-adjusted spreads");
    auto* fit = app.add_subcommand("fit", "Single-name curve fit");
    auto* fit_grid = app.add_subcommand("fit-grid", "Rating-grid curve fit");
    auto* analytics = app.add_subcommand("analytics", "Carry, rolldown and relative value");
    auto* history = app.add_subcommand("history", "Fits over a dated list of snapshots");

    for (auto* cmd : {value, spread, fit, fit_grid, analytics}) {
        add_market_options(cmd, o);
        add_common_options(cmd, o);
    }
    add_common_options(history, o);
    value->add_option("--fit", o.fit, "Fit result file")->required();
    analytics->add_option("--fit", o.fit, "Fit result file (default: fit now)");
    analytics->add_option("--mode", o.mode, "single or grid, when fitting now");
    analytics->add_option("--transitions", o.transitions, "Rating transition matrix");
    spread->add_option("--swap-curve", o.swap_curve, "Swap zero curve for asset-swap spreads");
    history->add_option("--snapshots", o.snapshots, "Manifest of dated snapshots")->required();
    history->add_option("--mode", o.mode, "single or grid (default grid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    try {
        if (value->parsed())
            return run_value_verb(o);
        if (spread->parsed())
            return run_spread_verb(o);
        if (fit->parsed())
            return run_fit_verb(o, FitMode::single_name);
        if (fit_grid->parsed())
            return run_fit_verb(o, FitMode::rating_grid);
        if (analytics->parsed())
            return run_analytics_verb(o);
        return run_history_verb(o);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DomainError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
