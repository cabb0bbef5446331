#include "creditcurve/runner.hpp"

#include "creditcurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace credit {

namespace {

std::string trim_copy(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& value, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (value.empty() || used != value.size() || !std::isfinite(v))
        throw InputError("setting '" + key + "': expected a number, got '" + value + "'", line);
    return v;
}

int to_int(const std::string& key, const std::string& value, std::size_t line) {
    const double v = to_number(key, value, line);
    if (v != std::floor(v))
        throw InputError("setting '" + key + "': expected an integer, got '" + value + "'", line);
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value, std::size_t line) {
    if (value == "1" || value == "true" || value == "yes" || value == "on")
        return true;
    if (value == "0" || value == "false" || value == "no" || value == "off")
        return false;
    throw InputError("setting '" + key + "': expected true/false, got '" + value + "'", line);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim_copy(item); !t.empty())
            out.push_back(t);
    return out;
}

std::string format_exact(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

constexpr double kBp = 1e4;

std::string signal_for(double residual) {
    if (residual > 1e-6)
        return "cheap";
    if (residual < -1e-6)
        return "rich";
    return "fair";
}

std::string rating_text(const std::optional<Rating>& r) {
    return r ? std::string(r->symbol()) : std::string();
}

std::string type_of(const Instrument& inst) {
    return std::holds_alternative<BondSpec>(inst.terms) ? "bond" : "cds";
}

double alpha_of(const FitResult& fit) {
    return fit.alpha.value_or(0.0);
}

} // namespace

RecoveryModel RunConfig::recovery_model(FitMode mode) const {
    if (!recovery)
        return mode == FitMode::rating_grid ? RecoveryModel::schedule()
                                            : RecoveryModel::fixed(0.40);
    if (*recovery == "schedule")
        return RecoveryModel::schedule();
    std::string value = *recovery;
    if (value.rfind("fixed:", 0) == 0)
        value = value.substr(6);
    const double r = to_number("recovery", value, 0);
    if (!(r >= 0.0 && r < 1.0))
        throw InputError("setting 'recovery': value must lie in [0, 1)");
    return RecoveryModel::fixed(r);
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& raw,
                   std::size_t line) {
    const std::string value = trim_copy(raw);
    auto& fit = config.fit;
    if (key == "as_of") {
        config.as_of = parse_date(value, line);
    } else if (key == "compounding") {
        if (value == "continuous")
            config.riskfree_compounding = Compounding::continuous();
        else
            config.riskfree_compounding = Compounding::periodic(to_int(key, value, line));
    } else if (key == "recovery") {
        config.recovery = value;
        (void)config.recovery_model(FitMode::single_name);
    } else if (key == "loss") {
        if (value == "robust")
            fit.loss = LossKind::robust;
        else if (value == "squared")
            fit.loss = LossKind::squared;
        else
            throw InputError("setting 'loss': expected robust or squared", line);
    } else if (key == "weighting") {
        if (value == "issue_size")
            fit.weighting = WeightMode::issue_size;
        else if (value == "uniform")
            fit.weighting = WeightMode::uniform;
        else
            throw InputError("setting 'weighting': expected issue_size or uniform", line);
    } else if (key == "duration_weighting") {
        fit.duration_weighting = to_bool(key, value, line);
    } else if (key == "fix_c") {
        if (value == "off" || value == "none")
            fit.fixed_shape.reset();
        else
            fit.fixed_shape = to_number(key, value, line);
    } else if (key == "c_lower") {
        fit.shape_lower = to_number(key, value, line);
    } else if (key == "c_upper") {
        fit.shape_upper = to_number(key, value, line);
    } else if (key == "multistart") {
        fit.multistart = to_int(key, value, line);
    } else if (key == "seed") {
        fit.seed = static_cast<std::uint64_t>(to_number(key, value, line));
    } else if (key == "simplex_tolerance") {
        fit.simplex_tolerance = to_number(key, value, line);
    } else if (key == "max_iterations") {
        fit.max_iterations = to_int(key, value, line);
    } else if (key == "grid_step") {
        fit.grid_step = to_number(key, value, line);
    } else if (key == "em_alpha") {
        if (value == "off") {
            fit.em = EmMode::off;
        } else if (value == "fit") {
            fit.em = EmMode::fit;
        } else {
            std::string v = value.rfind("fixed:", 0) == 0 ? value.substr(6) : value;
            fit.em = EmMode::fixed;
            fit.em_alpha = to_number(key, v, line);
        }
    } else if (key == "rating_dependent_alpha") {
        fit.rating_dependent_alpha = to_bool(key, value, line);
    } else if (key == "yield_frequency") {
        config.yield_frequency = to_int(key, value, line);
    } else if (key == "horizon") {
        config.horizon = to_number(key, value, line);
    } else if (key == "convergence_fraction") {
        config.convergence_fraction = to_number(key, value, line);
    } else if (key == "tenors") {
        config.report_tenors.clear();
        for (const auto& t : split_list(value))
            config.report_tenors.push_back(to_number(key, t, line));
    } else if (key == "ratings") {
        config.report_ratings.clear();
        for (const auto& r : split_list(value)) {
            try {
                config.report_ratings.push_back(Rating::from_symbol(r));
            } catch (const InputError& e) {
                throw InputError(e.what(), line);
            }
        }
    } else if (key == "allow_underdetermined") {
        config.allow_underdetermined = to_bool(key, value, line);
    } else {
        throw InputError("unknown setting '" + key + "'", line);
    }
}

RunConfig parse_run_config(std::istream& in) {
    RunConfig config;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim_copy(raw.substr(0, hash));
        if (content.empty())
            continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw InputError("expected 'key = value'", line);
        apply_setting(config, trim_copy(content.substr(0, eq)), content.substr(eq + 1), line);
    }
    return config;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
        s.erase(0, 1);
    return s;
}

void write_fit_result(std::ostream& out, const FitResult& result) {
    out << "# creditcurve fit result; hazards and shape per annum\n";
    out << "key,value\n";
    if (const auto* p = std::get_if<SurvivalParams>(&result.params)) {
        out << "model,single_name\n";
        out << "a," << format_exact(p->a) << "\n";
        out << "b," << format_exact(p->b) << "\n";
        out << "c," << format_exact(p->c) << "\n";
    } else {
        const auto& grid = std::get<RatingGrid>(result.params);
        out << "model,rating_grid\n";
        const char* names[] = {"AA", "BBB", "B"};
        for (std::size_t k = 0; k < 3; ++k) {
            out << "a_" << names[k] << "," << format_exact(grid.anchors()[k].a) << "\n";
            out << "b_" << names[k] << "," << format_exact(grid.anchors()[k].b) << "\n";
        }
        out << "c," << format_exact(grid.shape()) << "\n";
    }
    if (result.alpha)
        out << "alpha," << format_exact(*result.alpha) << "\n";
    out << "objective," << format_exact(result.objective) << "\n";
    out << "converged," << (result.diagnostics.converged ? 1 : 0) << "\n";
    out << "underdetermined," << (result.diagnostics.underdetermined ? 1 : 0) << "\n";
    out << "iterations," << result.diagnostics.iterations << "\n";
    out << "evaluations," << result.diagnostics.evaluations << "\n";
    out << "starts," << result.diagnostics.starts << "\n";
}

FitResult read_fit_result(std::istream& in) {
    const auto table = read_csv(in);
    if (!table.column("key") || !table.column("value"))
        throw InputError("fit result file needs 'key,value' columns");
    std::map<std::string, std::string> kv;
    for (const auto& row : table.rows) {
        if (row.fields.size() < 2)
            throw InputError("fit result row needs a key and a value", row.line);
        kv[row.fields[0]] = row.fields[1];
    }
    auto num = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw InputError("fit result is missing '" + key + "'");
        return to_number(key, it->second, 0);
    };
    FitResult result{SurvivalParams{1.0, 1.0, 0.1}, std::nullopt, {}, 0.0, {}};
    const auto model = kv.count("model") ? kv["model"] : "";
    if (model == "single_name") {
        SurvivalParams p{num("a"), num("b"), num("c")};
        p.validate();
        result.params = p;
    } else if (model == "rating_grid") {
        result.params = RatingGrid({num("a_AA"), num("b_AA")}, {num("a_BBB"), num("b_BBB")},
                                   {num("a_B"), num("b_B")}, num("c"));
    } else {
        throw InputError("fit result has unknown model '" + model + "'");
    }
    if (kv.count("alpha"))
        result.alpha = num("alpha");
    result.objective = kv.count("objective") ? num("objective") : 0.0;
    result.diagnostics.converged = kv.count("converged") && num("converged") != 0.0;
    result.diagnostics.underdetermined =
        kv.count("underdetermined") && num("underdetermined") != 0.0;
    result.diagnostics.iterations = kv.count("iterations") ? static_cast<int>(num("iterations")) : 0;
    result.diagnostics.evaluations =
        kv.count("evaluations") ? static_cast<int>(num("evaluations")) : 0;
    result.diagnostics.starts = kv.count("starts") ? static_cast<int>(num("starts")) : 0;
    return result;
}

std::vector<InstrumentReportRow> instrument_report(const UniverseSnapshot& snapshot,
                                                   const FitResult& fit,
                                                   const RecoveryModel& recovery,
                                                   const FitConfig& config) {
    std::vector<InstrumentReportRow> rows;
    const double alpha = alpha_of(fit);
    for (const auto& inst : snapshot.instruments) {
        InstrumentReportRow row;
        row.id = inst.id;
        row.type = type_of(inst);
        row.rating = rating_text(inst.rating);
        row.tenor = inst.tenor();
        row.recovery = recovery.for_instrument(inst);
        const auto curve = fit.curve_for(inst.rating);
        const auto k = kernels(snapshot.riskfree, curve, row.tenor, config.grid_step);
        const double a = effective_alpha(alpha, inst.rating, config.rating_dependent_alpha);
        const double sov = inst.sovereign_spread.value_or(0.0);
        row.model_spread = par_cds_spread(k, row.recovery) + a * sov;
        if (const auto* bond = std::get_if<BondSpec>(&inst.terms)) {
            row.price = bond->price;
            row.sbar = par_adjusted_spread(*bond, k);
        } else {
            const auto& cds = std::get<CdsSpec>(inst.terms);
            row.price = cds_quoted_price(cds_upfront(cds, snapshot.riskfree, config.grid_step));
            row.sbar = par_adjusted_spread_cds(cds, k, snapshot.riskfree, config.grid_step);
        }
        row.residual = price_residual_em(inst.terms, curve, snapshot.riskfree, row.recovery, sov, a,
                                         config.grid_step);
        row.signal = signal_for(row.residual);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_instrument_report(std::ostream& out, const std::vector<InstrumentReportRow>& rows) {
    out << "id,type,rating,tenor_years,price_per100,recovery,par_adjusted_spread_bp,"
           "model_spread_bp,rv_bp,residual_pts,signal\n";
    for (const auto& r : rows) {
        out << r.id << ',' << r.type << ',' << r.rating << ',' << format_fixed(r.tenor, 6) << ','
            << format_fixed(r.price, 6) << ',' << format_fixed(r.recovery, 4) << ','
            << format_fixed(r.sbar * kBp, 4) << ',' << format_fixed(r.model_spread * kBp, 4) << ','
            << format_fixed((r.sbar - r.model_spread) * kBp, 4) << ','
            << format_fixed(r.residual, 6) << ',' << r.signal << "\n";
    }
}

FitRun run_fit(const UniverseSnapshot& snapshot, FitMode mode, const RunConfig& config) {
    const auto recovery = config.recovery_model(mode);
    FitRun run{mode == FitMode::single_name
                   ? fit_single_name(snapshot.instruments, snapshot.riskfree, recovery, config.fit)
                   : fit_rating_grid(snapshot.instruments, snapshot.riskfree, recovery, config.fit),
               {}};
    run.report = instrument_report(snapshot, run.result, recovery, config.fit);
    return run;
}

void write_value_report(std::ostream& out, const UniverseSnapshot& snapshot, const FitResult& fit,
                        const RecoveryModel& recovery, const RunConfig& config) {
    out << "id,type,tenor_years,price_per100,model_price_per100,residual_pts,"
           "par_adjusted_spread_bp,model_spread_bp,rpv01_years,default_leg,weighted_forward_pct,"
           "risky_discount\n";
    const double step = config.fit.grid_step;
    for (const auto& inst : snapshot.instruments) {
        const auto curve = fit.curve_for(inst.rating);
        const double rec = recovery.for_instrument(inst);
        const auto k = kernels(snapshot.riskfree, curve, inst.tenor(), step);
        const double model_spread = par_cds_spread(k, rec);
        double price, model_price, sbar;
        if (const auto* bond = std::get_if<BondSpec>(&inst.terms)) {
            BondSpec priced = *bond;
            priced.recovery = rec;
            price = bond->price;
            model_price = bond_model_price(priced, k);
            sbar = par_adjusted_spread(*bond, k);
        } else {
            const auto& cds = std::get<CdsSpec>(inst.terms);
            price = cds_quoted_price(cds_upfront(cds, snapshot.riskfree, step));
            model_price = cds_quoted_price((model_spread - cds.coupon) * k.rpv01);
            sbar = par_adjusted_spread_cds(cds, k, snapshot.riskfree, step);
        }
        out << inst.id << ',' << type_of(inst) << ',' << format_fixed(inst.tenor(), 6) << ','
            << format_fixed(price, 6) << ',' << format_fixed(model_price, 6) << ','
            << format_fixed(model_price - price, 6) << ',' << format_fixed(sbar * kBp, 4) << ','
            << format_fixed(model_spread * kBp, 4) << ',' << format_fixed(k.rpv01, 6) << ','
            << format_fixed(k.default_leg, 6) << ',' << format_fixed(k.weighted_forward * 100, 6)
            << ',' << format_fixed(k.risky_discount, 6) << "\n";
    }
}

AssetSwapInputs swap_inputs_from_curve(const RiskfreeCurve& swap_curve, double tenor) {
    auto annuity = [&](int per_year) {
        double pv = 0.0;
        double t = tenor;
        while (t > 1e-9) {
            const double accrual = std::min(1.0 / per_year, t);
            pv += accrual * swap_curve.discount(t);
            t -= 1.0 / per_year;
        }
        return pv;
    };
    AssetSwapInputs in{};
    in.fixed_pv01 = annuity(2);
    in.float_pv01 = annuity(4);
    in.par_swap_rate = (1.0 - swap_curve.discount(tenor)) / in.fixed_pv01;
    return in;
}

void write_spread_report(std::ostream& out, const UniverseSnapshot& snapshot,
                         const RecoveryModel& recovery, const RunConfig& config,
                         const RiskfreeCurve* swap_curve) {
    out << "id,type,tenor_years,price_per100,yield_pct,z_spread_bp,asset_swap_spread_bp,"
           "upfront_pct,flat_hazard,par_adjusted_spread_bp\n";
    const double step = config.fit.grid_step;
    for (const auto& inst : snapshot.instruments) {
        const double rec = recovery.for_instrument(inst);
        std::string yield, zs, asw, upfront, hazard, sbar;
        double price;
        std::optional<ExactFit> fit;
        try {
            fit = exact_fit(inst.terms, SurvivalParams::flat(0.01), snapshot.riskfree, rec, step);
        } catch (const NumericalError&) {
        }
        if (const auto* bond = std::get_if<BondSpec>(&inst.terms)) {
            price = bond->price;
            yield = format_fixed(
                100 * yield_from_price(bond->coupon, bond->tenor, bond->price,
                                       config.yield_frequency), 6);
            zs = format_fixed(z_spread(*bond, snapshot.riskfree, config.yield_frequency) * kBp, 4);
            if (swap_curve)
                asw = format_fixed(
                    asset_swap_spread(*bond, swap_inputs_from_curve(*swap_curve, bond->tenor)) *
                        kBp, 4);
            if (fit) {
                const auto k = kernels(snapshot.riskfree, fit->params, bond->tenor, step);
                sbar = format_fixed(par_adjusted_spread(*bond, k) * kBp, 4);
            }
        } else {
            const auto& cds = std::get<CdsSpec>(inst.terms);
            const double u = cds_upfront(cds, snapshot.riskfree, step);
            price = cds_quoted_price(u);
            upfront = format_fixed(100 * u, 6);
            if (fit) {
                const auto k = kernels(snapshot.riskfree, fit->params, cds.tenor, step);
                sbar = format_fixed(par_adjusted_spread_cds(cds, k, snapshot.riskfree, step) * kBp, 4);
            }
        }
        if (fit)
            hazard = format_fixed(fit->params.a, 8);
        out << inst.id << ',' << type_of(inst) << ',' << format_fixed(inst.tenor(), 6) << ','
            << format_fixed(price, 6) << ',' << yield << ',' << zs << ',' << asw << ','
            << upfront << ',' << hazard << ',' << sbar << "\n";
    }
}

std::map<int, TransitionInputs> parse_transitions(std::istream& in) {
    const auto table = read_csv(in);
    for (const char* col : {"from", "to", "probability"})
        if (!table.column(col))
            throw InputError(std::string("transition file is missing column '") + col + "'");
    const auto from_col = *table.column("from");
    const auto to_col = *table.column("to");
    const auto p_col = *table.column("probability");
    std::map<int, TransitionInputs> rows;
    for (const auto& row : table.rows) {
        if (row.fields.size() <= std::max({from_col, to_col, p_col}))
            throw InputError("transition row is incomplete", row.line);
        Rating from{1};
        try {
            from = Rating::from_symbol(row.fields[from_col]);
        } catch (const InputError& e) {
            throw InputError(e.what(), row.line);
        }
        auto& t = rows[from.index()];
        t.probabilities.resize(Rating::kMax, 0.0);
        const double p = to_number("probability", row.fields[p_col], row.line);
        if (row.fields[to_col] == "D") {
            t.default_probability += p;
        } else {
            try {
                t.probabilities[static_cast<std::size_t>(
                    Rating::from_symbol(row.fields[to_col]).index() - 1)] += p;
            } catch (const InputError& e) {
                throw InputError(e.what(), row.line);
            }
        }
    }
    return rows;
}

void write_analytics_report(std::ostream& out, const UniverseSnapshot& snapshot,
                            const FitResult& fit, const RecoveryModel& recovery,
                            const RunConfig& config,
                            const std::map<int, TransitionInputs>* transitions) {
    out << "id,type,rating,tenor_years,horizon_years,carry_pts,rolldown_pts,rv_pts,total_pts,"
           "model_carry_pts,model_rv_pts,model_total_pts,expected_total_pts,default_pts\n";
    const double step = config.fit.grid_step;
    const double phi = config.convergence_fraction;
    const auto* grid = std::get_if<RatingGrid>(&fit.params);
    for (std::size_t i = 0; i < snapshot.instruments.size(); ++i) {
        const auto& inst = snapshot.instruments[i];
        out << inst.id << ',' << type_of(inst) << ',' << rating_text(inst.rating) << ','
            << format_fixed(inst.tenor(), 6) << ',' << format_fixed(config.horizon, 6);
        if (!(config.horizon < inst.tenor())) {
            out << ",,,,,,,,,\n";
            continue;
        }
        const double rec = recovery.for_instrument(inst);
        const auto in = horizon_inputs(inst.terms, fit.curve_for(inst.rating), snapshot.riskfree,
                                       rec, config.horizon, step);
        const auto standard = decompose(in, DecompositionVariant::standard, phi);
        out << ',' << format_fixed(100 * standard.carry, 6) << ','
            << format_fixed(100 * standard.rolldown, 6) << ',' << format_fixed(100 * standard.rv, 6)
            << ',' << format_fixed(100 * standard.total, 6);
        if (phi == 1.0) {
            const auto model = decompose(in, DecompositionVariant::model_carry, phi);
            out << ',' << format_fixed(100 * model.carry, 6) << ','
                << format_fixed(100 * model.rv, 6) << ',' << format_fixed(100 * model.total, 6);
        } else {
            out << ",,,";
        }
        std::optional<ExpectedReturn> expected;
        if (transitions && grid && inst.rating) {
            if (const auto it = transitions->find(inst.rating->index()); it != transitions->end()) {
                auto row = it->second;
                row.default_loss = 1.0 - rec;
                expected = expected_return_with_transitions(inst.terms, *inst.rating, *grid,
                                                            snapshot.riskfree, recovery, row,
                                                            config.horizon, phi, step);
            }
        }
        if (expected)
            out << ',' << format_fixed(100 * expected->total, 6) << ','
                << format_fixed(100 * expected->default_contribution, 6) << "\n";
        else
            out << ",,\n";
    }
}

std::vector<SnapshotSource> read_manifest(const std::filesystem::path& manifest,
                                          Compounding compounding) {
    std::ifstream in(manifest);
    if (!in)
        throw InputError("cannot open '" + manifest.string() + "'");
    const auto table = read_csv(in);
    for (const char* col : {"as_of", "riskfree"})
        if (!table.column(col))
            throw InputError(std::string("manifest is missing column '") + col + "'");
    const auto base = manifest.parent_path();
    auto field = [&](const CsvTable::Row& row,
                     const char* name) -> std::optional<std::filesystem::path> {
        const auto idx = table.column(name);
        if (!idx || *idx >= row.fields.size() || row.fields[*idx].empty())
            return std::nullopt;
        return base / row.fields[*idx];
    };
    std::vector<SnapshotSource> out;
    for (const auto& row : table.rows) {
        const auto as_of = parse_date(row.fields[*table.column("as_of")], row.line);
        UniversePaths paths{*field(row, "riskfree"), field(row, "bonds"), field(row, "cds"),
                            field(row, "sovereign")};
        out.push_back({as_of, [paths, as_of, compounding] {
                           return load_universe(paths, as_of, compounding);
                       }});
    }
    return out;
}

HistoryOutput run_history(const std::vector<SnapshotSource>& snapshots, FitMode mode,
                          const RunConfig& config) {
    HistoryOutput out;
    const auto recovery = config.recovery_model(mode);
    for (const auto& source : snapshots) {
        try {
            const auto snapshot = source.load();
            const auto run = run_fit(snapshot, mode, config);
            if (!run.result.diagnostics.converged)
                throw NumericalError("fit did not converge");
            auto emit = [&](std::string series, std::string key, double value) {
                out.rows.push_back({source.as_of, std::move(series), std::move(key), value});
            };
            std::ostringstream params;
            write_fit_result(params, run.result);
            std::istringstream lines(params.str());
            const auto table = read_csv(lines);
            for (const auto& row : table.rows) {
                const auto& key = row.fields[0];
                if (key == "model" || key == "converged" || key == "underdetermined" ||
                    key == "iterations" || key == "evaluations" || key == "starts")
                    continue;
                emit("param", key, std::stod(row.fields[1]));
            }
            auto tenor_label = [](double t) { return format_fixed(t, 2) + "y"; };
            for (double t : config.report_tenors) {
                if (mode == FitMode::single_name) {
                    const auto k = kernels(snapshot.riskfree, run.result.curve_for(std::nullopt), t,
                                           config.fit.grid_step);
                    emit("model_spread_bp", tenor_label(t),
                         par_cds_spread(k, recovery.for_rating(std::nullopt)) * kBp);
                } else {
                    for (const auto& r : config.report_ratings) {
                        const auto k = kernels(snapshot.riskfree, run.result.curve_for(r), t,
                                               config.fit.grid_step);
                        emit("model_spread_bp", std::string(r.symbol()) + "@" + tenor_label(t),
                             par_cds_spread(k, recovery.for_rating(r)) * kBp);
                    }
                }
            }
            for (const auto& row : run.report) {
                emit("rv_bp", row.id, (row.sbar - row.model_spread) * kBp);
                emit("residual_pts", row.id, row.residual);
            }
        } catch (const std::exception& e) {
            out.failures.emplace_back(source.as_of, e.what());
        }
    }
    return out;
}

void write_history(std::ostream& out, const HistoryOutput& history) {
    out << "as_of,series,key,value\n";
    for (const auto& row : history.rows)
        out << format_date(row.as_of) << ',' << row.series << ',' << row.key << ','
            << format_exact(row.value) << "\n";
}

} // namespace credit
