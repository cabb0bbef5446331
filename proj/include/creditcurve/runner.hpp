#pragma once

#include "creditcurve/analytics.hpp"
#include "creditcurve/fitting.hpp"
#include "creditcurve/universe.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace credit {

enum class FitMode { single_name, rating_grid };

/// Settings for one CLI run. Populated from a flat `key = value` file and
/// then from command-line flags.
struct RunConfig {
    std::optional<Date> as_of;
    Compounding riskfree_compounding = Compounding::periodic(2);
    /// "fixed:<r>", a bare number, or "schedule". Unset: schedule for
    /// rating-grid fits, fixed 0.40 otherwise.
    std::optional<std::string> recovery;
    FitConfig fit;
    int yield_frequency = kDefaultYieldFrequency;
    double horizon = 0.25;
    double convergence_fraction = 1.0;
    std::vector<double> report_tenors{5.0, 10.0};
    std::vector<Rating> report_ratings{Rating(3), Rating(6), Rating(9), Rating(12), Rating(15)};
    bool allow_underdetermined = false;

    RecoveryModel recovery_model(FitMode mode) const;
};

/// Applies one setting; throws InputError naming the key on bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   std::size_t line = 0);
RunConfig parse_run_config(std::istream& in);

/// Fixed-point formatting that never prints "-0".
std::string format_fixed(double value, int decimals);

// --- fit results ----------------------------------------------------------

/// `key,value` text with round-trip precision.
void write_fit_result(std::ostream& out, const FitResult& result);
FitResult read_fit_result(std::istream& in);

struct InstrumentReportRow {
    std::string id;
    std::string type; // "bond" or "cds"
    std::string rating;
    double tenor = 0.0;
    double price = 0.0;        // bond price or quoted CDS price, per 100
    double recovery = 0.0;
    double sbar = 0.0;         // par-adjusted spread
    double model_spread = 0.0; // s(T) on the fitted curve (+ alpha s_sov when EM)
    double residual = 0.0;     // points per 100, positive = cheap
    std::string signal;        // cheap / rich / fair
};

std::vector<InstrumentReportRow> instrument_report(const UniverseSnapshot& snapshot,
                                                   const FitResult& fit,
                                                   const RecoveryModel& recovery,
                                                   const FitConfig& config);
void write_instrument_report(std::ostream& out, const std::vector<InstrumentReportRow>& rows);

struct FitRun {
    FitResult result;
    std::vector<InstrumentReportRow> report;
};

FitRun run_fit(const UniverseSnapshot& snapshot, FitMode mode, const RunConfig& config);

// --- other verbs ------------------------------------------------------------

/// Model values of every instrument on a given curve.
void write_value_report(std::ostream& out, const UniverseSnapshot& snapshot, const FitResult& fit,
                        const RecoveryModel& recovery, const RunConfig& config);

/// Swap inputs for the asset-swap spread: par rate and PV01s from a swap
/// discount curve (semiannual fixed leg, quarterly floating leg).
AssetSwapInputs swap_inputs_from_curve(const RiskfreeCurve& swap_curve, double tenor);

/// Market-only spread measures: yield, Z-spread, asset-swap spread (when a
/// swap curve is given), and the par-adjusted spread on the instrument's own
/// flat hazard curve.
void write_spread_report(std::ostream& out, const UniverseSnapshot& snapshot,
                         const RecoveryModel& recovery, const RunConfig& config,
                         const RiskfreeCurve* swap_curve);

/// Transition rows by starting rating, read from `from,to,probability`
/// (`to` may be "D" for default).
std::map<int, TransitionInputs> parse_transitions(std::istream& in);

void write_analytics_report(std::ostream& out, const UniverseSnapshot& snapshot,
                            const FitResult& fit, const RecoveryModel& recovery,
                            const RunConfig& config,
                            const std::map<int, TransitionInputs>* transitions);

// --- history ----------------------------------------------------------------

struct SnapshotSource {
    Date as_of;
    std::function<UniverseSnapshot()> load;
};

/// Manifest columns: as_of, riskfree, bonds, cds, sovereign (paths relative
/// to the manifest's directory; bonds/cds/sovereign may be empty).
std::vector<SnapshotSource> read_manifest(const std::filesystem::path& manifest,
                                          Compounding compounding);

struct HistoryRow {
    Date as_of;
    std::string series;
    std::string key;
    double value;
};

struct HistoryOutput {
    std::vector<HistoryRow> rows;
    std::vector<std::pair<Date, std::string>> failures;
};

/// Fits every snapshot in order. A date that fails to load or converge is
/// recorded in `failures` and skipped.
HistoryOutput run_history(const std::vector<SnapshotSource>& snapshots, FitMode mode,
                          const RunConfig& config);
void write_history(std::ostream& out, const HistoryOutput& history);

} // namespace credit
