#pragma once

#include "creditcurve/ratecurve.hpp"
#include "creditcurve/survival.hpp"
#include "creditcurve/valuation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace credit {

/// Issue size assumed for liquid CDS, in millions.
inline constexpr double kLiquidCdsIssueSize = 1000.0;

/// A quoted instrument together with what the fitter needs to know about it.
struct Instrument {
    std::string id;
    InstrumentTerms terms;
    double issue_size = kLiquidCdsIssueSize; // amount outstanding, millions
    std::optional<Rating> rating;            // effective rating (internal override applied)
    std::optional<double> recovery_override;
    std::optional<double> sovereign_spread;  // par spread of the sovereign at this tenor

    double tenor() const { return tenor_of(terms); }
};

/// Either one recovery rate for everything or the rating-linked schedule.
/// A per-instrument override always wins.
class RecoveryModel {
public:
    static RecoveryModel fixed(double recovery);
    static RecoveryModel schedule(RecoverySchedule schedule = RecoverySchedule{});

    double for_rating(std::optional<Rating> rating) const;
    double for_instrument(const Instrument& inst) const;

    bool is_fixed() const { return std::holds_alternative<double>(rule_); }
    std::string describe() const;

private:
    explicit RecoveryModel(std::variant<double, RecoverySchedule> rule) : rule_(rule) {}
    std::variant<double, RecoverySchedule> rule_;
};

enum class LossKind { robust, squared };
enum class WeightMode { issue_size, uniform };
enum class EmMode { off, fit, fixed };

/// sqrt(1 + x^2) - 1
double robust_loss(double x);
double loss_value(LossKind kind, double x);

struct FitConfig {
    WeightMode weighting = WeightMode::issue_size;
    bool duration_weighting = false;
    LossKind loss = LossKind::robust;
    double shape_lower = RatingGrid::kMinShape;
    double shape_upper = RatingGrid::kMaxShape;
    std::optional<double> fixed_shape;
    int multistart = 5;
    std::uint64_t seed = 1;
    double simplex_tolerance = 1e-11;
    int max_iterations = 40000;
    double grid_step = kDefaultGridStep;
    EmMode em = EmMode::off;
    double em_alpha = 0.0;                // used when em == fixed
    bool rating_dependent_alpha = false;  // alpha(r) = alpha * min(1, r/9)

    void validate() const;
};

struct FitDiagnostics {
    int iterations = 0;
    int evaluations = 0;
    int starts = 0;
    bool converged = false;
    bool underdetermined = false;
    std::string message;
    /// Best objective after each simplex iteration of the winning start.
    std::vector<double> descent_log;
};

struct FitResult {
    std::variant<SurvivalParams, RatingGrid> params;
    std::optional<double> alpha;
    std::vector<double> residuals; // model minus market, points per 100
    double objective = 0.0;
    FitDiagnostics diagnostics;

    /// Survival curve applying to an instrument of the given rating.
    SurvivalParams curve_for(std::optional<Rating> rating) const;
};

/// dP = 100 [1 - P/100 + (c - r^(T) - s(T)) Pi(T)] for a bond; for a CDS the
/// r^ term is dropped and 1 - P_cds/100 is the upfront.
double price_residual(const InstrumentTerms& terms, const SurvivalParams& curve,
                      const RiskfreeCurve& riskfree, double recovery,
                      double grid_step = kDefaultGridStep);

/// As price_residual with s(T) replaced by s(T) + alpha * s_sov(T).
double price_residual_em(const InstrumentTerms& terms, const SurvivalParams& curve,
                         const RiskfreeCurve& riskfree, double recovery, double sovereign_spread,
                         double alpha, double grid_step = kDefaultGridStep);

/// alpha(r) under the config's rating dependence rule.
double effective_alpha(double alpha, std::optional<Rating> rating, bool rating_dependent);

/// Fits (a, b, c) of one issuer curve. With fewer than two distinct tenors
/// the fit ties a = b and fixes c, and flags the result as underdetermined.
FitResult fit_single_name(std::span<const Instrument> instruments, const RiskfreeCurve& riskfree,
                          const RecoveryModel& recovery, const FitConfig& config);

/// Fits the seven-parameter rating grid (plus alpha when the EM option is on).
/// Every instrument must carry a rating. A universe covering a single rating
/// falls back to a single-name fit with the other anchors set by a fixed
/// geometric prior, and is flagged as underdetermined.
FitResult fit_rating_grid(std::span<const Instrument> instruments, const RiskfreeCurve& riskfree,
                          const RecoveryModel& recovery, const FitConfig& config);

/// Anchor spacing used when only one rating is observed: hazards scale by this
/// factor every six notches.
inline constexpr double kPriorHazardRatioPerSixNotches = 3.0;

} // namespace credit
