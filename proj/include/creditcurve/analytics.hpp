#pragma once

#include "creditcurve/fitting.hpp"
#include "creditcurve/ratecurve.hpp"
#include "creditcurve/survival.hpp"
#include "creditcurve/valuation.hpp"

#include <vector>

namespace credit {

/// Which way to split total return between carry and relative value.
///   standard:    carry uses sbar, RV is monetised with Pi(T - dt)
///   model_carry: carry uses the model spread s^(T), RV with Pi(T)
enum class DecompositionVariant { standard, model_carry };

/// Spread and annuity inputs for one instrument over a horizon dt.
struct HorizonInputs {
    double carry_coupon;     // c' = c - r^(T) for a bond, c for a CDS
    double sbar;             // par-adjusted spread
    double model_spread;     // s^(T)
    double model_spread_end; // s^(T - dt)
    double rpv01;            // Pi(T)
    double rpv01_end;        // Pi(T - dt)
    double horizon;          // dt
    double tenor;            // T
};

struct ReturnDecomposition {
    double carry = 0.0;
    double rolldown = 0.0;
    double rv = 0.0;
    double total = 0.0;
    double horizon = 0.0;
    DecompositionVariant variant = DecompositionVariant::standard;
    double convergence_fraction = 1.0;
};

/// Evaluates c', sbar, s^ and the RPV01s for an instrument priced on `model`.
/// Throws DomainError unless 0 < dt < T.
HorizonInputs horizon_inputs(const InstrumentTerms& terms, const SurvivalParams& model,
                             const RiskfreeCurve& riskfree, double recovery, double horizon,
                             double grid_step = kDefaultGridStep);

/// c' dt + (s - c')(Pi(T) - Pi(T - dt)) with s = sbar (standard) or s^(T).
double carry(const HorizonInputs& in, DecompositionVariant variant = DecompositionVariant::standard);
/// (s^(T) - s^(T - dt)) Pi(T - dt)
double rolldown(const HorizonInputs& in);
/// (sbar - s^(T)) times Pi(T - dt) (standard) or Pi(T) (model_carry).
double relative_value(const HorizonInputs& in,
                      DecompositionVariant variant = DecompositionVariant::standard);
/// c' dt + (sbar - c') Pi(T) - (s^(T - dt) - c') Pi(T - dt)
double total_return(const HorizonInputs& in);

/// Carry + rolldown + fraction * RV. With a fraction of one the total equals
/// total_return() for either variant.
ReturnDecomposition decompose(const HorizonInputs& in, DecompositionVariant variant,
                              double convergence_fraction = 1.0);

/// One row of a rating transition matrix over the horizon: probabilities[r-1]
/// for rating r = 1..18, then `default_probability`.
struct TransitionInputs {
    std::vector<double> probabilities;
    double default_probability = 0.0;
    double default_loss = 0.6; // 1 - recovery on default

    /// Throws DomainError on negative entries, a wrong length, or a total
    /// differing from one by more than 1e-9.
    void validate() const;
};

struct ExpectedReturn {
    double total = 0.0;
    double carry = 0.0;    // probability-weighted components over surviving states
    double rolldown = 0.0;
    double rv = 0.0;
    double default_contribution = 0.0;
    std::vector<double> state_totals; // per destination rating, 1..18
};

/// Probability-weighted return summed over rating transitions.
///
/// In a surviving state j the instrument is repriced on curve j at T - dt:
///   total_j = c' dt + (sbar - c') Pi(T) - (s^_j(T-dt) - c') Pi_j(T-dt)
///             - (1 - fraction)(sbar - s^(T)) Pi_j(T-dt).
/// In default it returns (recovery - price)/100 plus half a period of carry
/// coupon, where price is the bond price or the quoted CDS price.
/// Only the standard decomposition is used.
ExpectedReturn expected_return_with_transitions(const InstrumentTerms& terms, Rating current,
                                                const RatingGrid& grid,
                                                const RiskfreeCurve& riskfree,
                                                const RecoveryModel& recovery,
                                                const TransitionInputs& transitions,
                                                double horizon, double convergence_fraction = 1.0,
                                                double grid_step = kDefaultGridStep);

} // namespace credit
