#pragma once

#include "creditcurve/ratecurve.hpp"
#include "creditcurve/survival.hpp"

#include <variant>

namespace credit {

inline constexpr double kDefaultGridStep = 1.0 / 12.0;
inline constexpr int kDefaultYieldFrequency = 2;
inline constexpr double kSnacQuotingRecovery = 0.40;

/// Trapezium approximations of the risky integrals on [0, T].
///
///   rpv01            Pi(T) = int_0^T B Q dt
///   default_leg      Xi(T) = -int_0^T B dQ
///   weighted_forward r^(T) = int f B Q dt / Pi(T)
///   risky_discount   B(T) Q(T)
///
/// The discretisation satisfies B(T)Q(T) + Xi + r^ Pi = 1 up to rounding.
struct RiskyKernels {
    double rpv01;
    double default_leg;
    double weighted_forward;
    double risky_discount;
    double tenor;
};

/// Grid {0, h, 2h, ..., T} with the final step shortened to land on T.
RiskyKernels kernels(const RiskfreeCurve& curve, const SurvivalParams& survival, double tenor,
                     double grid_step = kDefaultGridStep);

/// Bond with continuously paid coupons. `price` is the full (invoice) value
/// per 100 face; there is no separate accrued interest.
struct BondSpec {
    double coupon;  // per annum, decimal
    double tenor;   // years
    double price;   // per 100
    double recovery = 0.4;

    void validate() const;
};

struct TradedSpread {
    double value; // per annum
};
struct Upfront {
    double value; // per unit notional, paid by the protection buyer
};

/// Standard-coupon CDS quoted either as a traded spread or as an upfront.
struct CdsSpec {
    double coupon; // running coupon per annum, 0.01 or 0.05 by convention
    double tenor;
    std::variant<TradedSpread, Upfront> quote;
    double quoting_recovery = kSnacQuotingRecovery;

    void validate() const;
    bool has_standard_coupon() const;
};

using InstrumentTerms = std::variant<BondSpec, CdsSpec>;

double tenor_of(const InstrumentTerms& terms);

/// Model price per 100: 100 (c Pi + B(T)Q(T) + R Xi).
double bond_model_price(const BondSpec& bond, const RiskyKernels& k);

/// Price per 100 from a yield compounded m times a year, treating mT as if it
/// were an integer. The y -> 0 limit is handled by series expansion.
double price_from_yield(double coupon, double tenor, double yield, int frequency);
/// Inverse of price_from_yield by bracketed root finding (|dP| <= 1e-10).
double yield_from_price(double coupon, double tenor, double price, int frequency);

/// Coupon dates T, T - 1/m, T - 2/m, ... > 0, each paying c/m, principal at T.
/// Discounts each flow at z(T_j) + spread, m-compounded, z from the curve.
double price_with_zero_spread(double coupon, double tenor, const RiskfreeCurve& curve,
                              double spread, int frequency);
/// Constant add-on to the riskfree zero curve that reprices the bond.
double z_spread(const BondSpec& bond, const RiskfreeCurve& curve,
                int frequency = kDefaultYieldFrequency);

struct AssetSwapInputs {
    double par_swap_rate;
    double fixed_pv01;
    double float_pv01;
};

/// s_A = (1 - P/100 + (c - R) PV01_fixed) / PV01_float
double asset_swap_spread(const BondSpec& bond, const AssetSwapInputs& swap);

/// s(T) = (1 - R) Xi / Pi
double par_cds_spread(const RiskyKernels& k, double recovery);

/// sbar defined by P/100 - 1 = (c - r^ - sbar) Pi.
double par_adjusted_spread(const BondSpec& bond, const RiskyKernels& k);

/// RPV01 of the flat hazard curve lambda = s~ / (1 - R_quote) on the riskfree
/// curve (the quoting-convention annuity).
double snac_rpv01(double traded_spread, double tenor, double quoting_recovery,
                  const RiskfreeCurve& curve, double grid_step = kDefaultGridStep);

/// u = (s~ - c) Pi~. For an upfront quote, returns the quoted upfront.
double cds_upfront(const CdsSpec& cds, const RiskfreeCurve& curve,
                   double grid_step = kDefaultGridStep);

/// Traded spread whose conversion yields the given upfront.
double cds_traded_spread_from_upfront(double upfront, double coupon, double tenor,
                                      double quoting_recovery, const RiskfreeCurve& curve,
                                      double grid_step = kDefaultGridStep);

/// Quoted CDS "price": P_cds/100 - 1 = -u.
inline double cds_quoted_price(double upfront) { return 100.0 * (1.0 - upfront); }

/// sbar = c + u / Pi, with Pi from the model curve.
double par_adjusted_spread_cds(const CdsSpec& cds, const RiskyKernels& model,
                               const RiskfreeCurve& curve, double grid_step = kDefaultGridStep);

/// Model minus market in points per 100 (positive: instrument looks cheap).
/// Bonds: bond_model_price - P. CDS: 100 (u + (c - s(T)) Pi).
double model_minus_market(const InstrumentTerms& terms, const RiskfreeCurve& curve,
                          const SurvivalParams& survival, double recovery,
                          double grid_step = kDefaultGridStep);

/// Result of a one-degree-of-freedom refit.
struct ExactFit {
    SurvivalParams params;
    double scale; // multiplier applied to both a and b
};

/// Scales (a, b) of `base` by a common factor so the instrument is repriced
/// to within 1e-8 points. Throws NumericalError when no positive factor works.
ExactFit exact_fit(const InstrumentTerms& terms, const SurvivalParams& base,
                   const RiskfreeCurve& curve, double recovery,
                   double grid_step = kDefaultGridStep);

} // namespace credit
