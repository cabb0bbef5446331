#include "creditcurve/valuation.hpp"

#include "creditcurve/errors.hpp"
#include "detail/roots.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <vector>

namespace credit {

namespace {

void require_recovery(double recovery) {
    if (!(recovery >= 0.0 && recovery < 1.0))
        throw DomainError("recovery must lie in [0, 1)");
}

} // namespace

RiskyKernels kernels(const RiskfreeCurve& curve, const SurvivalParams& survival, double tenor,
                     double grid_step) {
    if (!(tenor > 0.0) || !std::isfinite(tenor))
        throw DomainError("kernels need a positive tenor");
    if (!(grid_step > 0.0))
        throw DomainError("kernels need a positive grid step");
    if (!(survival.a >= 0.0) || !(survival.b >= 0.0) || !(survival.c > 0.0))
        throw DomainError("survival parameters must be non-negative with c > 0");

    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(tenor / grid_step - 1e-9)));

    double pi = 0.0;
    double xi = 0.0;
    double rhat_pi = 0.0;
    double b_prev = 1.0;
    double q_prev = 1.0;
    for (std::size_t j = 1; j <= steps; ++j) {
        const double t = j == steps ? tenor : static_cast<double>(j) * grid_step;
        const double dt = t - (static_cast<double>(j - 1) * grid_step);
        const double b = curve.discount(t);
        const double q = survival_probability(survival, t);
        pi += 0.5 * (b_prev * q_prev + b * q) * dt;
        xi += 0.5 * (b_prev + b) * (q_prev - q);
        rhat_pi += (b_prev - b) * 0.5 * (q_prev + q);
        b_prev = b;
        q_prev = q;
    }
    return {pi, xi, rhat_pi / pi, b_prev * q_prev, tenor};
}

void BondSpec::validate() const {
    if (!(coupon >= 0.0))
        throw DomainError("bond coupon must be non-negative");
    if (!(tenor > 0.0))
        throw DomainError("bond tenor must be positive");
    if (!(price > 0.0))
        throw DomainError("bond price must be positive");
    require_recovery(recovery);
}

void CdsSpec::validate() const {
    if (!(tenor > 0.0))
        throw DomainError("CDS tenor must be positive");
    if (!(coupon >= 0.0))
        throw DomainError("CDS coupon must be non-negative");
    require_recovery(quoting_recovery);
    if (const auto* s = std::get_if<TradedSpread>(&quote); s && s->value < 0.0)
        throw DomainError("traded CDS spread must be non-negative");
}

bool CdsSpec::has_standard_coupon() const {
    return std::abs(coupon - 0.01) < 1e-12 || std::abs(coupon - 0.05) < 1e-12;
}

double tenor_of(const InstrumentTerms& terms) {
    return std::visit([](const auto& t) { return t.tenor; }, terms);
}

double bond_model_price(const BondSpec& bond, const RiskyKernels& k) {
    return 100.0 * (bond.coupon * k.rpv01 + k.risky_discount + bond.recovery * k.default_leg);
}

double price_from_yield(double coupon, double tenor, double yield, int frequency) {
    if (frequency < 1)
        throw DomainError("yield compounding frequency must be >= 1");
    const double m = frequency;
    if (!(yield > -m))
        throw DomainError("yield must exceed -m");
    const double log_df = -m * tenor * std::log1p(yield / m);
    const double df = std::exp(log_df);
    double annuity;
    if (std::abs(yield) < 1e-14) {
        // (1 - (1+y/m)^{-mT}) / y -> T - T (mT + 1) y / (2m) + O(y^2)
        annuity = tenor - tenor * (m * tenor + 1.0) * yield / (2.0 * m);
    } else {
        annuity = -std::expm1(log_df) / yield;
    }
    return 100.0 * (coupon * annuity + df);
}

double yield_from_price(double coupon, double tenor, double price, int frequency) {
    if (!(price > 0.0))
        throw DomainError("price must be positive");
    if (!(tenor > 0.0))
        throw DomainError("tenor must be positive");
    const double m = frequency;
    auto f = [&](double y) { return price_from_yield(coupon, tenor, y, frequency) - price; };
    double lo = -0.05;
    double hi = 0.5;
    if (!detail::expand_bracket(f, lo, hi, -0.999 * m, 1e4))
        throw NumericalError("yield_from_price: could not bracket the yield");
    return detail::solve_bracketed(f, lo, hi, "yield_from_price");
}

double price_with_zero_spread(double coupon, double tenor, const RiskfreeCurve& curve,
                              double spread, int frequency) {
    const auto compounding = Compounding::periodic(frequency);
    const double m = frequency;
    const auto flows = static_cast<int>(std::ceil(m * tenor - 1e-9));
    double pv = 0.0;
    for (int k = 0; k < flows; ++k) {
        const double t = tenor - k / m;
        const double rate = curve.zero_rate(t, compounding) + spread;
        if (!(rate > -m))
            return std::numeric_limits<double>::infinity();
        const double df = std::exp(-m * t * std::log1p(rate / m));
        pv += (coupon / m + (k == 0 ? 1.0 : 0.0)) * df;
    }
    return 100.0 * pv;
}

double z_spread(const BondSpec& bond, const RiskfreeCurve& curve, int frequency) {
    bond.validate();
    auto f = [&](double s) {
        return price_with_zero_spread(bond.coupon, bond.tenor, curve, s, frequency) - bond.price;
    };
    double lo = -0.02;
    double hi = 0.2;
    if (!detail::expand_bracket(f, lo, hi, -0.9 * frequency, 1e3))
        throw NumericalError("z_spread: could not bracket the spread");
    return detail::solve_bracketed(f, lo, hi, "z_spread");
}

double asset_swap_spread(const BondSpec& bond, const AssetSwapInputs& swap) {
    if (!(swap.fixed_pv01 > 0.0) || !(swap.float_pv01 > 0.0))
        throw DomainError("swap PV01s must be positive");
    return (1.0 - bond.price / 100.0 + (bond.coupon - swap.par_swap_rate) * swap.fixed_pv01) /
           swap.float_pv01;
}

double par_cds_spread(const RiskyKernels& k, double recovery) {
    return (1.0 - recovery) * k.default_leg / k.rpv01;
}

double par_adjusted_spread(const BondSpec& bond, const RiskyKernels& k) {
    return bond.coupon - k.weighted_forward - (bond.price / 100.0 - 1.0) / k.rpv01;
}

double snac_rpv01(double traded_spread, double tenor, double quoting_recovery,
                  const RiskfreeCurve& curve, double grid_step) {
    if (traded_spread < 0.0)
        throw DomainError("traded CDS spread must be non-negative");
    require_recovery(quoting_recovery);
    const double hazard = traded_spread / (1.0 - quoting_recovery);
    return kernels(curve, SurvivalParams::flat(hazard), tenor, grid_step).rpv01;
}

double cds_upfront(const CdsSpec& cds, const RiskfreeCurve& curve, double grid_step) {
    cds.validate();
    if (const auto* u = std::get_if<Upfront>(&cds.quote))
        return u->value;
    const double spread = std::get<TradedSpread>(cds.quote).value;
    return (spread - cds.coupon) *
           snac_rpv01(spread, cds.tenor, cds.quoting_recovery, curve, grid_step);
}

double cds_traded_spread_from_upfront(double upfront, double coupon, double tenor,
                                      double quoting_recovery, const RiskfreeCurve& curve,
                                      double grid_step) {
    require_recovery(quoting_recovery);
    auto f = [&](double s) {
        return (s - coupon) * snac_rpv01(s, tenor, quoting_recovery, curve, grid_step) - upfront;
    };
    double lo = 0.0;
    double hi = std::max(0.05, 2.0 * coupon);
    if (!detail::expand_bracket(f, lo, hi, 0.0, 1e3))
        throw NumericalError("upfront is outside the range attainable by a traded spread");
    return detail::solve_bracketed(f, lo, hi, "cds_traded_spread_from_upfront");
}

double par_adjusted_spread_cds(const CdsSpec& cds, const RiskyKernels& model,
                               const RiskfreeCurve& curve, double grid_step) {
    return cds.coupon + cds_upfront(cds, curve, grid_step) / model.rpv01;
}

double model_minus_market(const InstrumentTerms& terms, const RiskfreeCurve& curve,
                          const SurvivalParams& survival, double recovery, double grid_step) {
    const auto k = kernels(curve, survival, tenor_of(terms), grid_step);
    if (const auto* bond = std::get_if<BondSpec>(&terms)) {
        BondSpec priced = *bond;
        priced.recovery = recovery;
        return bond_model_price(priced, k) - bond->price;
    }
    const auto& cds = std::get<CdsSpec>(terms);
    const double u = cds_upfront(cds, curve, grid_step);
    return 100.0 * (u + (cds.coupon - par_cds_spread(k, recovery)) * k.rpv01);
}

ExactFit exact_fit(const InstrumentTerms& terms, const SurvivalParams& base,
                   const RiskfreeCurve& curve, double recovery, double grid_step) {
    base.validate();
    require_recovery(recovery);
    std::visit([](const auto& t) { t.validate(); }, terms);

    auto gap = [&](double log_scale) {
        return model_minus_market(terms, curve, base.scaled(std::exp(log_scale)), recovery,
                                  grid_step);
    };
    double lo = -1.0;
    double hi = 1.0;
    if (!detail::expand_bracket(gap, lo, hi, -40.0, 12.0))
        throw NumericalError("exact_fit: no positive-hazard curve reprices the instrument "
                             "(price outside the attainable range)");
    const double log_scale = detail::solve_bracketed(gap, lo, hi, "exact_fit");
    const double scale = std::exp(log_scale);
    return {base.scaled(scale), scale};
}

} // namespace credit
