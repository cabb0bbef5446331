#include "creditcurve/analytics.hpp"

#include "creditcurve/errors.hpp"

#include <cmath>
#include <numeric>

namespace credit {

HorizonInputs horizon_inputs(const InstrumentTerms& terms, const SurvivalParams& model,
                             const RiskfreeCurve& riskfree, double recovery, double horizon,
                             double grid_step) {
    const double tenor = tenor_of(terms);
    if (!(horizon > 0.0 && horizon < tenor))
        throw DomainError("horizon must lie strictly between 0 and the instrument tenor");

    const auto now = kernels(riskfree, model, tenor, grid_step);
    const auto later = kernels(riskfree, model, tenor - horizon, grid_step);

    HorizonInputs in{};
    if (const auto* bond = std::get_if<BondSpec>(&terms)) {
        in.carry_coupon = bond->coupon - now.weighted_forward;
        in.sbar = par_adjusted_spread(*bond, now);
    } else {
        const auto& cds = std::get<CdsSpec>(terms);
        in.carry_coupon = cds.coupon;
        in.sbar = par_adjusted_spread_cds(cds, now, riskfree, grid_step);
    }
    in.model_spread = par_cds_spread(now, recovery);
    in.model_spread_end = par_cds_spread(later, recovery);
    in.rpv01 = now.rpv01;
    in.rpv01_end = later.rpv01;
    in.horizon = horizon;
    in.tenor = tenor;
    return in;
}

double carry(const HorizonInputs& in, DecompositionVariant variant) {
    const double spread = variant == DecompositionVariant::standard ? in.sbar : in.model_spread;
    return in.carry_coupon * in.horizon + (spread - in.carry_coupon) * (in.rpv01 - in.rpv01_end);
}

double rolldown(const HorizonInputs& in) {
    return (in.model_spread - in.model_spread_end) * in.rpv01_end;
}

double relative_value(const HorizonInputs& in, DecompositionVariant variant) {
    const double annuity = variant == DecompositionVariant::standard ? in.rpv01_end : in.rpv01;
    return (in.sbar - in.model_spread) * annuity;
}

double total_return(const HorizonInputs& in) {
    return in.carry_coupon * in.horizon + (in.sbar - in.carry_coupon) * in.rpv01 -
           (in.model_spread_end - in.carry_coupon) * in.rpv01_end;
}

ReturnDecomposition decompose(const HorizonInputs& in, DecompositionVariant variant,
                              double convergence_fraction) {
    if (!(convergence_fraction >= 0.0 && convergence_fraction <= 1.0))
        throw DomainError("convergence fraction must lie in [0, 1]");
    ReturnDecomposition out;
    out.carry = carry(in, variant);
    out.rolldown = rolldown(in);
    out.rv = convergence_fraction * relative_value(in, variant);
    out.total = out.carry + out.rolldown + out.rv;
    out.horizon = in.horizon;
    out.variant = variant;
    out.convergence_fraction = convergence_fraction;
    return out;
}

void TransitionInputs::validate() const {
    if (probabilities.size() != static_cast<std::size_t>(Rating::kMax))
        throw DomainError("transition row needs one probability per rating (18)");
    double total = default_probability;
    if (default_probability < 0.0)
        throw DomainError("transition probabilities must be non-negative");
    for (double p : probabilities) {
        if (!(p >= 0.0))
            throw DomainError("transition probabilities must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw DomainError("transition probabilities must sum to one");
    if (!(default_loss >= 0.0 && default_loss <= 1.0))
        throw DomainError("default loss must lie in [0, 1]");
}

ExpectedReturn expected_return_with_transitions(const InstrumentTerms& terms, Rating current,
                                                const RatingGrid& grid,
                                                const RiskfreeCurve& riskfree,
                                                const RecoveryModel& recovery,
                                                const TransitionInputs& transitions,
                                                double horizon, double convergence_fraction,
                                                double grid_step) {
    transitions.validate();
    if (!(convergence_fraction >= 0.0 && convergence_fraction <= 1.0))
        throw DomainError("convergence fraction must lie in [0, 1]");

    const auto base = horizon_inputs(terms, grid.params_for(current), riskfree,
                                     recovery.for_rating(current), horizon, grid_step);
    const double gap = base.sbar - base.model_spread;
    const double end_tenor = base.tenor - horizon;

    ExpectedReturn out;
    for (int r = Rating::kMin; r <= Rating::kMax; ++r) {
        const double p = transitions.probabilities[static_cast<std::size_t>(r - 1)];
        double state_total = 0.0;
        if (p > 0.0 || r == current.index()) {
            const Rating dest(r);
            const auto k = kernels(riskfree, grid.params_for(dest), end_tenor, grid_step);
            const double spread_end = par_cds_spread(k, recovery.for_rating(dest));
            const double carry_j = base.carry_coupon * horizon +
                                   (base.sbar - base.carry_coupon) * (base.rpv01 - k.rpv01);
            const double roll_j = (base.model_spread - spread_end) * k.rpv01;
            const double rv_j = convergence_fraction * gap * k.rpv01;
            state_total = carry_j + roll_j + rv_j;
            out.carry += p * carry_j;
            out.rolldown += p * roll_j;
            out.rv += p * rv_j;
        }
        out.state_totals.push_back(state_total);
        out.total += p * state_total;
    }

    if (transitions.default_probability > 0.0) {
        double price;
        if (const auto* bond = std::get_if<BondSpec>(&terms))
            price = bond->price;
        else
            price = cds_quoted_price(cds_upfront(std::get<CdsSpec>(terms), riskfree, grid_step));
        const double recovered = 1.0 - transitions.default_loss;
        const double default_total =
            (100.0 * recovered - price) / 100.0 + 0.5 * base.carry_coupon * horizon;
        out.default_contribution = transitions.default_probability * default_total;
        out.total += out.default_contribution;
    }
    return out;
}

} // namespace credit
