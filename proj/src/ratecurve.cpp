#include "creditcurve/ratecurve.hpp"

#include "creditcurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace credit {

Compounding Compounding::periodic(int per_year) {
    if (per_year < 1)
        throw DomainError("compounding frequency must be >= 1, got " + std::to_string(per_year));
    return Compounding(per_year);
}

double Compounding::log_discount(double zero_rate, double tenor) const {
    if (is_continuous())
        return -zero_rate * tenor;
    const double m = per_year_;
    if (zero_rate <= -m)
        throw DomainError("zero rate must exceed -m under periodic compounding");
    return -m * tenor * std::log1p(zero_rate / m);
}

double Compounding::zero_rate(double log_discount, double tenor) const {
    if (!(tenor > 0.0))
        throw DomainError("zero rate undefined at non-positive tenor");
    if (is_continuous())
        return -log_discount / tenor;
    const double m = per_year_;
    return m * std::expm1(-log_discount / (m * tenor));
}

RiskfreeCurve::RiskfreeCurve(std::vector<ZeroPillar> pillars, Compounding compounding)
    : pillars_(std::move(pillars)), compounding_(compounding) {
    if (pillars_.empty())
        throw DomainError("riskfree curve needs at least one pillar");
    for (std::size_t i = 0; i < pillars_.size(); ++i) {
        const auto& p = pillars_[i];
        if (!(p.tenor > 0.0) || !std::isfinite(p.tenor))
            throw DomainError("pillar tenors must be positive");
        if (i > 0 && !(p.tenor > pillars_[i - 1].tenor))
            throw DomainError("pillar tenors must be strictly increasing");
        if (!std::isfinite(p.zero_rate))
            throw DomainError("pillar zero rate must be finite");
        log_discounts_.push_back(compounding_.log_discount(p.zero_rate, p.tenor));
    }
}

RiskfreeCurve RiskfreeCurve::flat(double rate, Compounding compounding) {
    return RiskfreeCurve({{1.0, rate}}, compounding);
}

double RiskfreeCurve::log_discount(double t) const {
    if (t < 0.0 || std::isnan(t))
        throw DomainError("discount factor requested at negative time");
    if (t == 0.0)
        return 0.0;

    const auto it = std::upper_bound(pillars_.begin(), pillars_.end(), t,
                                     [](double x, const ZeroPillar& p) { return x < p.tenor; });
    const auto idx = static_cast<std::size_t>(it - pillars_.begin());

    // flat zero rate outside the pillar range; both cases are linear through the origin
    if (idx == 0)
        return log_discounts_.front() * (t / pillars_.front().tenor);
    if (idx == pillars_.size())
        return log_discounts_.back() * (t / pillars_.back().tenor);

    const double t0 = pillars_[idx - 1].tenor;
    const double t1 = pillars_[idx].tenor;
    const double w = (t - t0) / (t1 - t0);
    return log_discounts_[idx - 1] + w * (log_discounts_[idx] - log_discounts_[idx - 1]);
}

double RiskfreeCurve::discount(double t) const {
    return std::exp(log_discount(t));
}

double RiskfreeCurve::forward(double t) const {
    if (t < 0.0 || std::isnan(t))
        throw DomainError("forward rate requested at negative time");

    const auto it = std::upper_bound(pillars_.begin(), pillars_.end(), t,
                                     [](double x, const ZeroPillar& p) { return x < p.tenor; });
    const auto idx = static_cast<std::size_t>(it - pillars_.begin());
    if (idx == 0)
        return -log_discounts_.front() / pillars_.front().tenor;
    if (idx == pillars_.size())
        return -log_discounts_.back() / pillars_.back().tenor;
    return -(log_discounts_[idx] - log_discounts_[idx - 1]) /
           (pillars_[idx].tenor - pillars_[idx - 1].tenor);
}

double RiskfreeCurve::zero_rate(double t, Compounding compounding) const {
    if (!(t > 0.0))
        throw DomainError("zero rate undefined at non-positive tenor");
    return compounding.zero_rate(log_discount(t), t);
}

} // namespace credit
