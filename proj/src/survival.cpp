#include "creditcurve/survival.hpp"

#include "creditcurve/errors.hpp"

#include <algorithm>
#include <cmath>

namespace credit {

namespace {

constexpr std::array<std::string_view, 18> kRatingSymbols = {
    "AAA", "AA+", "AA", "AA-", "A+",  "A",  "A-",  "BBB+", "BBB",
    "BBB-", "BB+", "BB", "BB-", "B+", "B", "B-", "CCC+", "CCC"};

void require_tenor(double t) {
    if (t < 0.0 || std::isnan(t))
        throw DomainError("survival curve evaluated at negative time");
}

} // namespace

void SurvivalParams::validate() const {
    for (double v : {a, b, c}) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError("survival parameters a, b, c must all be positive");
    }
}

double log_survival(const SurvivalParams& p, double t) {
    require_tenor(t);
    return (p.b - p.a) / p.c * std::log1p(p.c * t) - p.b * t;
}

double survival_probability(const SurvivalParams& p, double t) {
    return std::exp(log_survival(p, t));
}

double forward_hazard(const SurvivalParams& p, double t) {
    require_tenor(t);
    return (p.a + p.b * p.c * t) / (1.0 + p.c * t);
}

Rating::Rating(int index) : index_(index) {
    if (index < kMin || index > kMax)
        throw DomainError("rating index must be in 1..18, got " + std::to_string(index));
}

Rating Rating::from_symbol(std::string_view symbol) {
    const auto it = std::find(kRatingSymbols.begin(), kRatingSymbols.end(), symbol);
    if (it == kRatingSymbols.end())
        throw InputError("unknown rating '" + std::string(symbol) + "'; expected one of " +
                         rating_scale_description());
    return Rating(static_cast<int>(it - kRatingSymbols.begin()) + 1);
}

std::string_view Rating::symbol() const {
    return kRatingSymbols[static_cast<std::size_t>(index_ - 1)];
}

std::string rating_scale_description() {
    std::string out;
    for (std::size_t i = 0; i < kRatingSymbols.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += std::string(kRatingSymbols[i]) + "=" + std::to_string(i + 1);
    }
    return out;
}

RatingGrid::RatingGrid(HazardAnchor aa, HazardAnchor bbb, HazardAnchor b, double shape)
    : anchors_{aa, bbb, b}, shape_(shape) {
    for (const auto& anchor : anchors_) {
        if (!(anchor.a > 0.0) || !(anchor.b > 0.0) || !std::isfinite(anchor.a) ||
            !std::isfinite(anchor.b))
            throw DomainError("rating grid anchors must have positive hazards");
    }
    if (!(shape >= kMinShape && shape <= kMaxShape))
        throw DomainError("rating grid shape parameter must lie in [0.05, 0.2]");
    if (!(aa.a <= bbb.a && bbb.a <= b.a) || !(aa.b <= bbb.b && bbb.b <= b.b))
        throw DomainError("rating grid anchors must be non-decreasing in rating");
}

SurvivalParams RatingGrid::params_for(Rating r) const {
    const int idx = r.index();
    if (idx == kAnchorAA.index())
        return {anchors_[0].a, anchors_[0].b, shape_};
    if (idx == kAnchorBBB.index())
        return {anchors_[1].a, anchors_[1].b, shape_};
    if (idx == kAnchorB.index())
        return {anchors_[2].a, anchors_[2].b, shape_};

    // segment [AA, BBB] serves everything up to BBB, [BBB, B] everything beyond
    const std::size_t lo = idx < kAnchorBBB.index() ? 0 : 1;
    const double x0 = lo == 0 ? kAnchorAA.index() : kAnchorBBB.index();
    const double x1 = lo == 0 ? kAnchorBBB.index() : kAnchorB.index();
    const double w = (idx - x0) / (x1 - x0);
    auto loglin = [w](double y0, double y1) {
        return std::exp(std::log(y0) + w * (std::log(y1) - std::log(y0)));
    };
    return {loglin(anchors_[lo].a, anchors_[lo + 1].a), loglin(anchors_[lo].b, anchors_[lo + 1].b),
            shape_};
}

bool RatingGrid::curves_do_not_cross(std::span<const double> tenors) const {
    for (double t : tenors) {
        double previous = 0.0;
        for (int r = Rating::kMin; r <= Rating::kMax; ++r) {
            const double h = forward_hazard(params_for(Rating(r)), t);
            if (h < previous * (1.0 - 1e-12))
                return false;
            previous = h;
        }
    }
    return true;
}

RecoverySchedule::RecoverySchedule(double floor) : floor_(floor) {
    if (!(floor >= 0.0 && floor < 1.0))
        throw DomainError("recovery floor must lie in [0, 1)");
}

double RecoverySchedule::recovery(Rating r) const {
    return std::max(0.70 - 0.03 * r.index(), floor_);
}

} // namespace credit
