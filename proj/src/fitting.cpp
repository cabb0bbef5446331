#include "creditcurve/fitting.hpp"

#include "creditcurve/errors.hpp"
#include "detail/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace credit {

RecoveryModel RecoveryModel::fixed(double recovery) {
    if (!(recovery >= 0.0 && recovery < 1.0))
        throw DomainError("recovery must lie in [0, 1)");
    return RecoveryModel(recovery);
}

RecoveryModel RecoveryModel::schedule(RecoverySchedule schedule) {
    return RecoveryModel(schedule);
}

double RecoveryModel::for_rating(std::optional<Rating> rating) const {
    if (const auto* r = std::get_if<double>(&rule_))
        return *r;
    if (!rating)
        throw InputError("rating-linked recovery needs a rating for every instrument");
    return std::get<RecoverySchedule>(rule_).recovery(*rating);
}

double RecoveryModel::for_instrument(const Instrument& inst) const {
    if (inst.recovery_override)
        return *inst.recovery_override;
    try {
        return for_rating(inst.rating);
    } catch (const InputError&) {
        throw InputError("instrument '" + inst.id + "' has no rating for the recovery schedule");
    }
}

std::string RecoveryModel::describe() const {
    if (const auto* r = std::get_if<double>(&rule_))
        return "fixed:" + std::to_string(*r);
    return "schedule";
}

double robust_loss(double x) {
    // sqrt(1 + x^2) - 1 without cancellation for small x
    return x * x / (std::sqrt(1.0 + x * x) + 1.0);
}

double loss_value(LossKind kind, double x) {
    return kind == LossKind::robust ? robust_loss(x) : x * x;
}

void FitConfig::validate() const {
    if (!(shape_lower > 0.0) || !(shape_upper >= shape_lower))
        throw DomainError("shape bounds must satisfy 0 < lower <= upper");
    if (fixed_shape && !(*fixed_shape >= shape_lower && *fixed_shape <= shape_upper))
        throw DomainError("fixed shape parameter lies outside the shape bounds");
    if (multistart < 1)
        throw DomainError("multistart count must be at least 1");
    if (!(simplex_tolerance > 0.0) || max_iterations < 1)
        throw DomainError("convergence tolerances must be positive");
    if (!(grid_step > 0.0))
        throw DomainError("grid step must be positive");
    if (em == EmMode::fixed && !(em_alpha >= 0.0 && em_alpha <= 1.0))
        throw DomainError("EM coefficient alpha must lie in [0, 1]");
}

SurvivalParams FitResult::curve_for(std::optional<Rating> rating) const {
    if (const auto* p = std::get_if<SurvivalParams>(&params))
        return *p;
    if (!rating)
        throw InputError("a rating-grid curve needs the instrument's rating");
    return std::get<RatingGrid>(params).params_for(*rating);
}

double price_residual_em(const InstrumentTerms& terms, const SurvivalParams& curve,
                         const RiskfreeCurve& riskfree, double recovery, double sovereign_spread,
                         double alpha, double grid_step) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("EM coefficient alpha must lie in [0, 1]");
    const auto k = kernels(riskfree, curve, tenor_of(terms), grid_step);
    const double spread = par_cds_spread(k, recovery) + alpha * sovereign_spread;
    if (const auto* bond = std::get_if<BondSpec>(&terms)) {
        return 100.0 * (1.0 - bond->price / 100.0 +
                        (bond->coupon - k.weighted_forward - spread) * k.rpv01);
    }
    const auto& cds = std::get<CdsSpec>(terms);
    const double upfront = cds_upfront(cds, riskfree, grid_step);
    return 100.0 * (upfront + (cds.coupon - spread) * k.rpv01);
}

double price_residual(const InstrumentTerms& terms, const SurvivalParams& curve,
                      const RiskfreeCurve& riskfree, double recovery, double grid_step) {
    return price_residual_em(terms, curve, riskfree, recovery, 0.0, 0.0, grid_step);
}

double effective_alpha(double alpha, std::optional<Rating> rating, bool rating_dependent) {
    if (!rating_dependent || !rating)
        return alpha;
    return alpha * std::min(1.0, rating->index() / 9.0);
}

namespace {

double logistic(double u, double lo, double hi) {
    return lo + (hi - lo) / (1.0 + std::exp(-u));
}

/// Hazard levels are kHazardFloor + e^u, so a parameter the data push
/// towards zero settles instead of drifting to u = -inf.
constexpr double kHazardFloor = 1e-10;

double positive(double u) { return kHazardFloor + std::exp(u); }

double positive_inverse(double v) { return std::log(std::max(v - kHazardFloor, 1e-3 * kHazardFloor)); }

double logit(double v, double lo, double hi) {
    const double p = std::clamp((v - lo) / (hi - lo), 1e-9, 1.0 - 1e-9);
    return std::log(p / (1.0 - p));
}

/// Per-instrument quantities that do not depend on the survival curve.
struct Prepared {
    const Instrument* inst;
    double recovery;
    double weight;
    double upfront;   // CDS only
    double sovereign; // 0 when absent
};

class ResidualModel {
public:
    ResidualModel(std::span<const Instrument> instruments, const RiskfreeCurve& riskfree,
                  const RecoveryModel& recovery, const FitConfig& config)
        : riskfree_(riskfree), config_(config) {
        for (const auto& inst : instruments) {
            std::visit([](const auto& t) { t.validate(); }, inst.terms);
            if (!(inst.issue_size > 0.0))
                throw InputError("instrument '" + inst.id + "' has non-positive issue size");
            Prepared p{&inst, recovery.for_instrument(inst), 1.0, 0.0,
                       inst.sovereign_spread.value_or(0.0)};
            if (config.weighting == WeightMode::issue_size)
                p.weight = inst.issue_size;
            if (config.duration_weighting)
                p.weight *= kernels(riskfree, SurvivalParams::flat(0.0), inst.tenor(),
                                    config.grid_step).rpv01;
            if (const auto* cds = std::get_if<CdsSpec>(&inst.terms))
                p.upfront = cds_upfront(*cds, riskfree, config.grid_step);
            prepared_.push_back(p);
        }
        const double total = std::accumulate(prepared_.begin(), prepared_.end(), 0.0,
                                             [](double s, const Prepared& p) { return s + p.weight; });
        const double scale = static_cast<double>(prepared_.size()) / total;
        for (auto& p : prepared_)
            p.weight *= scale;
    }

    std::size_t size() const { return prepared_.size(); }
    const Prepared& operator[](std::size_t i) const { return prepared_[i]; }

    double residual(std::size_t i, const SurvivalParams& curve, double alpha) const {
        const auto& p = prepared_[i];
        const auto k = kernels(riskfree_, curve, p.inst->tenor(), config_.grid_step);
        const double a = effective_alpha(alpha, p.inst->rating, config_.rating_dependent_alpha);
        const double spread = par_cds_spread(k, p.recovery) + a * p.sovereign;
        if (const auto* bond = std::get_if<BondSpec>(&p.inst->terms))
            return 100.0 * (1.0 - bond->price / 100.0 +
                            (bond->coupon - k.weighted_forward - spread) * k.rpv01);
        const auto& cds = std::get<CdsSpec>(p.inst->terms);
        return 100.0 * (p.upfront + (cds.coupon - spread) * k.rpv01);
    }

    /// Sum of weighted losses; `curve_of(i)` gives instrument i's curve.
    template <class CurveOf>
    double objective(CurveOf&& curve_of, double alpha) const {
        double total = 0.0;
        for (std::size_t i = 0; i < prepared_.size(); ++i)
            total += prepared_[i].weight * loss_value(config_.loss, residual(i, curve_of(i), alpha));
        return total;
    }

    /// Flat hazard that reprices instrument i on its own, if one exists.
    std::optional<double> flat_hazard(std::size_t i) const {
        try {
            const auto fit = exact_fit(prepared_[i].inst->terms, SurvivalParams::flat(0.01),
                                       riskfree_, prepared_[i].recovery, config_.grid_step);
            return fit.params.a;
        } catch (const NumericalError&) {
            return std::nullopt;
        }
    }

private:
    const RiskfreeCurve& riskfree_;
    const FitConfig& config_;
    std::vector<Prepared> prepared_;
};

/// Deterministic uniform draws on [0, 1) from a seeded 64-bit Mersenne twister.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_(seed) {}
    double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double symmetric(double half_width) { return half_width * (2.0 * (*this)() - 1.0); }

private:
    std::mt19937_64 engine_;
};


/// Runs the simplex from every start and keeps the lowest objective (first
/// wins ties).
detail::SimplexResult best_of(const detail::Objective& objective,
                              const std::vector<std::vector<double>>& starts,
                              const FitConfig& config, int& total_evaluations) {
    detail::SimplexOptions options;
    options.size_tolerance = config.simplex_tolerance;
    options.max_iterations = config.max_iterations;
    detail::SimplexResult best;
    bool have_best = false;
    total_evaluations = 0;
    for (const auto& start : starts) {
        auto result = detail::minimize_simplex(objective, start, options);
        total_evaluations += result.evaluations;
        if (!have_best || result.value < best.value) {
            best = std::move(result);
            have_best = true;
        }
    }
    return best;
}

double weighted_log_mean(const ResidualModel& model, const std::vector<std::optional<double>>& hazards,
                         std::function<bool(std::size_t)> include) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < hazards.size(); ++i) {
        if (!hazards[i] || !(*hazards[i] > 0.0) || !include(i))
            continue;
        num += model[i].weight * std::log(*hazards[i]);
        den += model[i].weight;
    }
    return den > 0.0 ? std::exp(num / den) : 0.01;
}

std::size_t distinct_tenors(std::span<const Instrument> instruments) {
    std::vector<double> tenors;
    for (const auto& inst : instruments)
        tenors.push_back(inst.tenor());
    std::sort(tenors.begin(), tenors.end());
    std::size_t count = 0;
    for (std::size_t i = 0; i < tenors.size(); ++i)
        if (i == 0 || tenors[i] - tenors[i - 1] > 1e-6)
            ++count;
    return count;
}

std::vector<double> final_residuals(const ResidualModel& model,
                                    const std::function<SurvivalParams(std::size_t)>& curve_of,
                                    double alpha) {
    std::vector<double> out;
    for (std::size_t i = 0; i < model.size(); ++i)
        out.push_back(model.residual(i, curve_of(i), alpha));
    return out;
}

} // namespace

FitResult fit_single_name(std::span<const Instrument> instruments, const RiskfreeCurve& riskfree,
                          const RecoveryModel& recovery, const FitConfig& config) {
    config.validate();
    if (instruments.empty())
        throw InputError("no instruments to fit");

    const ResidualModel model(instruments, riskfree, recovery, config);
    const bool underdetermined = distinct_tenors(instruments) < 2;
    const bool tie_hazards = underdetermined;
    const bool free_shape = !config.fixed_shape && !underdetermined;
    const double shape_fixed =
        config.fixed_shape.value_or(0.5 * (config.shape_lower + config.shape_upper));
    const bool fit_alpha = config.em == EmMode::fit;
    const double alpha_fixed = config.em == EmMode::fixed ? config.em_alpha : 0.0;

    struct Decoded {
        SurvivalParams params;
        double alpha;
    };
    auto decode = [&](std::span<const double> x) {
        std::size_t i = 0;
        Decoded d{};
        d.params.a = positive(x[i++]);
        d.params.b = tie_hazards ? d.params.a : positive(x[i++]);
        d.params.c = free_shape ? logistic(x[i++], config.shape_lower, config.shape_upper)
                                : shape_fixed;
        d.alpha = fit_alpha ? logistic(x[i++], 0.0, 1.0) : alpha_fixed;
        return d;
    };
    auto encode = [&](double a, double b, double c, double alpha) {
        std::vector<double> x{positive_inverse(a)};
        if (!tie_hazards)
            x.push_back(positive_inverse(b));
        if (free_shape)
            x.push_back(logit(c, config.shape_lower, config.shape_upper));
        if (fit_alpha)
            x.push_back(logit(alpha, 0.0, 1.0));
        return x;
    };
    const detail::Objective objective = [&](std::span<const double> x) {
        try {
            const auto d = decode(x);
            return model.objective([&](std::size_t) { return d.params; }, d.alpha);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    // starting points: flat hazard, then a short/long split, then seeded perturbations
    std::vector<std::optional<double>> hazards;
    for (std::size_t i = 0; i < model.size(); ++i)
        hazards.push_back(model.flat_hazard(i));
    std::vector<double> tenors;
    for (const auto& inst : instruments)
        tenors.push_back(inst.tenor());
    std::vector<double> sorted = tenors;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double level = weighted_log_mean(model, hazards, [](std::size_t) { return true; });
    const double short_level =
        weighted_log_mean(model, hazards, [&](std::size_t i) { return tenors[i] < median; });
    const double long_level =
        weighted_log_mean(model, hazards, [&](std::size_t i) { return tenors[i] >= median; });
    const double mid_shape = 0.5 * (config.shape_lower + config.shape_upper);

    std::vector<std::vector<double>> starts;
    starts.push_back(encode(level, level, mid_shape, 0.3));
    if (config.multistart > 1)
        starts.push_back(encode(short_level, long_level, mid_shape, 0.3));
    Uniform uniform(config.seed);
    while (static_cast<int>(starts.size()) < config.multistart) {
        const double a = level * std::exp(uniform.symmetric(1.5));
        const double b = level * std::exp(uniform.symmetric(1.5));
        const double c = config.shape_lower + uniform() * (config.shape_upper - config.shape_lower);
        starts.push_back(encode(a, b, c, uniform()));
    }

    int evaluations = 0;
    const auto best = best_of(objective, starts, config, evaluations);
    const auto decoded = decode(best.x);

    FitResult result{decoded.params, std::nullopt, {}, best.value, {}};
    if (config.em != EmMode::off)
        result.alpha = decoded.alpha;
    result.residuals = final_residuals(model, [&](std::size_t) { return decoded.params; },
                                       decoded.alpha);
    auto& diag = result.diagnostics;
    diag.iterations = best.iterations;
    diag.evaluations = evaluations;
    diag.starts = static_cast<int>(starts.size());
    diag.converged = best.converged;
    diag.underdetermined = underdetermined;
    diag.descent_log = best.descent_log;
    if (underdetermined)
        diag.message = "fewer than two distinct tenors: fitted with a = b and c fixed";
    if (!best.converged)
        diag.message += (diag.message.empty() ? "" : "; ") +
                        std::string("simplex did not converge within the iteration limit");
    return result;
}

FitResult fit_rating_grid(std::span<const Instrument> instruments, const RiskfreeCurve& riskfree,
                          const RecoveryModel& recovery, const FitConfig& config) {
    config.validate();
    if (instruments.empty())
        throw InputError("no instruments to fit");
    std::set<int> ratings;
    for (const auto& inst : instruments) {
        if (!inst.rating)
            throw InputError("instrument '" + inst.id + "' has no rating; rating-grid fits need one");
        ratings.insert(inst.rating->index());
    }

    if (ratings.size() < 2) {
        FitConfig single = config;
        if (single.em == EmMode::fit)
            single.em = EmMode::off;
        auto result = fit_single_name(instruments, riskfree, recovery, single);
        const auto p = std::get<SurvivalParams>(result.params);
        const int observed = *ratings.begin();
        auto anchor = [&](Rating r) {
            const double f =
                std::pow(kPriorHazardRatioPerSixNotches, (r.index() - observed) / 6.0);
            return HazardAnchor{p.a * f, p.b * f};
        };
        result.params = RatingGrid(anchor(kAnchorAA), anchor(kAnchorBBB), anchor(kAnchorB), p.c);
        result.diagnostics.underdetermined = true;
        result.diagnostics.message =
            "single rating observed: other anchors set by the geometric prior" +
            (result.diagnostics.message.empty() ? std::string()
                                                : "; " + result.diagnostics.message);
        return result;
    }

    const ResidualModel model(instruments, riskfree, recovery, config);
    const bool free_shape = !config.fixed_shape;
    const double shape_fixed = config.fixed_shape.value_or(0.0);
    const bool fit_alpha = config.em == EmMode::fit;
    const double alpha_fixed = config.em == EmMode::fixed ? config.em_alpha : 0.0;

    struct Decoded {
        std::array<HazardAnchor, 3> anchors;
        double shape;
        double alpha;
    };
    // x = [u(a_AA), v1, v2, u(b_AA), w1, w2, (shape), (alpha)]; a_BBB = a_AA e^{v1^2}, ...
    auto decode = [&](std::span<const double> x) {
        Decoded d{};
        d.anchors[0].a = positive(x[0]);
        d.anchors[1].a = d.anchors[0].a * std::exp(x[1] * x[1]);
        d.anchors[2].a = d.anchors[1].a * std::exp(x[2] * x[2]);
        d.anchors[0].b = positive(x[3]);
        d.anchors[1].b = d.anchors[0].b * std::exp(x[4] * x[4]);
        d.anchors[2].b = d.anchors[1].b * std::exp(x[5] * x[5]);
        std::size_t i = 6;
        d.shape = free_shape ? logistic(x[i++], config.shape_lower, config.shape_upper)
                             : shape_fixed;
        d.alpha = fit_alpha ? logistic(x[i++], 0.0, 1.0) : alpha_fixed;
        return d;
    };
    auto encode = [&](const std::array<HazardAnchor, 3>& anchors, double shape, double alpha) {
        auto gap = [](double lo, double hi) { return std::sqrt(std::max(std::log(hi / lo), 0.0)); };
        std::vector<double> x{positive_inverse(anchors[0].a), gap(anchors[0].a, anchors[1].a),
                              gap(anchors[1].a, anchors[2].a), positive_inverse(anchors[0].b),
                              gap(anchors[0].b, anchors[1].b), gap(anchors[1].b, anchors[2].b)};
        if (free_shape)
            x.push_back(logit(shape, config.shape_lower, config.shape_upper));
        if (fit_alpha)
            x.push_back(logit(alpha, 0.0, 1.0));
        return x;
    };
    auto grid_of = [&](const Decoded& d) {
        return RatingGrid(d.anchors[0], d.anchors[1], d.anchors[2], d.shape);
    };
    const detail::Objective objective = [&](std::span<const double> x) {
        try {
            const auto d = decode(x);
            const auto grid = grid_of(d);
            std::array<std::optional<SurvivalParams>, Rating::kMax + 1> cache;
            return model.objective(
                [&](std::size_t i) {
                    auto& slot = cache[static_cast<std::size_t>(model[i].inst->rating->index())];
                    if (!slot)
                        slot = grid.params_for(*model[i].inst->rating);
                    return *slot;
                },
                d.alpha);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    // starting level: weighted regression of ln(flat hazard) on the rating index
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto h = model.flat_hazard(i);
        if (!h || !(*h > 0.0))
            continue;
        const double w = model[i].weight;
        const double x = model[i].inst->rating->index();
        const double y = std::log(*h);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    double intercept = std::log(0.01);
    double slope = std::log(kPriorHazardRatioPerSixNotches) / 6.0;
    if (sw > 0.0) {
        const double var = sxx / sw - (sx / sw) * (sx / sw);
        if (var > 1e-12)
            slope = std::max((sxy / sw - (sx / sw) * (sy / sw)) / var, 0.01);
        intercept = sy / sw - slope * sx / sw;
    }
    auto level_at = [&](Rating r) { return std::exp(intercept + slope * r.index()); };
    const std::array<double, 3> levels{level_at(kAnchorAA), level_at(kAnchorBBB),
                                       level_at(kAnchorB)};
    const double mid_shape = 0.5 * (config.shape_lower + config.shape_upper);

    auto anchors_scaled = [&](double fa, double fb) {
        std::array<HazardAnchor, 3> out;
        for (std::size_t k = 0; k < 3; ++k)
            out[k] = {levels[k] * fa, levels[k] * fb};
        return out;
    };
    std::vector<std::vector<double>> starts;
    starts.push_back(encode(anchors_scaled(1.0, 1.0), mid_shape, 0.3));
    if (config.multistart > 1)
        starts.push_back(encode(anchors_scaled(0.5, 1.5), mid_shape, 0.3));
    Uniform uniform(config.seed);
    while (static_cast<int>(starts.size()) < config.multistart) {
        std::array<HazardAnchor, 3> anchors;
        double prev_a = 0.0, prev_b = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            anchors[k] = {std::max(prev_a, levels[k] * std::exp(uniform.symmetric(1.0))),
                          std::max(prev_b, levels[k] * std::exp(uniform.symmetric(1.0)))};
            prev_a = anchors[k].a;
            prev_b = anchors[k].b;
        }
        const double c = config.shape_lower + uniform() * (config.shape_upper - config.shape_lower);
        starts.push_back(encode(anchors, c, uniform()));
    }

    int evaluations = 0;
    const auto best = best_of(objective, starts, config, evaluations);
    const auto decoded = decode(best.x);
    const auto grid = grid_of(decoded);

    FitResult result{grid, std::nullopt, {}, best.value, {}};
    if (config.em != EmMode::off)
        result.alpha = decoded.alpha;
    result.residuals = final_residuals(
        model, [&](std::size_t i) { return grid.params_for(*model[i].inst->rating); },
        decoded.alpha);
    auto& diag = result.diagnostics;
    diag.iterations = best.iterations;
    diag.evaluations = evaluations;
    diag.starts = static_cast<int>(starts.size());
    diag.converged = best.converged;
    diag.descent_log = best.descent_log;
    if (!best.converged)
        diag.message = "simplex did not converge within the iteration limit";
    return result;
}

} // namespace credit
