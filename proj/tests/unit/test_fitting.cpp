#include "creditcurve/errors.hpp"
#include "creditcurve/fitting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace credit;

namespace {

const auto kCurve = RiskfreeCurve::flat(0.02, Compounding::periodic(2));

Instrument bond_on_curve(const std::string& id, double coupon, double tenor,
                         const SurvivalParams& q, double recovery,
                         std::optional<Rating> rating = std::nullopt) {
    BondSpec bond{coupon, tenor, 0.0, recovery};
    bond.price = bond_model_price(bond, kernels(kCurve, q, tenor));
    Instrument inst{id, bond};
    inst.rating = rating;
    return inst;
}

std::vector<Instrument> single_name_set(const SurvivalParams& q) {
    std::vector<Instrument> out;
    const double tenors[] = {1.5, 2.5, 4.0, 5.5, 7.0, 10.0, 15.0, 25.0};
    for (int i = 0; i < 8; ++i)
        out.push_back(bond_on_curve("B" + std::to_string(i), 0.03 + 0.005 * i, tenors[i], q, 0.4));
    return out;
}

} // namespace

TEST(RobustLoss, Bounds) {
    for (double x : {0.0, 1e-3, 0.5, 1.0, 3.0, 100.0}) {
        EXPECT_LE(robust_loss(x), 0.5 * x * x + 1e-300);
        EXPECT_NEAR(robust_loss(x), std::sqrt(1 + x * x) - 1, 1e-12 * (1 + x));
        EXPECT_EQ(robust_loss(-x), robust_loss(x));
    }
    EXPECT_NEAR(robust_loss(1e6) / 1e6, 1.0, 1e-5);
    EXPECT_NEAR(robust_loss(1e-8), 0.5e-16, 1e-30);
    EXPECT_EQ(loss_value(LossKind::squared, 3.0), 9.0);
}

TEST(PriceResidual, ZeroOnCurveAndMatchesModelMinusMarket) {
    const SurvivalParams q{0.01, 0.05, 0.1};
    const auto inst = bond_on_curve("X", 0.05, 6.0, q, 0.4);
    EXPECT_NEAR(price_residual(inst.terms, q, kCurve, 0.4), 0.0, 1e-12);
    BondSpec cheap = std::get<BondSpec>(inst.terms);
    cheap.price -= 2.0;
    EXPECT_NEAR(price_residual(cheap, q, kCurve, 0.4), 2.0, 1e-10);
    EXPECT_NEAR(price_residual(cheap, q, kCurve, 0.4),
                model_minus_market(cheap, kCurve, q, 0.4), 1e-10);
}

TEST(PriceResidual, CdsDropsWeightedForward) {
    const SurvivalParams q{0.01, 0.05, 0.1};
    CdsSpec cds{0.01, 5.0, TradedSpread{0.02}};
    const auto k = kernels(kCurve, q, 5.0);
    const double u = cds_upfront(cds, kCurve);
    EXPECT_NEAR(price_residual(cds, q, kCurve, 0.4),
                100 * (u + (0.01 - par_cds_spread(k, 0.4)) * k.rpv01), 1e-12);
}

TEST(PriceResidualEm, AlphaBehaviour) {
    const SurvivalParams q{0.01, 0.05, 0.1};
    BondSpec bond{0.06, 8.0, 96.0, 0.4};
    const double base = price_residual(bond, q, kCurve, 0.4);
    EXPECT_EQ(price_residual_em(bond, q, kCurve, 0.4, 0.02, 0.0), base);
    const auto k = kernels(kCurve, q, 8.0);
    const double gap = par_adjusted_spread(bond, k) - par_cds_spread(k, 0.4);
    EXPECT_NEAR(price_residual_em(bond, q, kCurve, 0.4, gap, 1.0), 0.0, 1e-12);
    const double r1 = price_residual_em(bond, q, kCurve, 0.4, 0.015, 1.0);
    EXPECT_NEAR(price_residual_em(bond, q, kCurve, 0.4, 0.015, 0.5), 0.5 * (base + r1), 1e-12);
    EXPECT_THROW(price_residual_em(bond, q, kCurve, 0.4, 0.015, 1.5), DomainError);
}

TEST(EffectiveAlpha, RatingDependence) {
    EXPECT_EQ(effective_alpha(0.4, Rating(3), false), 0.4);
    EXPECT_NEAR(effective_alpha(0.45, Rating(3), true), 0.15, 1e-15);
    EXPECT_EQ(effective_alpha(0.45, Rating(12), true), 0.45);
    EXPECT_EQ(effective_alpha(0.45, std::nullopt, true), 0.45);
}

TEST(RecoveryModel, FixedScheduleAndOverride) {
    const auto fixed = RecoveryModel::fixed(0.35);
    const auto sched = RecoveryModel::schedule();
    Instrument inst{"X", BondSpec{0.05, 5.0, 100.0}};
    inst.rating = Rating(10);
    EXPECT_EQ(fixed.for_instrument(inst), 0.35);
    EXPECT_NEAR(sched.for_instrument(inst), 0.40, 1e-15);
    inst.recovery_override = 0.55;
    EXPECT_EQ(sched.for_instrument(inst), 0.55);
    inst.recovery_override.reset();
    inst.rating.reset();
    EXPECT_THROW(sched.for_instrument(inst), InputError);
    EXPECT_THROW(RecoveryModel::fixed(1.0), DomainError);
}

TEST(FitConfig, Validation) {
    FitConfig config;
    EXPECT_NO_THROW(config.validate());
    config.fixed_shape = 0.5;
    EXPECT_THROW(config.validate(), DomainError);
    config = {};
    config.multistart = 0;
    EXPECT_THROW(config.validate(), DomainError);
    config = {};
    config.em = EmMode::fixed;
    config.em_alpha = 1.2;
    EXPECT_THROW(config.validate(), DomainError);
}

TEST(FitSingleName, NoiselessRoundTripWithFixedShape) {
    const SurvivalParams truth{0.01, 0.05, 0.1};
    const auto set = single_name_set(truth);
    FitConfig config;
    config.fixed_shape = 0.1;
    const auto result = fit_single_name(set, kCurve, RecoveryModel::fixed(0.4), config);
    const auto& p = std::get<SurvivalParams>(result.params);
    EXPECT_TRUE(result.diagnostics.converged);
    EXPECT_FALSE(result.diagnostics.underdetermined);
    EXPECT_NEAR(p.a, truth.a, 1e-4);
    EXPECT_NEAR(p.b, truth.b, 1e-4);
    EXPECT_EQ(p.c, 0.1);
    EXPECT_LT(result.objective, 1e-16);
    ASSERT_EQ(result.residuals.size(), set.size());
    for (double r : result.residuals)
        EXPECT_NEAR(r, 0.0, 1e-6);
}

TEST(FitSingleName, DescentLogNeverIncreases) {
    const auto set = single_name_set({0.02, 0.04, 0.15});
    const auto result = fit_single_name(set, kCurve, RecoveryModel::fixed(0.4), FitConfig{});
    const auto& log = result.diagnostics.descent_log;
    ASSERT_FALSE(log.empty());
    for (std::size_t i = 1; i < log.size(); ++i)
        EXPECT_LE(log[i], log[i - 1]);
}

TEST(FitSingleName, SingleTenorIsUnderdetermined) {
    std::vector<Instrument> set{bond_on_curve("A", 0.05, 6.0, {0.03, 0.03, 0.1}, 0.4),
                                bond_on_curve("B", 0.07, 6.0, {0.03, 0.03, 0.1}, 0.4)};
    const auto result = fit_single_name(set, kCurve, RecoveryModel::fixed(0.4), FitConfig{});
    const auto& p = std::get<SurvivalParams>(result.params);
    EXPECT_TRUE(result.diagnostics.underdetermined);
    EXPECT_EQ(p.a, p.b);
    EXPECT_NEAR(p.a, 0.03, 1e-6);
}

TEST(FitSingleName, EmptyInputRejected) {
    EXPECT_THROW(fit_single_name(std::vector<Instrument>{}, kCurve, RecoveryModel::fixed(0.4), FitConfig{}), InputError);
}

TEST(FitSingleName, BitwiseReproducible) {
    auto set = single_name_set({0.02, 0.04, 0.15});
    std::get<BondSpec>(set[3].terms).price += 0.7;
    const auto r1 = fit_single_name(set, kCurve, RecoveryModel::fixed(0.4), FitConfig{});
    const auto r2 = fit_single_name(set, kCurve, RecoveryModel::fixed(0.4), FitConfig{});
    EXPECT_EQ(std::get<SurvivalParams>(r1.params), std::get<SurvivalParams>(r2.params));
    EXPECT_EQ(r1.objective, r2.objective);
    EXPECT_EQ(r1.residuals, r2.residuals);
}

TEST(FitSingleName, IssueSizeWeightsPullTowardsLargeIssues) {
    // Two inconsistent quotes at one tenor: the fit sides with the bigger issue.
    auto a = bond_on_curve("A", 0.05, 5.0, {0.03, 0.03, 0.1}, 0.4);
    auto b = bond_on_curve("B", 0.05, 5.0, {0.03, 0.03, 0.1}, 0.4);
    std::get<BondSpec>(b.terms).price -= 4.0;
    a.issue_size = 5000;
    b.issue_size = 100;
    const auto result = fit_single_name(std::vector<Instrument>{a, b}, kCurve, RecoveryModel::fixed(0.4), FitConfig{});
    EXPECT_LT(std::abs(result.residuals[0]), std::abs(result.residuals[1]));
}

TEST(FitRatingGrid, MissingRatingRejected) {
    std::vector<Instrument> set{bond_on_curve("A", 0.05, 6.0, {0.03, 0.03, 0.1}, 0.4)};
    EXPECT_THROW(fit_rating_grid(set, kCurve, RecoveryModel::schedule(), FitConfig{}), InputError);
}

TEST(FitRatingGrid, SingleRatingFallsBackAndIsFlagged) {
    const SurvivalParams q{0.01, 0.04, 0.1};
    const auto rec = RecoverySchedule().recovery(Rating(9));
    std::vector<Instrument> set{bond_on_curve("A", 0.05, 3.0, q, rec, Rating(9)),
                                bond_on_curve("B", 0.05, 8.0, q, rec, Rating(9)),
                                bond_on_curve("C", 0.06, 15.0, q, rec, Rating(9))};
    FitConfig config;
    config.fixed_shape = 0.1;
    const auto result = fit_rating_grid(set, kCurve, RecoveryModel::schedule(), config);
    EXPECT_TRUE(result.diagnostics.underdetermined);
    const auto& grid = std::get<RatingGrid>(result.params);
    EXPECT_NEAR(grid.anchors()[1].a, 0.01, 1e-4);
    EXPECT_NEAR(grid.anchors()[1].b, 0.04, 1e-4);
    EXPECT_NEAR(grid.anchors()[2].a / grid.anchors()[1].a, kPriorHazardRatioPerSixNotches, 1e-12);
    EXPECT_NEAR(grid.anchors()[1].a / grid.anchors()[0].a, kPriorHazardRatioPerSixNotches, 1e-12);
}

TEST(FitRatingGrid, TwoRatingsFitAndNeverCross) {
    const RatingGrid truth({0.002, 0.01}, {0.008, 0.025}, {0.03, 0.07}, 0.1);
    const RecoverySchedule sched;
    std::vector<Instrument> set;
    int n = 0;
    for (int r : {4, 12})
        for (double T : {2.0, 5.0, 9.0, 14.0})
            set.push_back(bond_on_curve("I" + std::to_string(n++), 0.05, T,
                                        truth.params_for(Rating(r)), sched.recovery(Rating(r)),
                                        Rating(r)));
    FitConfig config;
    config.fixed_shape = 0.1;
    config.multistart = 2;
    const auto result = fit_rating_grid(set, kCurve, RecoveryModel::schedule(), config);
    EXPECT_TRUE(result.diagnostics.converged);
    EXPECT_LT(result.objective, 1e-8);
    std::vector<double> tenors;
    for (int i = 0; i < 50; ++i)
        tenors.push_back(0.6 * i);
    EXPECT_TRUE(std::get<RatingGrid>(result.params).curves_do_not_cross(tenors));
}
