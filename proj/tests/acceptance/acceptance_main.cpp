/// Acceptance suite. Each criterion prints one PASS/FAIL line.
///
///   acceptance            run every criterion
///   acceptance <id>...    run the named criteria (1 2 3 4 5 6a 6b 7 8 9)
///
/// Exit status is non-zero when any selected criterion fails.

#include "creditcurve/analytics.hpp"
#include "creditcurve/errors.hpp"
#include "creditcurve/fitting.hpp"
#include "creditcurve/runner.hpp"
#include "creditcurve/universe.hpp"
#include "creditcurve/valuation.hpp"

#include "../oracles.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace credit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

/// Root of f on [lo, hi] by TOMS 748 to full double precision.
double root(const std::function<double(double)>& f, double lo, double hi) {
    std::uintmax_t iterations = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
    return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// 1. Parity identity

Outcome parity() {
    std::mt19937_64 rng(20160408);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const bool flat = i % 2 == 0;
        const RiskfreeCurve curve =
            flat ? RiskfreeCurve::flat(0.08 * u(rng))
                 : RiskfreeCurve({{1.0, 0.03 * u(rng)}, {5.0, 0.05 * u(rng)}, {20.0, 0.06 * u(rng)}},
                                 Compounding::periodic(2));
        const SurvivalParams q =
            flat ? SurvivalParams::flat(0.2 * u(rng))
                 : SurvivalParams{1e-4 + 0.2 * u(rng), 1e-4 + 0.3 * u(rng), 0.05 + 0.15 * u(rng)};
        const double T = 0.05 + 40.0 * u(rng);
        const auto k = kernels(curve, q, T, kDefaultGridStep);
        worst = std::max(worst, std::abs(k.risky_discount + k.default_leg +
                                         k.weighted_forward * k.rpv01 - 1.0));
    }
    return {worst <= 1e-12, fmt("max |BQ + Xi + r^Pi - 1| = %.2e over 1000 cases (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------------------
// 2. Flat-curve closed forms and trapezium order

Outcome flat_closed_forms() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_rel = 0.0, min_ratio = 1e9, max_ratio = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double r = 0.1 * u(rng);
        const double lambda = 0.001 + (0.2 - r - 0.001) * u(rng);
        const double T = (1 + static_cast<int>(360 * u(rng))) / 12.0;
        const auto curve = RiskfreeCurve::flat(r);
        const double pi = oracle::flat_rpv01(r, lambda, T);
        const double xi = oracle::flat_default_leg(r, lambda, T);
        const auto monthly = kernels(curve, SurvivalParams::flat(lambda), T, 1.0 / 12.0);
        const auto fine = kernels(curve, SurvivalParams::flat(lambda), T, 1.0 / 48.0);
        worst_rel = std::max({worst_rel, std::abs(monthly.rpv01 / pi - 1.0),
                              std::abs(monthly.default_leg / xi - 1.0)});
        for (double ratio : {(monthly.rpv01 - pi) / (fine.rpv01 - pi),
                             (monthly.default_leg - xi) / (fine.default_leg - xi)}) {
            min_ratio = std::min(min_ratio, ratio);
            max_ratio = std::max(max_ratio, ratio);
        }
    }
    const bool pass = worst_rel <= 5e-4 && min_ratio >= 15.0 && max_ratio <= 17.0;
    return {pass, fmt("max relative error %.2e (tol 5e-4); error ratio h/(h/4) in [%.3f, %.3f] "
                      "(expect 16 +- 1)",
                      worst_rel, min_ratio, max_ratio)};
}

// ---------------------------------------------------------------------------
// 3 and 4. The two COLOM '24 bonds

struct TwoBond {
    BondSpec low{0.04, 7.88, 101.10};
    BondSpec high{0.08125, 8.11, 125.50};
};

const std::vector<std::pair<double, double>> kReferenceHazards{
    {0.0, 0.0277}, {0.2, 0.0341}, {0.4, 0.0442}, {0.535, 0.0551}, {0.6, 0.0626}, {0.8, 0.1065}};

double residual(const BondSpec& b, const RiskfreeCurve& curve, double lambda, double recovery) {
    return model_minus_market(b, curve, SurvivalParams::flat(lambda), recovery);
}

/// Flat hazard with dP_low + dP_high = 0.
double balancing_hazard(const TwoBond& pair, const RiskfreeCurve& curve, double recovery) {
    return root(
        [&](double lambda) {
            return residual(pair.low, curve, lambda, recovery) +
                   residual(pair.high, curve, lambda, recovery);
        },
        1e-6, 2.0);
}

/// Recovery at which the balancing hazard prices both bonds exactly.
double crossover_recovery(const TwoBond& pair, const RiskfreeCurve& curve) {
    return root(
        [&](double recovery) {
            return residual(pair.low, curve, balancing_hazard(pair, curve, recovery), recovery);
        },
        0.0, 0.95);
}

/// Flat continuous Treasury proxy in [1.5%, 2.5%] that best reproduces the
/// reference balancing hazards.
double proxy_rate(const TwoBond& pair) {
    auto misfit = [&](double r) {
        const auto curve = RiskfreeCurve::flat(r);
        double sum = 0.0;
        for (const auto& [recovery, lambda] : kReferenceHazards) {
            const double e = balancing_hazard(pair, curve, recovery) / lambda - 1.0;
            sum += e * e;
        }
        return sum;
    };
    return boost::math::tools::brent_find_minima(misfit, 0.015, 0.025, 40).first;
}

/// Own-curve par-adjusted spread of one bond: exact flat-hazard fit.
double own_sbar(const BondSpec& b, const RiskfreeCurve& curve, double recovery) {
    const auto fit = exact_fit(b, SurvivalParams::flat(0.03), curve, recovery);
    return par_adjusted_spread(b, kernels(curve, fit.params, b.tenor));
}

Outcome colom_pair_with(const TwoBond& pair, double& rate_out) {
    const double r = proxy_rate(pair);
    rate_out = r;
    const auto curve = RiskfreeCurve::flat(r);

    bool increasing = true;
    double prev = 0.0;
    for (int i = 0; i <= 16; ++i) {
        const double lambda = balancing_hazard(pair, curve, 0.05 * i);
        if (i > 0 && !(lambda > prev))
            increasing = false;
        prev = lambda;
    }
    bool signs = true;
    for (const auto& [recovery, lambda_reference] : kReferenceHazards) {
        if (recovery == 0.535)
            continue;
        const double lambda = balancing_hazard(pair, curve, recovery);
        const double d_low = residual(pair.low, curve, lambda, recovery);
        const double d_high = residual(pair.high, curve, lambda, recovery);
        const bool below = recovery < 0.535;
        if (below ? !(d_low < 0 && d_high > 0) : !(d_low > 0 && d_high < 0))
            signs = false;
    }
    const double rc = crossover_recovery(pair, curve);
    const double lc = balancing_hazard(pair, curve, rc);
    const double d0 = residual(pair.high, curve, balancing_hazard(pair, curve, 0.0), 0.0);
    const bool pass = increasing && signs && std::abs(rc - 0.535) <= 0.04 &&
                      std::abs(lc / 0.0551 - 1.0) <= 0.10;
    std::string detail = fmt("proxy r=%.4f; crossover R=%.1f%% (target 53.5 +- 4), lambda=%.4f "
                             "(target 0.0551 +- 10%%), ",
                             r, 100 * rc, lc);
    detail += std::string("hazard increasing in R: ") + (increasing ? "yes" : "no") +
              ", reference sign pattern: " + (signs ? "yes" : "no") +
              fmt(", dP(8.125%%, R=0)=%+.2f (reference +1.45)", d0);
    return {pass, detail};
}

Outcome colom_two_bond() {
    double r = 0.0;
    auto outcome = colom_pair_with(TwoBond{}, r);
    // Supplementary: the 4% bond's tabulated yield of 3.98% corresponds to a
    // price near 100.10 rather than 101.10.
    TwoBond alt;
    alt.low.price = 100.10;
    double r_alt = 0.0;
    const auto alt_outcome = colom_pair_with(alt, r_alt);
    std::printf("[INFO] 3 (supplementary, 4%% bond at 100.10): %s -> %s\n",
                alt_outcome.detail.c_str(), alt_outcome.pass ? "would pass" : "would fail");
    return outcome;
}

Outcome sbar_with(const TwoBond& pair) {
    double r = proxy_rate(pair);
    const auto curve = RiskfreeCurve::flat(r);
    const double rc = crossover_recovery(pair, curve);
    const double s_low = own_sbar(pair.low, curve, rc);
    const double s_high = own_sbar(pair.high, curve, rc);
    const double gap0 = own_sbar(pair.high, curve, 0.0) - own_sbar(pair.low, curve, 0.0);
    const bool pass = std::abs(s_low - s_high) * 1e4 <= 2.0 &&
                      std::abs(s_low * 1e4 - 260.0) <= 15.0 &&
                      std::abs(s_high * 1e4 - 260.0) <= 15.0 && std::abs(gap0 * 1e4 - 40.0) <= 5.0;
    return {pass, fmt("at crossover sbar = %.1f / %.1f bp (agree within 2, 260 +- 15); "
                      "gap at R=0 = %.1f bp (40 +- 5)",
                      s_low * 1e4, s_high * 1e4, gap0 * 1e4)};
}

Outcome colom_sbar() {
    const auto outcome = sbar_with(TwoBond{});
    TwoBond alt;
    alt.low.price = 100.10;
    const auto alt_outcome = sbar_with(alt);
    std::printf("[INFO] 4 (supplementary, 4%% bond at 100.10): %s -> %s\n",
                alt_outcome.detail.c_str(), alt_outcome.pass ? "would pass" : "would fail");
    return outcome;
}

// ---------------------------------------------------------------------------
// 5. Premium/discount property

Outcome premium_discount() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        // Flat riskfree curve, and yields compounded monthly to match the
        // model's continuously paid coupons. A sloped curve or semiannual
        // yields move the two yields apart through duration alone.
        const auto curve = RiskfreeCurve::flat(0.04 * u(rng), Compounding::periodic(2));
        const SurvivalParams q{0.002 + 0.1 * u(rng), 0.002 + 0.1 * u(rng), 0.05 + 0.15 * u(rng)};
        const double T = 1.0 + 20.0 * u(rng);
        const auto k = kernels(curve, q, T);
        BondSpec low{0.01 + 0.04 * u(rng), T, 0.0, 0.4};
        BondSpec high{low.coupon + 0.01 + 0.06 * u(rng), T, 0.0, 0.4};
        low.price = bond_model_price(low, k);
        high.price = bond_model_price(high, k);
        const bool yields = yield_from_price(high.coupon, T, high.price, 12) >
                            yield_from_price(low.coupon, T, low.price, 12);
        const bool zs = z_spread(high, curve) > z_spread(low, curve);
        const double gap = std::abs(par_adjusted_spread(high, k) - par_adjusted_spread(low, k));
        worst = std::max(worst, gap);
        if (!yields || !zs || gap > 1e-10)
            ++failures;
    }
    return {failures == 0, fmt("%.0f of 300 pairs violate (yield, Z-spread ordering or sbar gap); "
                               "max sbar gap %.2e (tol 1e-10)",
                               failures, worst)};
}

// ---------------------------------------------------------------------------
// 6. Single-name fits

Outcome single_name_round_trip() {
    const auto curve = RiskfreeCurve::flat(0.02, Compounding::periodic(2));
    const SurvivalParams truth{0.01, 0.05, 0.1};
    std::vector<Instrument> set;
    const double tenors[] = {1.0, 2.0, 3.5, 5.0, 7.0, 10.0, 15.0, 25.0};
    for (int i = 0; i < 8; ++i) {
        BondSpec bond{0.02 + 0.01 * (i % 5), tenors[i], 0.0, 0.4};
        bond.price = bond_model_price(bond, kernels(curve, truth, bond.tenor));
        set.push_back({"S" + std::to_string(i), bond});
    }
    FitConfig config;
    config.fixed_shape = truth.c;
    const auto result = fit_single_name(set, curve, RecoveryModel::fixed(0.4), config);
    const auto& p = std::get<SurvivalParams>(result.params);
    const bool pass = std::abs(p.a - truth.a) <= 1e-4 && std::abs(p.b - truth.b) <= 1e-4 &&
                      result.objective < 1e-16;
    return {pass, fmt("a=%.6f b=%.6f (truth 0.01, 0.05, tol 1e-4), objective %.2e (< 1e-16)", p.a,
                      p.b, result.objective)};
}

Outcome colom_universe_fit() {
    const fs::path dir = fs::path(CREDITCURVE_DATA_DIR) / "colom";
    if (!fs::exists(dir / "bonds.csv") || !fs::exists(dir / "riskfree.csv"))
        return {false, "COLOM universe quotes and discount curve for 08-Apr-16 are not available "
                       "(expected " + dir.string() + "/bonds.csv and riskfree.csv)"};
    const auto snap = load_universe({dir / "riskfree.csv", dir / "bonds.csv", {}, {}},
                                    parse_date("2016-04-08"), Compounding::periodic(2));
    struct Case {
        double recovery;
        SurvivalParams expected;
    };
    std::string detail;
    bool pass = true;
    for (const Case& c : {Case{0.0, {0.0099, 0.0621, 0.2}}, Case{0.5, {0.0168, 0.2727, 0.05}}}) {
        const auto result =
            fit_single_name(snap.instruments, snap.riskfree, RecoveryModel::fixed(c.recovery), {});
        const auto& p = std::get<SurvivalParams>(result.params);
        for (auto [got, want] : {std::pair{p.a, c.expected.a}, std::pair{p.b, c.expected.b},
                                 std::pair{p.c, c.expected.c}})
            pass = pass && std::abs(got / want - 1.0) <= 0.15;
        detail += fmt("R=%.1f: (%.4f, %.4f, %.3f); ", c.recovery, p.a, p.b, p.c);
    }
    return {pass, detail + "targets (0.0099, 0.0621, 0.2) and (0.0168, 0.2727, 0.05) within 15%"};
}

// ---------------------------------------------------------------------------
// 7. Rating grid

Outcome rating_grid() {
    const auto curve = RiskfreeCurve::flat(0.02, Compounding::periodic(2));
    const RatingGrid truth({0.003, 0.012}, {0.012, 0.03}, {0.045, 0.09}, 0.1);
    const RecoverySchedule sched;
    auto universe = [&](double alpha) {
        std::vector<Instrument> set;
        int n = 0;
        for (int r : {3, 9, 15}) {
            const Rating rating(r);
            const double rec = sched.recovery(rating);
            for (double T : {1.5, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0}) {
                const double sov = 0.004 + 0.003 * ((n * 7) % 5);
                const auto k = kernels(curve, truth.params_for(rating), T);
                BondSpec bond{0.03 + 0.01 * (n % 4), T, 0.0, rec};
                const double s = par_cds_spread(k, rec) + alpha * sov;
                bond.price = 100 * (1 + (bond.coupon - k.weighted_forward - s) * k.rpv01);
                Instrument inst{"R" + std::to_string(n++), bond};
                inst.rating = rating;
                inst.sovereign_spread = sov;
                set.push_back(inst);
            }
        }
        return set;
    };
    std::vector<double> tenors;
    for (int i = 0; i < 50; ++i)
        tenors.push_back(0.6 * (i + 1));

    FitConfig config;
    const auto plain = fit_rating_grid(universe(0.0), curve, RecoveryModel::schedule(), config);
    const auto& grid = std::get<RatingGrid>(plain.params);
    double worst = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        worst = std::max(worst, std::abs(grid.anchors()[k].a / truth.anchors()[k].a - 1.0));
        worst = std::max(worst, std::abs(grid.anchors()[k].b / truth.anchors()[k].b - 1.0));
    }
    const bool no_cross = grid.curves_do_not_cross(tenors);

    FitConfig em = config;
    em.em = EmMode::fit;
    const auto with_em = fit_rating_grid(universe(0.45), curve, RecoveryModel::schedule(), em);
    const double alpha = with_em.alpha.value_or(-1.0);

    const bool pass = worst <= 1e-3 && no_cross && std::abs(alpha - 0.45) <= 0.05;
    return {pass, fmt("max anchor relative error %.2e (tol 1e-3); ", worst) +
                      "no-crossing at 50 tenors: " + (no_cross ? "yes" : "no") +
                      fmt("; EM alpha %.4f (0.45 +- 0.05)", alpha)};
}

// ---------------------------------------------------------------------------
// 8. Return decompositions

Outcome decompositions() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_sum = 0.0, worst_cds = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double r = 0.04 * u(rng);
        const auto curve = RiskfreeCurve::flat(r);
        const SurvivalParams q{0.002 + 0.1 * u(rng), 0.002 + 0.1 * u(rng), 0.05 + 0.15 * u(rng)};
        const double T = 1.0 + 14.0 * u(rng);
        const double dt = 0.01 + 0.9 * u(rng);
        const double recovery = 0.1 + 0.6 * u(rng);
        const bool is_cds = i % 2 == 1;
        const double coupon = is_cds ? (u(rng) < 0.5 ? 0.01 : 0.05) : 0.1 * u(rng);
        const double traded = 0.001 + 0.08 * u(rng);
        InstrumentTerms terms = is_cds ? InstrumentTerms{CdsSpec{coupon, T, TradedSpread{traded}}}
                                       : InstrumentTerms{BondSpec{coupon, T, 60 + 60 * u(rng), recovery}};
        const auto in = horizon_inputs(terms, q, curve, recovery, dt);
        const double total = total_return(in);
        for (auto v : {DecompositionVariant::standard, DecompositionVariant::model_carry}) {
            const auto d = decompose(in, v);
            worst_sum = std::max(worst_sum, std::abs(d.carry + d.rolldown + d.rv - total));
        }
        if (!is_cds)
            continue;
        // Selling protection at s~0 and unwinding at s~1, every annuity on
        // the quoting flat-hazard curve: c dt + (s~0 - c) Pi~(T) - (s~1 - c) Pi~(T - dt).
        const double h = kDefaultGridStep;
        auto B = [&](double t) { return std::exp(-r * t); };
        auto snac = [&](double s, double tenor) {
            const double lambda = s / (1.0 - kSnacQuotingRecovery);
            return oracle::trapezium(B, [&](double t) { return std::exp(-lambda * t); }, tenor, h)
                .rpv01;
        };
        auto model_q = [&](double t) { return survival_probability(q, t); };
        const auto end = oracle::trapezium(B, model_q, T - dt, h);
        const double s_end = (1.0 - recovery) * end.default_leg / end.rpv01;
        const double u_end = (s_end - coupon) * end.rpv01;
        const double traded_end =
            oracle::bisect([&](double s) { return (s - coupon) * snac(s, T - dt) - u_end; }, 0.0, 5.0);
        const double pl = coupon * dt + (traded - coupon) * snac(traded, T) -
                          (traded_end - coupon) * snac(traded_end, T - dt);
        worst_cds = std::max(worst_cds, std::abs(pl - total));
    }
    const bool pass = worst_sum <= 1e-12 && worst_cds <= 1e-10;
    return {pass, fmt("max |carry+rolldown+RV - total| = %.2e (tol 1e-12); max CDS route "
                      "difference %.2e (tol 1e-10)",
                      worst_sum, worst_cds)};
}

// ---------------------------------------------------------------------------
// 9. Determinism of the CLI

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path data = fs::path(CREDITCURVE_DATA_DIR) / "sample";
    const fs::path work = fs::temp_directory_path() / "creditcurve_acceptance_9";
    fs::remove_all(work);
    std::vector<std::string> outputs;
    for (int run = 0; run < 2; ++run) {
        const fs::path out = work / std::to_string(run);
        const std::string cmd = std::string("\"") + CREDITCURVE_CLI + "\" fit-grid --config \"" +
                                (data / "config.txt").string() + "\" --riskfree \"" +
                                (data / "riskfree.csv").string() + "\" --bonds \"" +
                                (data / "bonds.csv").string() + "\" --cds \"" +
                                (data / "cds.csv").string() + "\" --sovereign \"" +
                                (data / "sovereign.csv").string() + "\" --em-alpha fit --out \"" +
                                out.string() + "\" 2>/dev/null";
        const int status = std::system(cmd.c_str());
        if (status != 0)
            return {false, fmt("fit-grid run %.0f exited with status %.0f", run, status)};
        outputs.push_back(slurp(out / "fit.csv") + slurp(out / "instruments.csv"));
    }
    fs::remove_all(work);
    const bool pass = !outputs[0].empty() && outputs[0] == outputs[1];
    return {pass, fmt("two fit-grid runs: %.0f and %.0f bytes, ", outputs[0].size(),
                      outputs[1].size()) +
                      (outputs[0] == outputs[1] ? "identical" : "different")};
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {"1", "parity identity", parity},
        {"2", "flat-curve closed forms", flat_closed_forms},
        {"3", "COLOM two-bond experiment", colom_two_bond},
        {"4", "COLOM par-adjusted spreads", colom_sbar},
        {"5", "premium/discount property", premium_discount},
        {"6a", "single-name noiseless round trip", single_name_round_trip},
        {"6b", "COLOM full-universe fits", colom_universe_fit},
        {"7", "rating-grid fit", rating_grid},
        {"8", "return decompositions", decompositions},
        {"9", "determinism", determinism},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> wanted(argv + 1, argv + argc);
    int failed = 0;
    int ran = 0;
    for (const auto& c : criteria()) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
            continue;
        ++ran;
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.id.c_str(),
                    c.title.c_str(), outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass)
            ++failed;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no such criterion\n");
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
