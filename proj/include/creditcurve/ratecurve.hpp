#pragma once

#include <span>
#include <vector>

namespace credit {

/// Compounding convention for quoting zero rates. A frequency of zero means
/// continuous compounding.
class Compounding {
public:
    static constexpr Compounding continuous() { return Compounding(0); }
    static Compounding periodic(int per_year);

    constexpr bool is_continuous() const { return per_year_ == 0; }
    constexpr int per_year() const { return per_year_; }

    /// ln B(T) for a zero rate z quoted under this convention.
    double log_discount(double zero_rate, double tenor) const;
    /// Inverse of log_discount for T > 0.
    double zero_rate(double log_discount, double tenor) const;

    friend constexpr bool operator==(Compounding, Compounding) = default;

private:
    constexpr explicit Compounding(int per_year) : per_year_(per_year) {}
    int per_year_;
};

struct ZeroPillar {
    double tenor;     // years
    double zero_rate; // per annum, under the curve's compounding
};

/// Riskfree discount curve B(T).
///
/// Pillar zero rates are converted to log-discounts, and ln B is interpolated
/// linearly in T with an implicit node ln B(0) = 0. Forwards are therefore
/// piecewise constant. Beyond the last pillar the zero rate is held flat.
class RiskfreeCurve {
public:
    RiskfreeCurve(std::vector<ZeroPillar> pillars, Compounding compounding);

    static RiskfreeCurve flat(double rate, Compounding compounding = Compounding::continuous());

    double discount(double t) const;
    double log_discount(double t) const;
    /// f(t) = -B'(t)/B(t). Right-continuous at pillar tenors.
    double forward(double t) const;
    /// z(T) such that B(T) = (1 + z/m)^{-mT} (or e^{-zT} when continuous).
    double zero_rate(double t, Compounding compounding) const;

    std::span<const ZeroPillar> pillars() const { return pillars_; }
    Compounding compounding() const { return compounding_; }

private:
    std::vector<ZeroPillar> pillars_;
    std::vector<double> log_discounts_;
    Compounding compounding_;
};

} // namespace credit
