#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace credit {

/// Parameters of Q(T) = (1 + cT)^{(b-a)/c} e^{-bT}.
///
/// `a` and `b` are the forward hazard rates as T -> 0 and T -> infinity; `c`
/// sets how quickly the forward hazard moves from one to the other. All three
/// must be strictly positive.
struct SurvivalParams {
    double a;
    double b;
    double c;

    /// Flat hazard Q(T) = e^{-lambda T}. The shape parameter is irrelevant
    /// when a == b; `c` is only carried along.
    static SurvivalParams flat(double hazard, double c = 0.1) { return {hazard, hazard, c}; }

    /// Throws DomainError unless a, b, c are all positive and finite.
    void validate() const;

    /// The same curve with both hazard limits multiplied by `factor`.
    SurvivalParams scaled(double factor) const { return {a * factor, b * factor, c}; }

    friend bool operator==(const SurvivalParams&, const SurvivalParams&) = default;
};

double log_survival(const SurvivalParams& p, double t);
double survival_probability(const SurvivalParams& p, double t);
/// -d/dT ln Q(T) = (a + b c T) / (1 + c T)
double forward_hazard(const SurvivalParams& p, double t);

/// Position on the linear rating scale AAA=1, AA+=2, ..., BBB=9, BBB-=10, ..., CCC=18.
class Rating {
public:
    static constexpr int kMin = 1;
    static constexpr int kMax = 18;

    explicit Rating(int index);
    /// Parses "AAA", "AA+", ..., "CCC". Throws InputError listing the scale.
    static Rating from_symbol(std::string_view symbol);

    int index() const { return index_; }
    std::string_view symbol() const;

    friend auto operator<=>(const Rating&, const Rating&) = default;

private:
    int index_;
};

/// Human-readable listing of the full 18-point scale, for error messages.
std::string rating_scale_description();

inline const Rating kAnchorAA{3};
inline const Rating kAnchorBBB{9};
inline const Rating kAnchorB{15};

struct HazardAnchor {
    double a;
    double b;
};

/// Seven-parameter family of rating curves: (a, b) at AA, BBB and B plus one
/// shared shape parameter. ln a and ln b are piecewise linear in the rating
/// index between anchors and extrapolated linearly outside.
class RatingGrid {
public:
    static constexpr double kMinShape = 0.05;
    static constexpr double kMaxShape = 0.2;

    /// Throws DomainError for non-positive hazards, a shape outside
    /// [kMinShape, kMaxShape], or anchors that decrease with rating.
    RatingGrid(HazardAnchor aa, HazardAnchor bbb, HazardAnchor b, double shape);

    SurvivalParams params_for(Rating r) const;

    const std::array<HazardAnchor, 3>& anchors() const { return anchors_; }
    double shape() const { return shape_; }

    /// True when forward hazards are ordered by rating at every given tenor.
    bool curves_do_not_cross(std::span<const double> tenors) const;

private:
    std::array<HazardAnchor, 3> anchors_;
    double shape_;
};

/// Recovery rate declining with rating: 0.70 - 0.03 r, floored.
class RecoverySchedule {
public:
    static constexpr double kDefaultFloor = 0.05;

    explicit RecoverySchedule(double floor = kDefaultFloor);

    double recovery(Rating r) const;
    double floor() const { return floor_; }

private:
    double floor_;
};

} // namespace credit
