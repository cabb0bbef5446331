#pragma once

#include "creditcurve/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <string>

namespace credit::detail {

/// Root of f on [lo, hi] where f(lo) and f(hi) have opposite signs (or one
/// is zero). Solved to near full double precision in x.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, const std::string& what) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo > 0.0) == (fhi > 0.0))
        throw NumericalError(what + ": no sign change in bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
    std::uintmax_t max_iter = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto [a, b] =
        boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
    return 0.5 * (a + b);
}

/// Widens [lo, hi] outward (each side by `step`, doubling) until f changes
/// sign, staying within [min_lo, max_hi]. Returns false when the limits are
/// reached without a sign change.
template <class F>
bool expand_bracket(F&& f, double& lo, double& hi, double min_lo, double max_hi) {
    double flo = f(lo);
    double fhi = f(hi);
    double step = hi - lo;
    for (int i = 0; i < 200; ++i) {
        if (std::isfinite(flo) && std::isfinite(fhi) && ((flo <= 0.0) != (fhi <= 0.0) ||
                                                         flo == 0.0 || fhi == 0.0))
            return true;
        if (lo <= min_lo && hi >= max_hi)
            return false;
        step *= 2.0;
        if (lo > min_lo) {
            lo = std::max(min_lo, lo - step);
            flo = f(lo);
        }
        if (hi < max_hi) {
            hi = std::min(max_hi, hi + step);
            fhi = f(hi);
        }
    }
    return false;
}

} // namespace credit::detail
