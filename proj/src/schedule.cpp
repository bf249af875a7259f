#include "covband/schedule.hpp"

#include "covband/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace covband {

namespace {

std::uint64_t first_permanent(const std::function<bool(std::uint64_t)>& holds) {
    if (!holds(kScanLimit)) {
        throw OutOfRange("threshold lies beyond the scan limit");
    }
    std::uint64_t run = 0;
    for (std::uint64_t t = 1; t <= kScanLimit; ++t) {
        run = holds(t) ? run + 1 : 0;
        if (run == kPermanenceWindow + 1) {
            return t - kPermanenceWindow;
        }
    }
    throw OutOfRange("threshold scan exceeded the scan limit");
}

} // namespace

ForcedSchedule::ForcedSchedule(double q, std::uint64_t horizon, std::vector<std::uint64_t> times)
    : q_(q), horizon_(horizon), times_(std::move(times)) {}

bool ForcedSchedule::contains(std::uint64_t t) const {
    return std::binary_search(times_.begin(), times_.end(), t);
}

std::uint64_t ForcedSchedule::count_through(std::uint64_t t) const {
    return static_cast<std::uint64_t>(std::upper_bound(times_.begin(), times_.end(), t) -
                                      times_.begin());
}

std::uint64_t floor_exp(double q, std::uint64_t k) {
    const long double x = static_cast<long double>(q) * static_cast<long double>(k);
    const long double v = std::exp(x);
    const long double nearest = std::nearbyint(v);
    // q carries a relative rounding error of half an ulp, which moves exp(q k) by
    // about eps * v * q k. Values that close to an integer are taken as that integer,
    // so q = ln 2 yields exact powers of two.
    const long double slack =
        4.0L * std::numeric_limits<double>::epsilon() * v * std::max(1.0L, x);
    if (std::abs(v - nearest) <= slack) {
        return static_cast<std::uint64_t>(nearest);
    }
    return static_cast<std::uint64_t>(std::floor(v));
}

ForcedSchedule build_schedule(double q, std::uint64_t horizon) {
    if (!(q > 0.0) || !std::isfinite(q)) {
        throw InvalidArgument("build_schedule: q must be positive");
    }
    if (horizon < 1) {
        throw InvalidArgument("build_schedule: horizon must be >= 1");
    }
    std::vector<std::uint64_t> times{1};
    const double cutoff = std::log(static_cast<double>(horizon) + 1.0);
    for (std::uint64_t k = 2;; ++k) {
        // exp(q k) > horizon + 1 guarantees floor > horizon; stop before overflow.
        if (q * static_cast<double>(k) > cutoff + 1.0) {
            break;
        }
        const std::uint64_t tau = floor_exp(q, k);
        if (tau > horizon) {
            break;
        }
        if (tau != times.back()) {
            times.push_back(tau);
        }
    }
    return ForcedSchedule(q, horizon, std::move(times));
}

ScheduleThresholds thresholds(double q) {
    if (!(q > 0.0) || !std::isfinite(q)) {
        throw InvalidArgument("thresholds: q must be positive");
    }
    ScheduleThresholds out;
    out.nu = 1.0 + std::max(std::log(2.0 / std::expm1(q)), 0.0) / q;
    std::uint64_t t = 1;
    while (!(static_cast<double>(t) >= 2.0 / q * std::log(static_cast<double>(t) + 1.0))) {
        if (++t > kScanLimit) {
            throw OutOfRange("thresholds: nu0 scan exceeded the scan limit");
        }
    }
    out.nu0 = std::max(out.nu, static_cast<double>(t));
    return out;
}

double count_upper_bound(double q, std::uint64_t t) {
    return std::log(static_cast<double>(t) + 1.0) / q;
}

double count_lower_bound(double q, double nu, std::uint64_t t) {
    return std::log(static_cast<double>(t) / (nu + 1.0)) / q - 1.0;
}

std::uint64_t nearly_myopic_t0(double p, double sigma, double x0) {
    if (!(p > 0.0 && p < 1.0) || !(sigma > 0.0) || !(x0 > 0.0 && x0 <= 0.5)) {
        throw InvalidArgument("t0: requires p in (0,1), sigma > 0, x0 in (0,1/2]");
    }
    return first_permanent([=](std::uint64_t t) {
        const double td = static_cast<double>(t);
        return x0 * std::sqrt(p * td) >= 8.0 * sigma * std::sqrt(3.0 * std::log(td));
    });
}

std::uint64_t nearly_myopic_t_alpha(double p, double sigma, double alpha) {
    if (!(alpha > 2.0)) {
        throw NotApplicable("t_alpha is defined only for alpha > 2");
    }
    if (!(p > 0.0 && p <= 1.0) || !(sigma > 0.0)) {
        throw InvalidArgument("t_alpha: requires p in (0,1], sigma > 0");
    }
    const double exponent = std::isinf(alpha) ? 4.0 : 4.0 * alpha / (alpha - 2.0);
    const double base = 8.0 * std::sqrt(3.0) * sigma / std::sqrt(p);
    return first_permanent([=](std::uint64_t t) {
        const double td = static_cast<double>(t);
        const double lt = std::log(td);
        if (lt == 0.0) {
            return true; // right-hand side is 0
        }
        // Compare on the log scale to avoid overflow of the power.
        return std::log(td) >= exponent * (std::log(base) + 0.5 * std::log(lt));
    });
}

StartTimes start_times(double p, double sigma, double x0, double alpha) {
    StartTimes out;
    out.t0 = nearly_myopic_t0(p, sigma, x0);
    if (alpha > 2.0) {
        out.t_alpha = nearly_myopic_t_alpha(p, sigma, alpha);
    }
    return out;
}

} // namespace covband
