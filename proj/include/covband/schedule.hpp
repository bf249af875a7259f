#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace covband {

// Exponential forced-sampling grid: tau_1 = 1, tau_k = floor(exp(q k)) for k >= 2,
// duplicates removed, truncated at the horizon.
class ForcedSchedule {
public:
    ForcedSchedule() = default;
    ForcedSchedule(double q, std::uint64_t horizon, std::vector<std::uint64_t> times);

    double q() const { return q_; }
    std::uint64_t horizon() const { return horizon_; }
    std::span<const std::uint64_t> times() const { return times_; }

    bool contains(std::uint64_t t) const;
    // N(t): number of forced times <= t.
    std::uint64_t count_through(std::uint64_t t) const;

    friend bool operator==(const ForcedSchedule&, const ForcedSchedule&) = default;

private:
    double q_ = 1.0;
    std::uint64_t horizon_ = 1;
    std::vector<std::uint64_t> times_{1};
};

// floor(exp(q k)) in extended precision; results within the rounding error of q
// of an integer snap to that integer.
std::uint64_t floor_exp(double q, std::uint64_t k);

ForcedSchedule build_schedule(double q, std::uint64_t horizon);

struct ScheduleThresholds {
    double nu = 1.0;  // 1 + ln_+(2 / (e^q - 1)) / q
    double nu0 = 1.0; // max(nu, min{t : t >= 2 ln(t + 1) / q})
};

ScheduleThresholds thresholds(double q);

// Upper and lower bounds on N(t).
double count_upper_bound(double q, std::uint64_t t);
// Meaningful for t > nu only.
double count_lower_bound(double q, double nu, std::uint64_t t);

struct StartTimes {
    std::uint64_t t0 = 1;
    std::optional<std::uint64_t> t_alpha;
};

inline constexpr std::uint64_t kPermanenceWindow = 10;
inline constexpr std::uint64_t kScanLimit = 2'000'000'000ULL;

// First t with x0 sqrt(p t) >= 8 sigma sqrt(3 ln t) that keeps holding for the
// next kPermanenceWindow steps.
std::uint64_t nearly_myopic_t0(double p, double sigma, double x0);

// First permanent t with t >= (8 sqrt(3) sigma sqrt(ln t / p))^(4 alpha / (alpha - 2)).
// alpha = +inf uses the limiting exponent 4. Throws NotApplicable for alpha <= 2.
std::uint64_t nearly_myopic_t_alpha(double p, double sigma, double alpha);

StartTimes start_times(double p, double sigma, double x0, double alpha);

} // namespace covband
