#pragma once

#include "covband/schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace covband {

// Arm zero pays 0; arm one pays X - theta + eps.
enum class Arm : std::uint8_t { zero = 0, one = 1 };

inline Arm arm_if(bool pull_one) {
    return pull_one ? Arm::one : Arm::zero;
}

// Sufficient statistics after `t` completed steps.
struct PolicyState {
    std::uint64_t t = 0;
    std::uint64_t pulls = 0; // times arm one was sampled
    double sum_diff = 0.0;   // sum over arm-one steps of (X_s - Y_s)

    friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

struct OraclePolicy {
    double theta = 0.0;
};

struct MyopicPolicy {};

// Threshold theta_hat - c sqrt(ln t) / sqrt(pulls). The theory coefficient is
// c = 2 sigma sqrt(3); `sigma` records the noise level it was derived from.
struct NearlyMyopicPolicy {
    double c = 1.0;
    double sigma = 1.0;
};

struct ForcedSamplingPolicy {
    ForcedSchedule schedule;
};

using PolicySpec =
    std::variant<OraclePolicy, MyopicPolicy, NearlyMyopicPolicy, ForcedSamplingPolicy>;

NearlyMyopicPolicy theory_nearly_myopic(double sigma);

// Stable, comma-free label used in output tables.
std::string policy_label(const PolicySpec& spec);

// Estimate of theta from arm-one observations. Throws NoObservations when pulls == 0.
double theta_hat(const PolicyState& state);

// delta_t = c sqrt(ln t); zero at t <= 1.
double exploration_width(double c, std::uint64_t t);

// Decision for step state.t + 1 given data through state.t and the new covariate.
Arm decide(const PolicySpec& spec, const PolicyState& state, double x_next);

// `y` must be present exactly when arm one was pulled.
PolicyState update(const PolicyState& state, double x, Arm arm, std::optional<double> y);

} // namespace covband
