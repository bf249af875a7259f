#include "covband/policy.hpp"

#include "covband/errors.hpp"

#include <cmath>
#include <cstdio>

namespace covband {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_param(const char* name, const char* key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%s=%.6g)", name, key, value);
    return buf;
}

} // namespace

NearlyMyopicPolicy theory_nearly_myopic(double sigma) {
    return NearlyMyopicPolicy{2.0 * sigma * std::sqrt(3.0), sigma};
}

std::string policy_label(const PolicySpec& spec) {
    return std::visit(overloaded{
                          [](const OraclePolicy&) { return std::string("oracle"); },
                          [](const MyopicPolicy&) { return std::string("myopic"); },
                          [](const NearlyMyopicPolicy& p) {
                              return format_param("nearly_myopic", "c", p.c);
                          },
                          [](const ForcedSamplingPolicy& p) {
                              return format_param("forced", "q", p.schedule.q());
                          },
                      },
                      spec);
}

double theta_hat(const PolicyState& state) {
    if (state.pulls == 0) {
        throw NoObservations("theta_hat: arm one has not been sampled yet");
    }
    return state.sum_diff / static_cast<double>(state.pulls);
}

double exploration_width(double c, std::uint64_t t) {
    if (t <= 1 || c == 0.0) {
        return 0.0;
    }
    return c * std::sqrt(std::log(static_cast<double>(t)));
}

Arm decide(const PolicySpec& spec, const PolicyState& state, double x_next) {
    return std::visit(
        overloaded{
            [&](const OraclePolicy& p) { return arm_if(x_next >= p.theta); },
            [&](const MyopicPolicy&) {
                if (state.t == 0) {
                    return Arm::one;
                }
                return arm_if(x_next >= theta_hat(state));
            },
            [&](const NearlyMyopicPolicy& p) {
                if (state.t == 0) {
                    return Arm::one;
                }
                const double shift = exploration_width(p.c, state.t) /
                                     std::sqrt(static_cast<double>(state.pulls));
                return arm_if(x_next >= theta_hat(state) - shift);
            },
            [&](const ForcedSamplingPolicy& p) {
                const std::uint64_t next = state.t + 1;
                if (next > p.schedule.horizon()) {
                    throw OutOfRange("forced sampling: step exceeds the schedule horizon");
                }
                if (p.schedule.contains(next)) {
                    return Arm::one;
                }
                return arm_if(x_next >= theta_hat(state));
            },
        },
        spec);
}

PolicyState update(const PolicyState& state, double x, Arm arm, std::optional<double> y) {
    if ((arm == Arm::one) != y.has_value()) {
        throw RewardMismatch("update: reward must be supplied exactly when arm one is pulled");
    }
    PolicyState next = state;
    ++next.t;
    if (arm == Arm::one) {
        ++next.pulls;
        next.sum_diff += x - *y;
    }
    return next;
}

} // namespace covband
