#pragma once

#include "covband/env.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace covband {

// Minimax lower bound on the inferior sampling rate, alpha in (0, 2]:
//   (1/8) (alpha / 2e)^(alpha/2) C* sigma^alpha n^(1 - alpha/2)
double isr_lower_bound(double alpha, double c_star, double sigma, double n);

// Minimax lower bound on the regret, alpha in (0, 1].
double regret_lower_bound(double alpha, double c_star, double sigma, double x0, double n);

// Regret floor implied by an inferior sampling rate s_n under the margin condition:
//   s_n^(1 + 1/alpha) n^(-1/alpha) / (2 max{1/x0, (2 C*)^(1/alpha)})
double regret_floor(double s_n, double n, double alpha, double c_star, double x0);

// Tail bound 2 exp(-x^2 tau / (4 sigma^2)) for the estimator given more than tau pulls.
double concentration_bound(double x, double tau, double sigma);

// Sum of term(t) for t >= start, truncated at the first t where
// tail_bound(t) (a bound on sum_{s >= t} term(s)) drops below `tolerance`.
double sum_series(const std::function<double(std::uint64_t)>& term, std::uint64_t start,
                  const std::function<double(std::uint64_t)>& tail_bound,
                  double tolerance = 1e-12);

// sum_{t >= 2} t^(-s), s > 1: direct sum closed by an Euler-Maclaurin tail,
// accurate to well below 1e-12.
double power_tail_sum(double s);

// Constant K(p) of the nearly-myopic bounds:
//   8 sum_{t>=2} t^-2 + 2 sum_{t>=2} t^-6 + sum_{t>=2} exp(-p^2 t / 32)
double nearly_myopic_constant(double p);

// (alpha/2)^(alpha/2) / (1 - 2^-alpha) + Gamma(alpha/2) / (2 ln 2)
double kappa(double alpha);

// Constant K1 of the forced-sampling bounds, assembled from the displayed
// summands: 1 + nu0 + (tail of the low-pull probabilities) + (far-estimate term).
double forced_sampling_constant(double q, double sigma, double x0, double p1);

enum class PolicyKind { nearly_myopic, forced_sampling };
enum class MetricKind { inferior_sampling, regret };

enum class RateKind { finite, log, log_squared, power_polylog };

// Growth order n^power (ln n)^log_power, or a finite constant.
struct RateDescriptor {
    RateKind kind = RateKind::finite;
    double power = 0.0;
    double log_power = 0.0;

    std::string to_string() const;
};

RateDescriptor rate_descriptor(PolicyKind policy, MetricKind metric, double alpha);

struct EnvelopeRequest {
    PolicyKind policy = PolicyKind::nearly_myopic;
    MetricKind metric = MetricKind::inferior_sampling;
    std::uint64_t n = 1;
    MarginParams params;
    double sigma = 1.0;
    double q = 1.0 / 12.0; // forced sampling only
};

struct Envelope {
    RateDescriptor rate;
    std::optional<double> value;
    std::string provenance; // "proof-assembled" when a numeric value is present
    std::string note;
};

// Throws ConditionViolated when the forced-sampling guarantee does not apply
// (x0^2 < 12 q sigma^2).
Envelope upper_envelope(const EnvelopeRequest& request);

enum class GrowthModel { constant, log, log_squared, power_times_polylog };

std::string to_string(GrowthModel model);

struct GrowthPoint {
    double n = 0.0;
    double value = 0.0;
};

struct GrowthFit {
    GrowthModel model = GrowthModel::constant;
    // constant: {a}; log: {a, b} for a + b ln n; log_squared: {a, b} for a + b (ln n)^2;
    // power_times_polylog: {a, b} for ln value = a + b ln n.
    std::vector<double> parameters;
    double r_squared = 0.0;
    double aic = 0.0;
    std::string selected_by;

    double exponent() const; // b for the power model, 0 otherwise
};

// Least-squares fit of one model on its own transformed axes.
GrowthFit fit_model(std::span<const GrowthPoint> points, GrowthModel model);

// Fits all candidate models and keeps the smallest Akaike criterion.
GrowthFit fit_growth(std::span<const GrowthPoint> points);

} // namespace covband
