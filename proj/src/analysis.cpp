#include "covband/analysis.hpp"

#include "covband/errors.hpp"
#include "covband/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace covband {

namespace {

constexpr double kE = std::numbers::e;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be positive and finite");
    }
}

// sum_{t=1}^{n} (scale / t)^(power / 2) * (ln t)^(log_power / 2)
double finite_rate_sum(std::uint64_t n, double scale, double power, double log_power) {
    double total = 0.0;
    for (std::uint64_t t = 1; t <= n; ++t) {
        const double td = static_cast<double>(t);
        const double lt = std::log(td);
        if (log_power > 0.0 && lt == 0.0) {
            continue;
        }
        total += std::pow(scale / td, 0.5 * power) * std::pow(lt, 0.5 * log_power);
    }
    return total;
}

// 2 C* x0^a {2 / (1 - 2^(b - a)) (32 sigma^2 / (x0^2 p1))^(a / (a - b)) + 4 / (3 (1 - e^-1))}
// with (a, b) = (alpha, 2) for the sampling rate and (alpha + 1, 2) for the regret.
double forced_large_alpha_term(double a, double c_star, double x0, double ratio) {
    if (std::isinf(a)) {
        return 0.0; // x0 < 1/2 so x0^a vanishes
    }
    const double geometric = 2.0 / (1.0 - std::pow(2.0, 2.0 - a));
    const double log_main = a * std::log(x0) + a / (a - 2.0) * std::log(ratio);
    const double constant = 4.0 / (3.0 * (1.0 - std::exp(-1.0)));
    return 2.0 * c_star * (geometric * std::exp(log_main) + constant * std::pow(x0, a));
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double m = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

double r_squared(std::span<const double> y, std::span<const double> yhat) {
    double my = 0.0;
    for (double v : y) my += v;
    my /= static_cast<double>(y.size());
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        rss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        tss += (y[i] - my) * (y[i] - my);
    }
    if (tss <= 0.0) {
        return rss <= 0.0 ? 1.0 : 0.0;
    }
    return std::clamp(1.0 - rss / tss, 0.0, 1.0);
}

void check_points(std::span<const GrowthPoint> points) {
    if (points.size() < 4) {
        throw InvalidArgument("fit_growth: at least 4 points are required");
    }
    std::set<double> seen;
    for (const auto& pt : points) {
        if (!(pt.n > 0.0) || !std::isfinite(pt.n) || !std::isfinite(pt.value)) {
            throw InvalidArgument("fit_growth: n must be positive and values finite");
        }
        if (!seen.insert(pt.n).second) {
            throw InvalidArgument("fit_growth: n values must be distinct");
        }
    }
}

} // namespace

double isr_lower_bound(double alpha, double c_star, double sigma, double n) {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw OutOfRange("isr_lower_bound: alpha must lie in (0, 2]");
    }
    return 0.125 * std::pow(alpha / (2.0 * kE), 0.5 * alpha) * c_star * std::pow(sigma, alpha) *
           std::pow(n, 1.0 - 0.5 * alpha);
}

double regret_lower_bound(double alpha, double c_star, double sigma, double x0, double n) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw OutOfRange("regret_lower_bound: alpha must lie in (0, 1]");
    }
    const double inv = 1.0 / alpha;
    const double numerator = std::pow(0.125, 1.0 + inv) *
                             std::pow(alpha / (2.0 * kE), 0.5 * (alpha + 1.0)) *
                             std::pow(c_star, 1.0 + inv) * std::pow(sigma, alpha + 1.0) *
                             std::pow(n, 0.5 * (1.0 - alpha));
    return numerator / (2.0 * std::max(1.0 / x0, std::pow(2.0 * c_star, inv)));
}

double regret_floor(double s_n, double n, double alpha, double c_star, double x0) {
    if (!(s_n >= 0.0)) {
        throw InvalidArgument("regret_floor: s_n must be nonnegative");
    }
    if (!(n >= 1.0)) {
        throw InvalidArgument("regret_floor: n must be >= 1");
    }
    const double inv = 1.0 / alpha; // 0 for alpha = +inf
    return std::pow(s_n, 1.0 + inv) * std::pow(n, -inv) /
           (2.0 * std::max(1.0 / x0, std::pow(2.0 * c_star, inv)));
}

double concentration_bound(double x, double tau, double sigma) {
    return 2.0 * std::exp(-x * x * tau / (4.0 * sigma * sigma));
}

double sum_series(const std::function<double(std::uint64_t)>& term, std::uint64_t start,
                  const std::function<double(std::uint64_t)>& tail_bound, double tolerance) {
    double total = 0.0;
    std::uint64_t t = start;
    for (; tail_bound(t) >= tolerance; ++t) {
        if (t - start > kScanLimit) {
            throw OutOfRange("sum_series: series converges too slowly");
        }
        total += term(t);
    }
    return total;
}

double power_tail_sum(double s) {
    if (!(s > 1.0)) {
        throw InvalidArgument("power_tail_sum: s must exceed 1");
    }
    constexpr std::uint64_t cut = 2000;
    double direct = 0.0;
    for (std::uint64_t t = cut - 1; t >= 2; --t) {
        direct += std::pow(static_cast<double>(t), -s);
    }
    // Euler-Maclaurin for sum_{t >= cut} t^-s.
    const double N = static_cast<double>(cut);
    const double tail = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s) +
                        s * std::pow(N, -s - 1.0) / 12.0 -
                        s * (s + 1.0) * (s + 2.0) * std::pow(N, -s - 3.0) / 720.0;
    return direct + tail;
}

double nearly_myopic_constant(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidArgument("nearly_myopic_constant: p must lie in (0, 1]");
    }
    const double rate = p * p / 32.0;
    const double exp_sum = sum_series(
        [rate](std::uint64_t t) { return std::exp(-rate * static_cast<double>(t)); }, 2,
        [rate](std::uint64_t t) {
            return std::exp(-rate * static_cast<double>(t)) / -std::expm1(-rate);
        });
    return 8.0 * power_tail_sum(2.0) + 2.0 * power_tail_sum(6.0) + exp_sum;
}

double kappa(double alpha) {
    require_positive(alpha, "kappa: alpha");
    return std::pow(0.5 * alpha, 0.5 * alpha) / (1.0 - std::pow(2.0, -alpha)) +
           std::tgamma(0.5 * alpha) / (2.0 * std::numbers::ln2);
}

double forced_sampling_constant(double q, double sigma, double x0, double p1) {
    const ScheduleThresholds th = thresholds(q);
    const double low_pull = 1.0 / -std::expm1(-p1 * p1 / 64.0) +
                            std::numbers::pi * std::numbers::pi / 3.0 *
                                std::exp(x0 * x0 / (4.0 * sigma * sigma) *
                                         (1.0 + std::log(th.nu + 1.0) / q));
    const double far_estimate = 2.0 / -std::expm1(-x0 * x0 * p1 / (8.0 * sigma * sigma));
    return 1.0 + th.nu0 + low_pull + far_estimate;
}

std::string RateDescriptor::to_string() const {
    char buf[96];
    switch (kind) {
    case RateKind::finite:
        return "finite";
    case RateKind::log:
        return "ln n";
    case RateKind::log_squared:
        return "(ln n)^2";
    case RateKind::power_polylog:
        if (log_power == 0.0) {
            std::snprintf(buf, sizeof buf, "n^%.6g", power);
        } else {
            std::snprintf(buf, sizeof buf, "n^%.6g (ln n)^%.6g", power, log_power);
        }
        return buf;
    }
    return "unknown";
}

RateDescriptor rate_descriptor(PolicyKind policy, MetricKind metric, double alpha) {
    require_positive(std::isinf(alpha) ? 1.0 : alpha, "alpha");
    // The regret behaves like the sampling rate with alpha shifted by one.
    const double a = metric == MetricKind::regret ? alpha + 1.0 : alpha;
    if (policy == PolicyKind::nearly_myopic) {
        if (a > 2.0) return {RateKind::finite, 0.0, 0.0};
        if (a == 2.0) return {RateKind::log_squared, 0.0, 2.0};
        return {RateKind::power_polylog, 1.0 - 0.5 * a, 0.5 * a};
    }
    if (a >= 2.0) return {RateKind::log, 0.0, 1.0};
    return {RateKind::power_polylog, 1.0 - 0.5 * a, 0.0};
}

Envelope upper_envelope(const EnvelopeRequest& req) {
    const MarginParams& m = req.params;
    const double alpha = m.alpha;
    require_positive(req.sigma, "sigma");
    if (!(alpha > 0.0) || !(m.c_star > 0.0) || !(m.x0 > 0.0 && m.x0 < 0.5) ||
        !(m.p > 0.0 && m.p < 1.0) || !(m.p1 > 0.0) || req.n < 1) {
        throw OutOfRange("upper_envelope: margin parameters out of range");
    }

    Envelope env;
    env.rate = rate_descriptor(req.policy, req.metric, alpha);
    const bool regret = req.metric == MetricKind::regret;
    if (regret && !m.mu) {
        env.note = "regret envelope requires the mean absolute deviation bound mu";
        return env;
    }
    const double s2 = req.sigma * req.sigma;
    const double n = static_cast<double>(req.n);

    if (req.policy == PolicyKind::nearly_myopic) {
        const double k = nearly_myopic_constant(m.p);
        try {
            const std::uint64_t t0 = std::max<std::uint64_t>(
                nearly_myopic_t0(m.p, req.sigma, m.x0), 2);
            const double scale = 192.0 * s2 / m.p; // (8 sqrt(3) sigma)^2 / p
            if (!regret) {
                if (alpha > 2.0) {
                    const auto ta = nearly_myopic_t_alpha(m.p, req.sigma, alpha);
                    const double tail = std::isinf(alpha) ? 0.0 : 4.0 * m.c_star / (alpha - 2.0);
                    env.value = static_cast<double>(std::max(t0, ta)) + tail + k;
                } else {
                    env.value = static_cast<double>(t0) +
                                m.c_star * finite_rate_sum(req.n, scale, alpha, alpha) + k;
                }
            } else {
                const double mu = *m.mu;
                if (alpha > 1.0) {
                    const auto ta = nearly_myopic_t_alpha(m.p, req.sigma, alpha + 1.0);
                    const double tail = std::isinf(alpha) ? 0.0 : 4.0 * m.c_star / (alpha - 1.0);
                    env.value = mu * (static_cast<double>(std::max(t0, ta)) + k) + tail;
                } else {
                    env.value = mu * (static_cast<double>(t0) + k) +
                                m.c_star * finite_rate_sum(req.n, scale, alpha + 1.0, alpha + 1.0);
                }
            }
        } catch (const OutOfRange& e) {
            env.value.reset();
            env.note = e.what();
        }
    } else {
        require_positive(req.q, "q");
        if (!(m.x0 * m.x0 >= 12.0 * req.q * s2)) {
            throw ConditionViolated("forced sampling guarantee requires x0^2 >= 12 q sigma^2");
        }
        const ScheduleThresholds th = thresholds(req.q);
        if (n < th.nu0) {
            env.note = "forced sampling envelope holds for n >= nu0";
            return env;
        }
        const double k1 = forced_sampling_constant(req.q, req.sigma, m.x0, m.p1);
        const double ratio = 32.0 * s2 / (m.x0 * m.x0 * m.p1);
        const double logn = std::log(n + 1.0) / req.q;
        if (!regret) {
            if (alpha > 2.0) {
                env.value = logn + forced_large_alpha_term(alpha, m.c_star, m.x0, ratio) + k1;
            } else {
                env.value = logn + 16.0 * alpha * s2 / (m.x0 * m.x0 * m.p1) +
                            6.0 * m.c_star * kappa(alpha) *
                                finite_rate_sum(req.n, 32.0 * s2 / m.p1, alpha, 0.0) +
                            k1;
            }
        } else {
            const double mu = *m.mu;
            if (alpha > 1.0) {
                env.value = mu * logn +
                            forced_large_alpha_term(alpha + 1.0, m.c_star, m.x0, ratio) + mu * k1;
            } else {
                env.value = 6.0 * m.c_star * kappa(alpha + 1.0) *
                                finite_rate_sum(req.n, 32.0 * s2 / m.p1, alpha + 1.0, 0.0) +
                            mu * (logn + 16.0 * (alpha + 1.0) * s2 / (m.x0 * m.x0 * m.p1) + k1);
            }
        }
    }
    if (env.value) {
        env.provenance = "proof-assembled";
    }
    return env;
}

std::string to_string(GrowthModel model) {
    switch (model) {
    case GrowthModel::constant:
        return "constant";
    case GrowthModel::log:
        return "log";
    case GrowthModel::log_squared:
        return "log_squared";
    case GrowthModel::power_times_polylog:
        return "power_times_polylog";
    }
    return "unknown";
}

double GrowthFit::exponent() const {
    return model == GrowthModel::power_times_polylog && parameters.size() == 2 ? parameters[1]
                                                                             : 0.0;
}

GrowthFit fit_model(std::span<const GrowthPoint> points, GrowthModel model) {
    check_points(points);
    const std::size_t m = points.size();
    std::vector<double> x(m), y(m), yhat(m), orig_hat(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double ln = std::log(points[i].n);
        switch (model) {
        case GrowthModel::constant:
            x[i] = 0.0;
            break;
        case GrowthModel::log:
            x[i] = ln;
            break;
        case GrowthModel::log_squared:
            x[i] = ln * ln;
            break;
        case GrowthModel::power_times_polylog:
            x[i] = ln;
            break;
        }
        if (model == GrowthModel::power_times_polylog) {
            if (!(points[i].value > 0.0)) {
                throw InvalidArgument("fit_model: power model needs positive values");
            }
            y[i] = std::log(points[i].value);
        } else {
            y[i] = points[i].value;
        }
    }

    GrowthFit fit;
    fit.model = model;
    const LinearFit lf = least_squares(x, y);
    if (model == GrowthModel::constant) {
        fit.parameters = {lf.intercept};
    } else {
        fit.parameters = {lf.intercept, lf.slope};
    }
    for (std::size_t i = 0; i < m; ++i) {
        yhat[i] = lf.intercept + lf.slope * x[i];
        orig_hat[i] = model == GrowthModel::power_times_polylog ? std::exp(yhat[i]) : yhat[i];
    }
    fit.r_squared = r_squared(y, yhat);

    // Akaike criterion on the original value scale so all models are comparable.
    double rss = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = points[i].value - orig_hat[i];
        rss += r * r;
        scale += points[i].value * points[i].value;
    }
    const double md = static_cast<double>(m);
    const double floor = 1e-24 * std::max(scale / md, 1e-300);
    fit.aic = md * std::log(std::max(rss / md, floor)) + 2.0 * static_cast<double>(fit.parameters.size());
    fit.selected_by = "single model";
    return fit;
}

GrowthFit fit_growth(std::span<const GrowthPoint> points) {
    check_points(points);
    const bool all_equal = std::all_of(points.begin(), points.end(), [&](const GrowthPoint& p) {
        return p.value == points.front().value;
    });
    if (all_equal) {
        GrowthFit fit;
        fit.model = GrowthModel::constant;
        fit.parameters = {points.front().value};
        fit.r_squared = 1.0;
        fit.selected_by = "degenerate: all values equal";
        return fit;
    }
    const bool positive = std::all_of(points.begin(), points.end(),
                                      [](const GrowthPoint& p) { return p.value > 0.0; });

    std::vector<GrowthModel> candidates{GrowthModel::constant, GrowthModel::log,
                                        GrowthModel::log_squared};
    if (positive) {
        candidates.push_back(GrowthModel::power_times_polylog);
    }
    GrowthFit best;
    bool have = false;
    for (GrowthModel model : candidates) {
        GrowthFit fit = fit_model(points, model);
        if (!have || fit.aic < best.aic) {
            best = std::move(fit);
            have = true;
        }
    }
    best.selected_by = "minimum AIC (2k penalty, Gaussian residuals on the value scale)";
    return best;
}

} // namespace covband
