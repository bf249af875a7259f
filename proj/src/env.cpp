#include "covband/env.hpp"

#include "covband/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace covband {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, 1e-13, 48);
}

// Piece masses of the adversarial density, left to right.
std::array<double, 6> adversarial_weights(const AdversarialMargin& d) {
    const double outer = 0.5 * d.c_star * std::pow(d.x0, d.alpha);
    const double inner = 0.5 * d.c_star * std::pow(0.5 * d.delta, d.alpha);
    const double atom = d.atom_mass();
    return {atom, outer, inner, inner, outer, atom};
}

double adversarial_cdf(const AdversarialMargin& d, double x, bool inclusive) {
    const auto w = adversarial_weights(d);
    const double half = 0.5 * d.c_star;
    const double a = d.alpha;
    double acc = 0.0;
    if (x < d.atom_left || (!inclusive && x == d.atom_left)) {
        return 0.0;
    }
    acc += w[0];
    if (x <= -d.x0) {
        return acc;
    }
    if (x <= 0.0) {
        return acc + half * (std::pow(d.x0, a) - std::pow(-x, a));
    }
    acc += w[1];
    if (x <= 0.5 * d.delta) {
        return acc + half * std::pow(x, a);
    }
    acc += w[2];
    if (x <= d.delta) {
        return acc + half * (std::pow(0.5 * d.delta, a) - std::pow(d.delta - x, a));
    }
    acc += w[3];
    if (x <= d.delta + d.x0) {
        return acc + half * std::pow(x - d.delta, a);
    }
    acc += w[4];
    if (x < d.atom_right || (!inclusive && x == d.atom_right)) {
        return acc;
    }
    return 1.0;
}

double adversarial_inverse(const AdversarialMargin& d, double u) {
    const auto w = adversarial_weights(d);
    const double a = d.alpha;
    const double scale = 2.0 / d.c_star;
    double v = u;
    if (v <= w[0]) {
        return d.atom_left;
    }
    v -= w[0];
    if (v <= w[1]) {
        return -std::pow(std::max(0.0, std::pow(d.x0, a) - scale * v), 1.0 / a);
    }
    v -= w[1];
    if (v <= w[2]) {
        return std::pow(scale * v, 1.0 / a);
    }
    v -= w[2];
    if (v <= w[3]) {
        return d.delta -
               std::pow(std::max(0.0, std::pow(0.5 * d.delta, a) - scale * v), 1.0 / a);
    }
    v -= w[3];
    if (v <= w[4]) {
        return d.delta + std::pow(scale * v, 1.0 / a);
    }
    return d.atom_right;
}

std::vector<double> breakpoints(const CovariateDistribution& dist) {
    return std::visit(
        overloaded{
            [](const Uniform& d) { return std::vector<double>{d.lo, d.hi}; },
            [](const TwoPoint& d) { return std::vector<double>{d.x_minus, d.x_plus}; },
            [](const PowerMargin& d) {
                return std::vector<double>{d.center - d.half_width, d.center,
                                           d.center + d.half_width};
            },
            [](const AdversarialMargin& d) {
                return std::vector<double>{d.atom_left, -d.x0,           0.0,         0.5 * d.delta,
                                           d.delta,     d.delta + d.x0, d.atom_right};
            },
        },
        dist);
}

// Largest x0 <= 0.25 keeping p1 >= p / 2.
// sup over u = x / delta in (1/2, u_max] of P(-x, x) / (C* x^alpha) for the
// adversarial law centred at 0 (the mirrored instance gives the same ratio).
// Below u = 1/2 the ratio is exactly 1; for alpha < 1 the second spike pushes
// it above 1 just past u = 1.
double adversarial_margin_ratio(double alpha, double u_max) {
    const double half = std::pow(0.5, alpha);
    auto ratio = [&](double u) {
        const double near = u <= 1.0 ? half - 0.5 * std::pow(1.0 - u, alpha)
                                     : half + 0.5 * std::pow(u - 1.0, alpha);
        return 0.5 + near / std::pow(u, alpha);
    };
    double best = 1.0;
    if (alpha >= 1.0 || u_max <= 0.5) {
        // Convexity of t^alpha keeps the ratio at or below 1.
        return best;
    }
    const double hi = std::min(u_max, 1e3);
    constexpr int kGrid = 100'000;
    for (int i = 0; i <= kGrid; ++i) {
        const double u = 0.5 * std::pow(hi / 0.5, static_cast<double>(i) / kGrid);
        best = std::max(best, ratio(u));
    }
    best = std::max(best, ratio(1.0));
    // Grid slack; the ratio is smooth away from u = 1.
    return best == 1.0 ? 1.0 : best * (1.0 + 1e-6);
}

double default_x0(double c_star, double alpha, double p) {
    return std::min(0.25, std::pow(0.5 * p / c_star, 1.0 / alpha));
}

} // namespace

double AdversarialMargin::interval_mass() const {
    return c_star * (std::pow(x0, alpha) + std::pow(0.5 * delta, alpha));
}

double AdversarialMargin::atom_mass() const {
    return 0.5 * (1.0 - interval_mass());
}

std::string family_name(const CovariateDistribution& dist) {
    return std::visit(overloaded{
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const TwoPoint&) { return std::string("two_point"); },
                          [](const PowerMargin&) { return std::string("power_margin"); },
                          [](const AdversarialMargin&) {
                              return std::string("adversarial_margin");
                          },
                      },
                      dist);
}

void validate(const CovariateDistribution& dist) {
    auto finite = [](double v) { return std::isfinite(v); };
    std::visit(
        overloaded{
            [&](const Uniform& d) {
                if (!finite(d.lo) || !finite(d.hi) || !(d.lo < d.hi)) {
                    throw InvalidArgument("uniform: requires finite lo < hi");
                }
            },
            [&](const TwoPoint& d) {
                if (!finite(d.x_minus) || !finite(d.x_plus) || !(d.x_minus < d.x_plus)) {
                    throw InvalidArgument("two_point: requires finite x_minus < x_plus");
                }
                if (!(d.prob_plus > 0.0 && d.prob_plus < 1.0)) {
                    throw InvalidArgument("two_point: prob_plus must lie in (0, 1)");
                }
            },
            [&](const PowerMargin& d) {
                if (!(d.alpha > 0.0) || !finite(d.alpha)) {
                    throw InvalidArgument("power_margin: alpha must be positive and finite");
                }
                if (!finite(d.center) || !(d.half_width > 0.0) || !finite(d.half_width)) {
                    throw InvalidArgument("power_margin: requires finite center, half_width > 0");
                }
            },
            [&](const AdversarialMargin& d) {
                if (!(d.alpha > 0.0) || !finite(d.alpha) || !(d.c_star > 0.0) ||
                    !finite(d.c_star)) {
                    throw InvalidArgument("adversarial_margin: alpha and c_star must be positive");
                }
                if (!(d.x0 > 0.0 && d.x0 < 0.5)) {
                    throw InvalidArgument("adversarial_margin: x0 must lie in (0, 1/2)");
                }
                if (!(d.delta > 0.0) || !finite(d.delta)) {
                    throw InvalidArgument("adversarial_margin: delta must be positive");
                }
                if (!(d.interval_mass() < 1.0)) {
                    throw InvalidArgument(
                        "adversarial_margin: c_star (x0^alpha + (delta/2)^alpha) must be < 1");
                }
                if (!(d.atom_left < -d.x0) || !(d.atom_right > d.delta + d.x0)) {
                    throw InvalidArgument(
                        "adversarial_margin: atoms must lie outside [-x0, delta + x0]");
                }
            },
        },
        dist);
}

void validate(const BanditInstance& instance) {
    if (!std::isfinite(instance.theta)) {
        throw InvalidArgument("instance: theta must be finite");
    }
    if (!(instance.sigma > 0.0) || !std::isfinite(instance.sigma)) {
        throw InvalidArgument("instance: sigma must be positive");
    }
    validate(instance.covariate);
}

double cdf(const CovariateDistribution& dist, double x) {
    return std::visit(
        overloaded{
            [x](const Uniform& d) { return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
            [x](const TwoPoint& d) {
                if (x < d.x_minus) return 0.0;
                if (x < d.x_plus) return 1.0 - d.prob_plus;
                return 1.0;
            },
            [x](const PowerMargin& d) {
                const double r = std::min(std::abs(x - d.center) / d.half_width, 1.0);
                const double tail = 0.5 * std::pow(r, d.alpha);
                return x < d.center ? 0.5 - tail : 0.5 + tail;
            },
            [x](const AdversarialMargin& d) { return adversarial_cdf(d, x, true); },
        },
        dist);
}

double cdf_left(const CovariateDistribution& dist, double x) {
    return std::visit(overloaded{
                          [x](const TwoPoint& d) {
                              if (x <= d.x_minus) return 0.0;
                              if (x <= d.x_plus) return 1.0 - d.prob_plus;
                              return 1.0;
                          },
                          [x](const AdversarialMargin& d) { return adversarial_cdf(d, x, false); },
                          [x, &dist](const auto&) { return cdf(dist, x); },
                      },
                      dist);
}

double inverse_cdf(const CovariateDistribution& dist, double u) {
    return std::visit(
        overloaded{
            [u](const Uniform& d) { return d.lo + u * (d.hi - d.lo); },
            [u](const TwoPoint& d) { return u <= 1.0 - d.prob_plus ? d.x_minus : d.x_plus; },
            [u](const PowerMargin& d) {
                if (u < 0.5) {
                    return d.center - d.half_width * std::pow(1.0 - 2.0 * u, 1.0 / d.alpha);
                }
                return d.center + d.half_width * std::pow(2.0 * u - 1.0, 1.0 / d.alpha);
            },
            [u](const AdversarialMargin& d) { return adversarial_inverse(d, u); },
        },
        dist);
}

double support_min(const CovariateDistribution& dist) {
    return breakpoints(dist).front();
}

double support_max(const CovariateDistribution& dist) {
    return breakpoints(dist).back();
}

double open_interval_mass(const CovariateDistribution& dist, double a, double b) {
    if (!(b > a)) {
        return 0.0;
    }
    return std::max(0.0, cdf_left(dist, b) - cdf(dist, a));
}

double mean_abs_deviation(const CovariateDistribution& dist, double theta) {
    // E|X - theta| = int_{-inf}^{theta} F + int_{theta}^{inf} (1 - F)
    std::vector<double> cuts = breakpoints(dist);
    cuts.push_back(theta);
    std::sort(cuts.begin(), cuts.end());
    const auto F = [&dist](double x) { return cdf(dist, x); };
    const auto S = [&dist](double x) { return 1.0 - cdf(dist, x); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(b > a)) continue;
        // Sample strictly inside each piece so jumps at atoms never straddle a panel.
        const double eps = 1e-15 * std::max(1.0, std::abs(b - a));
        if (b <= theta) {
            total += integrate(F, a + eps, b - eps);
        } else {
            total += integrate(S, a + eps, b - eps);
        }
    }
    return total;
}

MarginParams margin_params(const CovariateDistribution& dist, double theta) {
    validate(dist);
    if (!std::isfinite(theta) || theta < support_min(dist) || theta > support_max(dist)) {
        throw NotCertifiable("theta lies outside the convex hull of the covariate support");
    }
    MarginParams m;
    m.p = 1.0 - cdf_left(dist, theta);
    if (!(m.p > 0.0 && m.p < 1.0)) {
        throw NotCertifiable("P_X[theta, inf) must lie strictly between 0 and 1");
    }

    std::visit(
        overloaded{
            [&](const Uniform& d) {
                m.alpha = 1.0;
                m.c_star = 2.0 / (d.hi - d.lo);
                m.x0 = default_x0(m.c_star, m.alpha, m.p);
                m.mu = ((theta - d.lo) * (theta - d.lo) + (d.hi - theta) * (d.hi - theta)) /
                       (2.0 * (d.hi - d.lo));
            },
            [&](const TwoPoint& d) {
                if (!(theta > d.x_minus && theta < d.x_plus)) {
                    throw NotCertifiable("two_point: theta must lie strictly between the atoms");
                }
                constexpr double eps_cap = 1e-9;
                const double gap = std::min(theta - d.x_minus, d.x_plus - theta);
                m.alpha = kInfiniteMargin;
                m.c_star = 1.0;
                m.x0 = std::min(gap, 0.5) - eps_cap;
                if (!(m.x0 > 0.0)) {
                    throw NotCertifiable("two_point: theta too close to an atom");
                }
                m.mu = (1.0 - d.prob_plus) * (theta - d.x_minus) + d.prob_plus * (d.x_plus - theta);
            },
            [&](const PowerMargin& d) {
                if (theta == d.center) {
                    m.alpha = d.alpha;
                    m.c_star = std::pow(d.half_width, -d.alpha);
                } else if (d.alpha >= 1.0) {
                    // Density is bounded by alpha / (2 h), giving a linear margin.
                    m.alpha = 1.0;
                    m.c_star = d.alpha / d.half_width;
                } else {
                    throw NotCertifiable(
                        "power_margin: off-center theta with alpha < 1 has no built-in certificate");
                }
                m.x0 = default_x0(m.c_star, m.alpha, m.p);
                m.mu = theta == d.center ? d.alpha * d.half_width / (d.alpha + 1.0)
                                         : mean_abs_deviation(dist, theta);
            },
            [&](const AdversarialMargin& d) {
                if (theta != 0.0 && theta != d.delta) {
                    throw NotCertifiable(
                        "adversarial_margin: certificate exists only at theta = 0 or theta = delta");
                }
                m.alpha = d.alpha;
                m.c_star = d.c_star * adversarial_margin_ratio(d.alpha, d.x0 / d.delta);
                m.x0 = d.x0;
                m.mu = mean_abs_deviation(dist, theta);
            },
        },
        dist);

    m.p1 = m.p - m.c_star * std::pow(m.x0, m.alpha);
    if (!(m.p1 > 0.0)) {
        throw NotCertifiable("p1 = p - C* x0^alpha must be positive");
    }
    return m;
}

AdversarialPair adversarial_pair(double alpha, double c_star, double x0, double sigma,
                                 long long n) {
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !(c_star > 0.0) || !(sigma > 0.0) ||
        n < 1) {
        throw InvalidArgument("adversarial_pair: alpha, c_star, sigma, n must be positive");
    }
    if (!(x0 > 0.0 && x0 < 0.5)) {
        throw InvalidArgument("adversarial_pair: x0 must lie in (0, 1/2)");
    }
    const double delta = sigma * std::sqrt(alpha / static_cast<double>(n));
    if (!(c_star * (std::pow(x0, alpha) + std::pow(0.5 * delta, alpha)) < 1.0)) {
        throw InfeasibleConstruction(
            "adversarial_pair: C* (x0^alpha + (delta*/2)^alpha) >= 1; increase n");
    }
    AdversarialMargin law{alpha, c_star, x0, delta, -(x0 + 1.0), delta + x0 + 1.0};
    AdversarialPair pair;
    pair.delta_star = delta;
    pair.null_instance = BanditInstance{0.0, sigma, law};
    pair.alternative_instance = BanditInstance{delta, sigma, law};
    return pair;
}

} // namespace covband
