#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace covband {

inline constexpr double kInfiniteMargin = std::numeric_limits<double>::infinity();

struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
};

struct TwoPoint {
    double x_minus = -1.0;
    double x_plus = 1.0;
    double prob_plus = 0.5;
};

// Density proportional to |x - center|^(alpha - 1) on [center - half_width, center + half_width].
struct PowerMargin {
    double alpha = 1.0;
    double center = 0.0;
    double half_width = 1.0;
};

// Two-sided margin density used by the minimax lower-bound construction:
//   f(x) = C* alpha |x|^(alpha-1) / 2          on [-x0, delta/2]
//   f(x) = C* alpha |x - delta|^(alpha-1) / 2  on [delta/2, delta + x0]
// The remaining mass 1 - C*(x0^alpha + (delta/2)^alpha) is split evenly between
// two atoms placed outside [-x0, delta + x0].
struct AdversarialMargin {
    double alpha = 1.0;
    double c_star = 1.0;
    double x0 = 0.25;
    double delta = 0.1;
    double atom_left = -1.25;
    double atom_right = 1.35;

    double interval_mass() const;
    double atom_mass() const;
};

using CovariateDistribution = std::variant<Uniform, TwoPoint, PowerMargin, AdversarialMargin>;

struct BanditInstance {
    double theta = 0.0;
    double sigma = 1.0;
    CovariateDistribution covariate = Uniform{};
};

// Class-membership certificate: P_X(theta - x, theta + x) <= c_star x^alpha on (0, x0],
// p <= P_X[theta, inf) < 1, p1 = p - c_star x0^alpha > 0 and E|X - theta| <= mu.
struct MarginParams {
    double alpha = 1.0; // kInfiniteMargin when no mass lies near theta
    double c_star = 1.0;
    double x0 = 0.25;
    double p = 0.5;
    double p1 = 0.25;
    std::optional<double> mu;
};

struct AdversarialPair {
    BanditInstance null_instance;        // theta = 0
    BanditInstance alternative_instance; // theta = delta_star
    double delta_star = 0.0;
};

std::string family_name(const CovariateDistribution& dist);

// Throws InvalidArgument when a distribution violates its invariants.
void validate(const CovariateDistribution& dist);
void validate(const BanditInstance& instance);

// P(X <= x).
double cdf(const CovariateDistribution& dist, double x);
// P(X < x); differs from cdf only at atoms.
double cdf_left(const CovariateDistribution& dist, double x);
// inf{x : cdf(x) >= u} for u in (0, 1).
double inverse_cdf(const CovariateDistribution& dist, double u);

// Support endpoints (atoms included).
double support_min(const CovariateDistribution& dist);
double support_max(const CovariateDistribution& dist);

// P_X of the open interval (a, b).
double open_interval_mass(const CovariateDistribution& dist, double a, double b);

// E|X - theta| by quadrature of the distribution function.
double mean_abs_deviation(const CovariateDistribution& dist, double theta);

// One draw per uniform variate, by inverse-CDF transform.
inline double sample_covariate(const CovariateDistribution& dist, double u) {
    return inverse_cdf(dist, u);
}

// Reward of the covariate arm; the other arm always pays 0.
inline double reward_arm1(const BanditInstance& instance, double x, double eps) {
    return x - instance.theta + eps;
}

MarginParams margin_params(const CovariateDistribution& dist, double theta);

AdversarialPair adversarial_pair(double alpha, double c_star, double x0, double sigma,
                                 long long n);

} // namespace covband
