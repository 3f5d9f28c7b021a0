#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ssep {

double normal_cdf(double z);
/// Upper tail P(Z >= z), accurate far into the tail.
double normal_sf(double z);
double normal_quantile(double p);
/// Two-sided z value for a confidence level (1.959964 for 0.95).
double z_for_confidence(double confidence);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
    double width() const { return hi - lo; }
};

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    Interval ci;
};
MeanEstimate mean_estimate(std::span<const double> x, double confidence = 0.95);

/// Unbiased sample variance with an asymptotic normal interval whose standard
/// error uses the sample fourth central moment (valid without normality).
struct VarianceEstimate {
    double variance = 0.0;
    double se = 0.0;
    Interval ci;
};
VarianceEstimate variance_estimate(std::span<const double> x, double confidence = 0.95);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double confidence = 0.95);

/// Kolmogorov distribution tail P(K > x) (series form).
double kolmogorov_sf(double x);

/// Critical KS distance at significance `level` for n samples (Stephens' finite-n correction).
double ks_critical_value(std::size_t n, double level);
/// Approximate p-value of a one-sample KS distance d over n samples.
double ks_p_value(double d, std::size_t n);

/// sup |F_n - Phi((x - mean)/sigma)|. With lattice_step > 0 the samples are taken to
/// lie on a lattice of that spacing and the two laws are compared half a step either
/// side of every observed value (continuity correction).
double ks_normal(std::span<const double> x, double mean, double sigma, double lattice_step = 0.0);

/// Two-sample KS distance sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};
/// Ordinary least squares y = intercept + slope x; needs >= 2 distinct x.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

}  // namespace ssep
