#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ssep/ensemble.hpp"
#include "ssep/observables.hpp"
#include "ssep/stats.hpp"

namespace ssep {

// Moments of a rate-1 continuous-time simple random walk S_t.
double walk_abs_mean(double t);       ///< E|S_t|
double walk_negative_prob(double t);  ///< P(S_t < 0)

/// E[J_{-1,0}(t)] from nu_rho conditioned on the origin: -(1-rho) P(S_t < 0).
double current_mean_conditioned(double rho, double t);
/// Var J_{-1,0}(t) from nu_rho conditioned on the origin.
double current_variance_conditioned(double rho, double t);
/// Var J_{-1,0}(t) from plain nu_rho (mean 0): rho(1-rho) E|S_t|.
double current_variance_stationary(double rho, double t);

struct HorizonStats {
    double t = 0.0;
    MeanEstimate mean_X, mean_J;
    double mean_J_exact = 0.0;              ///< exact E[J] under the initial law
    VarianceEstimate var_X_scaled, var_J_scaled;  ///< Var / sqrt(t)
    double ks_X = 0.0, ks_J = 0.0;          ///< lattice-corrected KS vs N(0, sigma^2) of x / t^{1/4}
};

enum class Observable { Current, Tagged };

struct CurvePoint {
    double alpha = 0.0;
    std::int64_t threshold = 0;   ///< smallest integer >= alpha a_N
    std::int64_t count = 0;       ///< replicas with observable >= threshold
    bool resolvable = false;      ///< count >= 10 and reference expected count >= 10
    double prob = 0.0;
    Interval prob_ci;             ///< Wilson
    double scaled = 0.0;          ///< (N/a_N^2) log prob; NaN when not resolvable
    Interval scaled_ci;           ///< Wilson bounds through the same map
    double scaled_se = 0.0;       ///< delta method
    double limit_reference = 0.0;     ///< -inf_{u >= alpha} rate(u)
    double gaussian_reference = 0.0;  ///< finite-N Gaussian tail, same scaling
    double reference_expected_count = 0.0;
};

/// Everything the statistics commands produce. Sweep and curve parts are filled
/// by the respective operations.
struct EnsembleSummary {
    std::int64_t replicas = 0;
    double confidence = 0.95;
    double rho = 0.5;
    std::uint64_t seed = 0;
    InitialLaw law = InitialLaw::BernoulliStar;

    std::vector<HorizonStats> horizons;
    LinearFit slope_X, slope_J;  ///< log Var vs log t

    Observable observable = Observable::Current;
    ScalingParams scaling;
    std::vector<CurvePoint> curve;
};

struct StatsOptions {
    int threads = 0;
    double confidence = 0.95;
    double ring_safety_factor = 10.0;
    InitialLaw law = InitialLaw::BernoulliStar;
    std::int64_t min_count = 10;  ///< resolvability threshold for tail counts
};

/// Var X(t)/sqrt(t), Var J(t)/sqrt(t) with intervals at every horizon, plus the
/// log-log slope. Needs >= 3 horizons and >= 1000 replicas.
EnsembleSummary variance_sweep(double rho, std::span<const double> horizons, std::int64_t replicas,
                               std::uint64_t seed, const StatsOptions& options = {});

/// Same statistics from an existing ensemble (no size preconditions).
EnsembleSummary summarize_sweep(const EnsembleSamples& samples, double rho, InitialLaw law, double confidence);

struct NormalityOptions {
    double level = 0.01;        ///< significance level of the critical value
    double mean = 0.0;
    double lattice_step = 0.0;  ///< spacing of the sample lattice, 0 for continuous data
    double threshold = 0.0;     ///< pass if statistic < threshold; 0 uses the critical value
    std::size_t min_samples = 1000;
};
struct KsResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 0.0;
    bool passes = false;
    std::size_t n = 0;
};
/// KS distance between the samples and N(mean, sigma2). Throws DataError below
/// options.min_samples.
KsResult normality_check(std::span<const double> samples, double sigma2, const NormalityOptions& options = {});

/// Ensemble observed at t = T N^2 on a ring sized for it.
EnsembleSamples mdp_ensemble(const ScalingParams& scaling, std::int64_t replicas, std::uint64_t seed,
                             const StatsOptions& options = {});

/// Tail curve of J (Current) or X (Tagged) at the last ensemble time.
EnsembleSummary curve_from_samples(const EnsembleSamples& samples, const ScalingParams& scaling,
                                   std::span<const double> alphas, Observable observable, std::uint64_t seed,
                                   const StatsOptions& options = {});

EnsembleSummary mdp_curve(const ScalingParams& scaling, std::span<const double> alphas, std::int64_t replicas,
                          std::uint64_t seed, const StatsOptions& options = {});
EnsembleSummary tagged_mdp_curve(const ScalingParams& scaling, std::span<const double> alphas,
                                 std::int64_t replicas, std::uint64_t seed, const StatsOptions& options = {});

struct CurveCheck {
    bool passed = true;
    std::vector<std::string> failures;
    std::size_t points_checked = 0;
};
/// Scaled log-prob nonincreasing in alpha over the resolvable points (alphas sorted).
CurveCheck check_monotone(const EnsembleSummary& curve);
/// Midpoint convexity of the empirical rate -scaled over consecutive equally spaced
/// resolvable triples, with the interval half-widths as slack.
CurveCheck check_midpoint_convex(const EnsembleSummary& curve);
/// |scaled - gaussian_reference| <= widths * CI width at every resolvable point.
CurveCheck check_gaussian_agreement(const EnsembleSummary& curve, double widths = 3.0);
/// Tagged curve at alpha against the current curve at rho alpha: intervals overlap
/// wherever both are resolvable.
CurveCheck check_tracking(const EnsembleSummary& current, const EnsembleSummary& tagged, double rho);

void write_sweep_csv(std::ostream& out, const EnsembleSummary& summary);
void write_curve_csv(std::ostream& out, const EnsembleSummary& summary);

}  // namespace ssep
