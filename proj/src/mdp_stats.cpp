#include "ssep/mdp_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "ssep/variational.hpp"

namespace ssep {

namespace {

// e^{-t} I_nu(t)
double scaled_bessel_i(int nu, double t) {
    if (t < 500.0) return std::exp(-t) * std::cyl_bessel_i(static_cast<double>(nu), t);
    // large-argument expansion; terms shrink like (k/2t)^k here
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (k * 8.0 * t);
        sum += term;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * t);
}

void check_rho_t(double rho, double t) {
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
    if (!(t >= 0.0)) throw ParameterError("t must be >= 0");
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void put(std::ostream& out, double v, bool last = false) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << (last ? '\n' : ',');
}

}  // namespace

double walk_abs_mean(double t) {
    if (!(t >= 0.0)) throw ParameterError("t must be >= 0");
    if (t == 0.0) return 0.0;
    return t * (scaled_bessel_i(0, t) + scaled_bessel_i(1, t));
}

double walk_negative_prob(double t) {
    if (!(t >= 0.0)) throw ParameterError("t must be >= 0");
    return 0.5 * (1.0 - scaled_bessel_i(0, t));
}

double current_mean_conditioned(double rho, double t) {
    check_rho_t(rho, t);
    return -(1.0 - rho) * walk_negative_prob(t);
}

double current_variance_conditioned(double rho, double t) {
    check_rho_t(rho, t);
    const double p = walk_negative_prob(t);
    return rho * (1.0 - rho) * (walk_abs_mean(t) - p) + (1.0 - rho) * (1.0 - rho) * p * (1.0 - p);
}

double current_variance_stationary(double rho, double t) {
    check_rho_t(rho, t);
    return rho * (1.0 - rho) * walk_abs_mean(t);
}

EnsembleSummary summarize_sweep(const EnsembleSamples& samples, double rho, InitialLaw law, double confidence) {
    const auto sig = sigma_constants(rho);
    EnsembleSummary s;
    s.replicas = samples.replicas;
    s.confidence = confidence;
    s.rho = rho;
    s.law = law;
    std::vector<double> lt, lvx, lvj;
    for (std::size_t k = 0; k < samples.times.size(); ++k) {
        const double t = samples.times[k];
        const auto x = samples.x_column(k);
        const auto j = samples.j_column(k);
        HorizonStats h;
        h.t = t;
        h.mean_X = mean_estimate(x, confidence);
        h.mean_J = mean_estimate(j, confidence);
        h.mean_J_exact = law == InitialLaw::BernoulliStar ? current_mean_conditioned(rho, t) : 0.0;
        const double root = std::sqrt(t);
        auto vx = variance_estimate(x, confidence);
        auto vj = variance_estimate(j, confidence);
        for (auto* v : {&vx, &vj}) {
            v->variance /= root;
            v->se /= root;
            v->ci = {v->ci.lo / root, v->ci.hi / root};
        }
        h.var_X_scaled = vx;
        h.var_J_scaled = vj;
        const double quarter = std::pow(t, 0.25);
        std::vector<double> xs(x), js(j);
        for (auto& v : xs) v /= quarter;
        for (auto& v : js) v /= quarter;
        h.ks_X = ks_normal(xs, 0.0, std::sqrt(sig.sigma_X2), 1.0 / quarter);
        h.ks_J = ks_normal(js, 0.0, std::sqrt(sig.sigma_J2), 1.0 / quarter);
        s.horizons.push_back(h);
        lt.push_back(std::log(t));
        lvx.push_back(std::log(vx.variance * root));
        lvj.push_back(std::log(vj.variance * root));
    }
    if (lt.size() >= 2) {
        s.slope_X = ols_fit(lt, lvx);
        s.slope_J = ols_fit(lt, lvj);
    }
    return s;
}

EnsembleSummary variance_sweep(double rho, std::span<const double> horizons, std::int64_t replicas,
                               std::uint64_t seed, const StatsOptions& options) {
    if (horizons.size() < 3) throw ParameterError("variance_sweep needs at least 3 horizons");
    if (replicas < 1000) throw ParameterError("variance_sweep needs at least 1000 replicas");
    EnsembleSpec spec;
    spec.law = options.law;
    spec.rho = rho;
    spec.times.assign(horizons.begin(), horizons.end());
    std::sort(spec.times.begin(), spec.times.end());
    spec.L = ring_half_width_for(spec.times.back(), options.ring_safety_factor, 2);
    spec.base_seed = seed;
    spec.replicas = replicas;
    spec.ring_safety_factor = options.ring_safety_factor;
    auto s = summarize_sweep(simulate_ensemble_parallel(spec, options.threads), rho, options.law, options.confidence);
    s.seed = seed;
    return s;
}

KsResult normality_check(std::span<const double> samples, double sigma2, const NormalityOptions& options) {
    if (samples.size() < options.min_samples)
        throw DataError("normality_check needs at least " + std::to_string(options.min_samples) + " samples");
    if (!(sigma2 > 0.0)) throw ParameterError("sigma2 must be > 0");
    KsResult r;
    r.n = samples.size();
    r.statistic = ks_normal(samples, options.mean, std::sqrt(sigma2), options.lattice_step);
    r.critical_value = ks_critical_value(r.n, options.level);
    r.p_value = ks_p_value(r.statistic, r.n);
    r.passes = r.statistic < (options.threshold > 0.0 ? options.threshold : r.critical_value);
    return r;
}

EnsembleSamples mdp_ensemble(const ScalingParams& scaling, std::int64_t replicas, std::uint64_t seed,
                             const StatsOptions& options) {
    scaling.validate();
    EnsembleSpec spec;
    spec.law = options.law;
    spec.rho = scaling.rho;
    spec.times = {scaling.horizon()};
    spec.L = ring_half_width_for(scaling.horizon(), options.ring_safety_factor, 2);
    spec.base_seed = seed;
    spec.replicas = replicas;
    spec.ring_safety_factor = options.ring_safety_factor;
    return simulate_ensemble_parallel(spec, options.threads);
}

EnsembleSummary curve_from_samples(const EnsembleSamples& samples, const ScalingParams& scaling,
                                   std::span<const double> alphas, Observable observable, std::uint64_t seed,
                                   const StatsOptions& options) {
    scaling.validate();
    if (samples.times.empty() || samples.replicas <= 0) throw DataError("empty ensemble");
    const std::size_t k = samples.times.size() - 1;
    const double t = samples.times[k];
    const double aN = scaling.a_N();
    const double speed = scaling.speed();
    const auto sig = sigma_constants(scaling.rho);
    const double sigma2 = observable == Observable::Current ? sig.sigma_J2 : sig.sigma_X2;
    const double sd = std::sqrt(sigma2 * std::sqrt(t));
    const double mean = observable == Observable::Current && options.law == InitialLaw::BernoulliStar
                            ? current_mean_conditioned(scaling.rho, t)
                            : 0.0;
    const double n = static_cast<double>(samples.replicas);

    std::vector<std::int64_t> values(static_cast<std::size_t>(samples.replicas));
    for (std::int64_t r = 0; r < samples.replicas; ++r)
        values[static_cast<std::size_t>(r)] = observable == Observable::Current ? samples.j(r, k) : samples.x(r, k);
    std::sort(values.begin(), values.end());

    EnsembleSummary s;
    s.replicas = samples.replicas;
    s.confidence = options.confidence;
    s.rho = scaling.rho;
    s.seed = seed;
    s.law = options.law;
    s.observable = observable;
    s.scaling = scaling;
    for (const double alpha : alphas) {
        CurvePoint p;
        p.alpha = alpha;
        p.threshold = static_cast<std::int64_t>(std::ceil(alpha * aN - 1e-12));
        p.count = static_cast<std::int64_t>(values.end() - std::lower_bound(values.begin(), values.end(), p.threshold));
        p.prob = static_cast<double>(p.count) / n;
        p.prob_ci = wilson_interval(p.count, samples.replicas, options.confidence);
        const double rate = observable == Observable::Current ? rate_J(std::max(alpha, 0.0), scaling.rho, scaling.T)
                                                              : rate_I(std::max(alpha, 0.0), scaling.rho, scaling.T);
        p.limit_reference = -rate;
        const double tail = normal_sf((static_cast<double>(p.threshold) - 0.5 - mean) / sd);
        p.gaussian_reference = speed * std::log(tail);
        p.reference_expected_count = tail * n;
        p.resolvable = p.count >= options.min_count && p.reference_expected_count >= static_cast<double>(options.min_count);
        if (p.resolvable) {
            p.scaled = speed * std::log(p.prob);
            p.scaled_ci = {speed * std::log(p.prob_ci.lo), speed * std::log(p.prob_ci.hi)};
            p.scaled_se = speed * std::sqrt((1.0 - p.prob) / (n * p.prob));
        } else {
            p.scaled = kNaN;
            p.scaled_ci = {kNaN, kNaN};
            p.scaled_se = kNaN;
        }
        s.curve.push_back(p);
    }
    return s;
}

EnsembleSummary mdp_curve(const ScalingParams& scaling, std::span<const double> alphas, std::int64_t replicas,
                          std::uint64_t seed, const StatsOptions& options) {
    return curve_from_samples(mdp_ensemble(scaling, replicas, seed, options), scaling, alphas, Observable::Current,
                              seed, options);
}

EnsembleSummary tagged_mdp_curve(const ScalingParams& scaling, std::span<const double> alphas,
                                 std::int64_t replicas, std::uint64_t seed, const StatsOptions& options) {
    return curve_from_samples(mdp_ensemble(scaling, replicas, seed, options), scaling, alphas, Observable::Tagged,
                              seed, options);
}

namespace {

std::vector<const CurvePoint*> resolvable_points(const EnsembleSummary& s) {
    std::vector<const CurvePoint*> pts;
    for (const auto& p : s.curve)
        if (p.resolvable) pts.push_back(&p);
    return pts;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

}  // namespace

CurveCheck check_monotone(const EnsembleSummary& s) {
    CurveCheck c;
    const auto pts = resolvable_points(s);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        ++c.points_checked;
        if (pts[i]->alpha > pts[i - 1]->alpha && pts[i]->scaled > pts[i - 1]->scaled) {
            c.passed = false;
            c.failures.push_back(fmt("increase between alpha=%g and alpha=%g", pts[i - 1]->alpha, pts[i]->alpha));
        }
    }
    return c;
}

CurveCheck check_midpoint_convex(const EnsembleSummary& s) {
    CurveCheck c;
    const auto pts = resolvable_points(s);
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const auto *a = pts[i - 1], *m = pts[i], *b = pts[i + 1];
        const double h1 = m->alpha - a->alpha, h2 = b->alpha - m->alpha;
        if (std::abs(h1 - h2) > 1e-9 * std::max(1.0, std::abs(h1))) continue;
        ++c.points_checked;
        auto half = [](const CurvePoint* p) { return 0.5 * p->scaled_ci.width(); };
        const double excess = -m->scaled - 0.5 * (-a->scaled - b->scaled);
        const double slack = half(m) + 0.5 * (half(a) + half(b));
        if (excess > slack) {
            c.passed = false;
            c.failures.push_back(fmt("rate not midpoint convex at alpha=%g (excess %.4g > slack %.4g)", m->alpha, excess,
                                     slack));
        }
    }
    return c;
}

CurveCheck check_gaussian_agreement(const EnsembleSummary& s, double widths) {
    CurveCheck c;
    for (const auto* p : resolvable_points(s)) {
        ++c.points_checked;
        const double gap = std::abs(p->scaled - p->gaussian_reference);
        if (gap > widths * p->scaled_ci.width()) {
            c.passed = false;
            c.failures.push_back(fmt("alpha=%g: |empirical - reference| = %.4g exceeds %.4g", p->alpha, gap,
                                     widths * p->scaled_ci.width()));
        }
    }
    return c;
}

CurveCheck check_tracking(const EnsembleSummary& current, const EnsembleSummary& tagged, double rho) {
    CurveCheck c;
    for (const auto& x : tagged.curve) {
        if (!x.resolvable) continue;
        const double target = rho * x.alpha;
        for (const auto& j : current.curve) {
            if (!j.resolvable || std::abs(j.alpha - target) > 1e-9 * std::max(1.0, std::abs(target))) continue;
            ++c.points_checked;
            const bool overlap = x.scaled_ci.lo <= j.scaled_ci.hi && j.scaled_ci.lo <= x.scaled_ci.hi;
            if (!overlap) {
                c.passed = false;
                c.failures.push_back(fmt("X at alpha=%g (%.4g) vs J at %g: intervals disjoint", x.alpha, x.scaled, j.alpha) +
                                     fmt(" (J %.4g)", j.scaled));
            }
        }
    }
    return c;
}

void write_sweep_csv(std::ostream& out, const EnsembleSummary& s) {
    out << "t,mean_X,mean_X_lo,mean_X_hi,mean_J,mean_J_lo,mean_J_hi,mean_J_exact,"
           "var_X_over_sqrt_t,var_X_lo,var_X_hi,var_J_over_sqrt_t,var_J_lo,var_J_hi,ks_X,ks_J\n";
    for (const auto& h : s.horizons) {
        for (const double v : {h.t, h.mean_X.mean, h.mean_X.ci.lo, h.mean_X.ci.hi, h.mean_J.mean, h.mean_J.ci.lo,
                               h.mean_J.ci.hi, h.mean_J_exact, h.var_X_scaled.variance, h.var_X_scaled.ci.lo,
                               h.var_X_scaled.ci.hi, h.var_J_scaled.variance, h.var_J_scaled.ci.lo,
                               h.var_J_scaled.ci.hi, h.ks_X})
            put(out, v);
        put(out, h.ks_J, true);
    }
}

void write_curve_csv(std::ostream& out, const EnsembleSummary& s) {
    out << "alpha,threshold,count,resolvable,prob,prob_lo,prob_hi,scaled,scaled_lo,scaled_hi,scaled_se,"
           "limit_reference,gaussian_reference,reference_expected_count\n";
    for (const auto& p : s.curve) {
        put(out, p.alpha);
        out << p.threshold << ',' << p.count << ',' << (p.resolvable ? 1 : 0) << ',';
        for (const double v : {p.prob, p.prob_ci.lo, p.prob_ci.hi, p.scaled, p.scaled_ci.lo, p.scaled_ci.hi,
                               p.scaled_se, p.limit_reference, p.gaussian_reference})
            put(out, v);
        put(out, p.reference_expected_count, true);
    }
}

}  // namespace ssep
