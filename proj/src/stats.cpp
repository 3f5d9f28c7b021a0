#include "ssep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "ssep/errors.hpp"

namespace ssep {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal quantile needs p in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double z_for_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw ParameterError("confidence must lie in (0,1)");
    return normal_quantile(0.5 + 0.5 * confidence);
}

MeanEstimate mean_estimate(std::span<const double> x, double confidence) {
    if (x.size() < 2) throw DataError("need at least 2 samples");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    MeanEstimate e;
    e.mean = mean;
    e.se = std::sqrt(ss / (n - 1.0) / n);
    const double z = z_for_confidence(confidence);
    e.ci = {mean - z * e.se, mean + z * e.se};
    return e;
}

VarianceEstimate variance_estimate(std::span<const double> x, double confidence) {
    if (x.size() < 4) throw DataError("need at least 4 samples");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (const double v : x) {
        const double d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    VarianceEstimate e;
    e.variance = m2 * n / (n - 1.0);
    // Var(s^2) ~ (mu4 - sigma^4 (n-3)/(n-1)) / n
    const double v = std::max(0.0, (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n);
    e.se = std::sqrt(v);
    const double z = z_for_confidence(confidence);
    e.ci = {std::max(0.0, e.variance - z * e.se), e.variance + z * e.se};
    return e;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double confidence) {
    if (trials <= 0 || successes < 0 || successes > trials) throw ParameterError("invalid binomial counts");
    const double z = z_for_confidence(confidence);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

namespace {
double stephens(std::size_t n) {
    const double r = std::sqrt(static_cast<double>(n));
    return r + 0.12 + 0.11 / r;
}
}  // namespace

double ks_p_value(double d, std::size_t n) { return kolmogorov_sf(stephens(n) * d); }

double ks_critical_value(std::size_t n, double level) {
    if (n == 0) throw ParameterError("ks_critical_value needs n > 0");
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must lie in (0,1)");
    double lo = 0.2, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_sf(mid) > level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / stephens(n);
}

double ks_normal(std::span<const double> x, double mean, double sigma, double lattice_step) {
    if (x.empty()) throw DataError("no samples");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    if (lattice_step > 0.0) {
        // evaluate F_n and Phi at the midpoints k*step + step/2 between occupied lattice values
        std::size_t i = 0;
        while (i < s.size()) {
            std::size_t j = i;
            while (j < s.size() && s[j] == s[i]) ++j;
            const double above = s[i] + 0.5 * lattice_step;
            const double below = s[i] - 0.5 * lattice_step;
            const double Fa = static_cast<double>(j) / n;
            const double Fb = static_cast<double>(i) / n;
            d = std::max(d, std::abs(Fa - normal_cdf((above - mean) / sigma)));
            d = std::max(d, std::abs(Fb - normal_cdf((below - mean) / sigma)));
            i = j;
        }
        return d;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = normal_cdf((s[i] - mean) / sigma);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - F), std::abs(F - static_cast<double>(i) / n)});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("no samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j >= y.size() || (i < x.size() && x[i] <= y[j]))
            v = x[i];
        else
            v = y[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DataError("ols needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DataError("ols needs distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            sse += r * r;
        }
        f.slope_se = std::sqrt(sse / (n - 2.0) / sxx);
    }
    return f;
}

}  // namespace ssep
