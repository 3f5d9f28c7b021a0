#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

// Frozen reference values.
inline const double kSqrtPiOver2 = std::sqrt(std::numbers::pi) / 2.0;           // 0.886227
inline const double kSqrt2PiOver4 = std::sqrt(2.0 * std::numbers::pi) / 4.0;   // 0.626657
inline const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);              // 2.50663
inline const double kSigmaJ2Half = std::sqrt(2.0 / std::numbers::pi) / 4.0;    // 0.19947
inline const double kSigmaX2Half = std::sqrt(2.0 / std::numbers::pi);          // 0.79788

// Plain ring of ints with explicit site arithmetic, one swap at a time.
struct NaiveRing {
    int L;
    std::vector<int> eta;  // eta[x + L]
    std::int64_t tagged;   // current site in [-L, L)
    std::int64_t X = 0;
    std::map<std::int64_t, std::int64_t> J;  // J[x] = J_{x,x+1}, x in [-L, L)

    NaiveRing(int L_, const std::vector<std::int64_t>& sites, std::int64_t tag) : L(L_), eta(2 * L_, 0), tagged(tag) {
        for (auto x : sites) eta[x + L] = 1;
    }
    std::int64_t wrap(std::int64_t x) const {
        const std::int64_t n = 2 * L;
        return ((x + L) % n + n) % n - L;
    }
    int& at(std::int64_t x) { return eta[wrap(x) + L]; }
    void swap_bond(std::int64_t x) {
        x = wrap(x);
        const std::int64_t y = wrap(x + 1);
        const int a = at(x), b = at(y);
        if (a == b) return;
        at(x) = b;
        at(y) = a;
        J[x] += a ? 1 : -1;
        if (tagged == x) {
            tagged = y;
            ++X;
        } else if (tagged == y) {
            tagged = x;
            --X;
        }
    }
};

inline double poisson_pmf(double mean, int k) {
    return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

// P(S_t = k) for the rate-1 walk as a Skellam(t/2, t/2) sum.
inline double walk_pmf(int k, double t) {
    const int a = std::abs(k);
    double sum = 0.0;
    for (int m = 0; m < 2000; ++m) {
        const double term = poisson_pmf(t / 2, m + a) * poisson_pmf(t / 2, m);
        sum += term;
        if (m > t && term < 1e-300) break;
    }
    return sum;
}

inline double walk_abs_mean(double t) {
    double s = 0.0;
    for (int k = 1; k < 60 + 20 * static_cast<int>(std::sqrt(t) + t / 10); ++k) s += 2.0 * k * walk_pmf(k, t);
    return s;
}

inline double walk_negative_prob(double t) { return 0.5 * (1.0 - walk_pmf(0, t)); }

// exp(tQ) v for a dense generator via scaling and squaring of a Taylor series.
inline std::vector<double> dense_expm_apply(const std::vector<std::vector<double>>& Q, const std::vector<double>& v,
                                            double t) {
    const std::size_t n = Q.size();
    double norm = 0.0;
    for (const auto& row : Q) {
        double s = 0.0;
        for (double q : row) s += std::abs(q);
        norm = std::max(norm, s);
    }
    int squarings = 0;
    while (norm * t / std::ldexp(1.0, squarings) > 0.5) ++squarings;
    const double h = t / std::ldexp(1.0, squarings);
    using M = std::vector<std::vector<double>>;
    M E(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) E[i][i] = term[i][i] = 1.0;
    auto mul = [n](const M& a, const M& b) {
        M c(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (a[i][k] != 0.0)
                    for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
        return c;
    };
    M hQ = Q;
    for (auto& row : hQ)
        for (auto& q : row) q *= h;
    for (int k = 1; k <= 30; ++k) {
        term = mul(term, hQ);
        for (auto& row : term)
            for (auto& x : row) x /= k;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) E[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) E = mul(E, E);
    // row vector times E (distributions evolve as v P(t))
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += v[i] * E[i][j];
    return out;
}

}  // namespace oracle
