#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ssep/errors.hpp"
#include "ssep/stats.hpp"

using namespace ssep;

TEST_CASE("normal distribution helpers") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-13));
    CHECK(normal_sf(10.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-10));
    CHECK(normal_sf(-1.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-14));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(z_for_confidence(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(z_for_confidence(0.99) == doctest::Approx(2.5758293035489).epsilon(1e-12));
    for (double p : {1e-10, 0.01, 0.3, 0.77}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(z_for_confidence(1.0), ParameterError);
}

TEST_CASE("mean and variance intervals reach nominal coverage") {
    std::mt19937_64 gen(101);
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> norm(3.0, 2.0);
    int mean_hits = 0, var_hits = 0, var_normal_hits = 0;
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> e(400), g(400);
        for (auto& v : e) v = expo(gen);
        for (auto& v : g) v = norm(gen);
        mean_hits += mean_estimate(e).ci.contains(1.0);
        var_normal_hits += variance_estimate(g).ci.contains(4.0);
        std::vector<double> big(4000);
        for (auto& v : big) v = expo(gen);
        var_hits += variance_estimate(big).ci.contains(1.0);
    }
    MESSAGE("coverage: mean " << mean_hits << ", var(normal) " << var_normal_hits << ", var(exp) " << var_hits);
    CHECK(std::abs(mean_hits / double(reps) - 0.95) <= 0.03);
    CHECK(std::abs(var_normal_hits / double(reps) - 0.95) <= 0.03);
    CHECK(std::abs(var_hits / double(reps) - 0.95) <= 0.03);
}

TEST_CASE("variance estimate basics") {
    const std::vector<double> x{1, 2, 3, 4};
    const auto v = variance_estimate(x);
    CHECK(v.variance == doctest::Approx(5.0 / 3.0));
    CHECK(v.ci.contains(v.variance));
    const auto m = mean_estimate(x);
    CHECK(m.mean == 2.5);
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK_THROWS_AS(variance_estimate(std::vector<double>{1.0}), DataError);
}

TEST_CASE("Wilson interval") {
    const auto a = wilson_interval(0, 10);
    CHECK(a.lo == 0.0);
    CHECK(a.hi == doctest::Approx(0.27754).epsilon(1e-4));
    const auto b = wilson_interval(5, 10);
    CHECK(b.lo == doctest::Approx(0.23659).epsilon(1e-4));
    CHECK(b.hi == doctest::Approx(0.76341).epsilon(1e-4));
    std::mt19937_64 gen(7);
    std::binomial_distribution<std::int64_t> bin(200, 0.03);
    int hits = 0;
    for (int r = 0; r < 1000; ++r) hits += wilson_interval(bin(gen), 200).contains(0.03);
    CHECK(std::abs(hits / 1000.0 - 0.95) <= 0.03);
    CHECK_THROWS_AS(wilson_interval(3, 2), ParameterError);
}

TEST_CASE("Kolmogorov tail and critical values") {
    CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
    CHECK(kolmogorov_sf(0.0) == 1.0);
    CHECK(ks_critical_value(1000000, 0.01) * std::sqrt(1e6) == doctest::Approx(1.6276).epsilon(1e-3));
    CHECK(ks_p_value(ks_critical_value(500, 0.05), 500) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("KS against the sampling law stays below the 1% critical value 99% of the time") {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> norm(0.0, 1.0);
    const std::size_t n = 300;
    const double crit = ks_critical_value(n, 0.01);
    int below = 0, lattice_below = 0;
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> x(n), k(n);
        for (auto& v : x) v = norm(gen);
        for (auto& v : k) v = std::round(25.0 * norm(gen) + 3.0);
        below += ks_normal(x, 0.0, 1.0) < crit;
        lattice_below += ks_normal(k, 3.0, 25.0, 1.0) < crit;
    }
    MESSAGE("below critical value: " << below << ", lattice " << lattice_below);
    CHECK(below >= 980);
    CHECK(lattice_below >= 980);
}

TEST_CASE("KS distances by hand") {
    const std::vector<double> zeros(10, 0.0);
    CHECK(ks_normal(zeros, 0.0, 1.0, 1.0) == doctest::Approx(normal_cdf(-0.5)));
    CHECK(ks_normal(zeros, 0.0, 1.0) == doctest::Approx(0.5));
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6, 7};
    CHECK(ks_two_sample(a, a) == 0.0);
    CHECK(ks_two_sample(a, b) == 1.0);
    const std::vector<double> c{1, 2, 3, 4}, d{3, 4, 5, 6};
    CHECK(ks_two_sample(c, d) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_normal(std::vector<double>{}, 0.0, 1.0), DataError);
}

TEST_CASE("least squares") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = ols_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
    const std::vector<double> y2{0, 2, 1, 3};
    const auto g = ols_fit(x, y2);
    CHECK(g.slope == doctest::Approx(0.8));
    CHECK(g.intercept == doctest::Approx(0.3));
    CHECK(g.slope_se == doctest::Approx(std::sqrt(1.8 / 2.0 / 5.0)));
    CHECK_THROWS_AS(ols_fit(std::vector<double>{1, 1}, std::vector<double>{0, 1}), DataError);
}
