#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ssep/variational.hpp"
#include "support/oracles.hpp"

using namespace ssep;

namespace {

const Grid kSmall{1.0, 6.0, 16, 32};

Field random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (double& k : f.K) k = u(gen);
    return f;
}

InitialProfile random_profile(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    InitialProfile p(g);
    for (double& m : p.mu0) m = u(gen);
    return p;
}

bool is_fixed(const Grid& g, int i, int j) { return i == 0 || j == 0 || j == g.nu || (i == g.nt && j == g.nu / 2); }

}  // namespace

TEST_CASE("closed forms") {
    CHECK(rate_J(1.0, 0.5, 1.0) == doctest::Approx(oracle::kSqrt2Pi).epsilon(1e-14));
    CHECK(rate_I(1.0, 0.5, 1.0) == doctest::Approx(oracle::kSqrt2PiOver4).epsilon(1e-14));
    CHECK(sigma_constants(0.5).sigma_J2 == doctest::Approx(oracle::kSigmaJ2Half).epsilon(1e-14));
    CHECK(sigma_constants(0.5).sigma_X2 == doctest::Approx(oracle::kSigmaX2Half).epsilon(1e-14));
    for (double rho : {0.1, 0.3, 0.5, 0.8}) {
        const auto s = sigma_constants(rho);
        CHECK(s.sigma_X2 * s.sigma_J2 == doctest::Approx(2.0 / std::numbers::pi * (1 - rho) * (1 - rho)).epsilon(1e-13));
        CHECK(rho * (1 - rho) * rate_J(0.7, rho, 2.0) ==
              doctest::Approx(oracle::kSqrt2PiOver4 * 0.49 / std::sqrt(2.0)).epsilon(1e-13));
        CHECK(rate_I(0.4, rho, 1.0) == doctest::Approx(rate_J(0.4 * rho, rho, 1.0)));
    }
    CHECK(gaussian_rate(2.0, 1.0, 4.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rate_J(1.0, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(rate_J(1.0, 0.5, 0.0), ParameterError);
}

TEST_CASE("eval_F by hand") {
    Field zero(kSmall);
    CHECK(eval_F(zero) == 0.0);

    Field lin(kSmall);  // K = t: only the time-derivative term, 1/2 * T * 2U
    for (int i = 0; i <= kSmall.nt; ++i)
        for (int j = 0; j <= kSmall.nu; ++j) lin(i, j) = kSmall.t(i);
    CHECK(eval_F(lin) == doctest::Approx(kSmall.T * kSmall.U).epsilon(1e-13));

    Field quad(kSmall);  // K = u^2: K_uu = 2 inside, K_u(T) = 2u on faces
    for (int i = 0; i <= kSmall.nt; ++i)
        for (int j = 0; j <= kSmall.nu; ++j) quad(i, j) = kSmall.u(j) * kSmall.u(j);
    double terminal = 0.0;
    for (int f = 0; f < kSmall.nu; ++f) terminal += kSmall.du() * kSmall.face(f) * kSmall.face(f);
    CHECK(eval_F(quad) == doctest::Approx(0.5 * kSmall.T * (kSmall.nu - 1) * kSmall.du() + terminal).epsilon(1e-12));

    CHECK_THROWS_AS(eval_F(quad, Grid{1.0, 6.0, 16, 64}), ParameterError);
}

TEST_CASE("eval_G with mu0 = 0 equals eval_F") {
    const auto K = random_field(kSmall, 3);
    InitialProfile mu(kSmall);
    CHECK(eval_G(K, mu, 0.3) == doctest::Approx(eval_F(K)).epsilon(1e-14));
    CHECK(eval_G(K, mu, 0.3) == eval_G(K, mu, 0.8));
    CHECK_THROWS_AS(eval_G(K, mu, 0.0), ParameterError);
}

TEST_CASE("gradients match central differences") {
    const Grid g{1.0, 6.0, 8, 12};
    const auto K = random_field(g, 11);
    const auto mu = random_profile(g, 12);
    std::vector<double> gK, gmu, gF;
    gradient_G(K, mu, gK, gmu);
    gradient_F(K, gF);
    const double h = 1e-5;
    std::mt19937_64 pick(13);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = pick() % K.K.size();
        Field p(K), m(K);
        p.K[n] += h;
        m.K[n] -= h;
        const double fd_F = (eval_F(p) - eval_F(m)) / (2 * h);
        const double fd_G = (eval_G(p, mu, 0.5) - eval_G(m, mu, 0.5)) / (2 * h);
        CHECK(std::abs(fd_F - gF[n]) <= 1e-6 * std::max(1.0, std::abs(gF[n])));
        CHECK(std::abs(fd_G - gK[n]) <= 1e-6 * std::max(1.0, std::abs(gK[n])));
    }
    for (std::size_t f = 0; f < mu.mu0.size(); ++f) {
        InitialProfile p(mu), m(mu);
        p.mu0[f] += h;
        m.mu0[f] -= h;
        const double fd = (eval_G(K, p, 0.5) - eval_G(K, m, 0.5)) / (2 * h);
        CHECK(std::abs(fd - gmu[f]) <= 1e-6 * std::max(1.0, std::abs(gmu[f])));
    }
}

TEST_CASE("minimize_F: constraints, stationarity, closed form") {
    const auto r = minimize_F(1.0, 1.0, Grid{1.0, 6.0, 32, 64});
    for (double c : r.report.constraint_residuals) CHECK(c == 0.0);
    CHECK(r.report.value == doctest::Approx(oracle::kSqrtPiOver2).epsilon(0.01));
    CHECK(r.report.closed_form == doctest::Approx(oracle::kSqrtPiOver2).epsilon(1e-14));
    std::vector<double> g;
    gradient_F(r.K, g);
    double gmax = 0.0;
    for (int i = 0; i <= r.K.grid.nt; ++i)
        for (int j = 0; j <= r.K.grid.nu; ++j)
            if (!is_fixed(r.K.grid, i, j)) gmax = std::max(gmax, std::abs(g[i * (r.K.grid.nu + 1) + j]));
    CHECK(gmax < 1e-7);
}

TEST_CASE("minimum is a quadratic in alpha: symmetry, alpha^2 scaling, convexity") {
    const double f1 = minimize_F(1.0, 1.0, kSmall).report.value;
    CHECK(minimize_F(-1.0, 1.0, kSmall).report.value == doctest::Approx(f1).epsilon(1e-8));
    CHECK(minimize_F(2.0, 1.0, kSmall).report.value == doctest::Approx(4 * f1).epsilon(1e-8));
    CHECK(minimize_F(0.0, 1.0, kSmall).report.value == 0.0);
    const double a = 0.3, b = 1.7;
    const double fa = minimize_F(a, 1.0, kSmall).report.value;
    const double fb = minimize_F(b, 1.0, kSmall).report.value;
    const double fm = minimize_F(0.5 * (a + b), 1.0, kSmall).report.value;
    CHECK(fm <= 0.5 * (fa + fb));
    const double g1 = minimize_G(1.0, 1.0, 0.5, kSmall).report.value;
    CHECK(minimize_G(-1.0, 1.0, 0.5, kSmall).report.value == doctest::Approx(g1).epsilon(1e-8));
    CHECK(minimize_G(0.5, 1.0, 0.5, kSmall).report.value == doctest::Approx(0.25 * g1).epsilon(1e-8));
    CHECK(g1 < f1);
}

TEST_CASE("time scaling: min F at horizon T is T^{-1/2} times the unit value") {
    const double f1 = minimize_F(1.0, 1.0, Grid::with_width(1.0, 16, 32)).report.value;
    for (double T : {0.25, 4.0}) {
        const double fT = minimize_F(1.0, T, Grid::with_width(T, 16, 32)).report.value;
        CHECK(fT == doctest::Approx(f1 / std::sqrt(T)).epsilon(1e-7));
    }
}

TEST_CASE("minimizers are minimal under admissible perturbations") {
    const auto F = minimize_F(0.8, 1.0, kSmall);
    const auto G = minimize_G(0.8, 1.0, 0.4, kSmall);
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double eps = std::pow(10.0, -1.0 - trial % 4);
        Field KF(F.K), KG(G.K);
        InitialProfile mu(G.mu0);
        for (int i = 0; i <= kSmall.nt; ++i)
            for (int j = 0; j <= kSmall.nu; ++j)
                if (!is_fixed(kSmall, i, j)) {
                    KF(i, j) += eps * n(gen);
                    KG(i, j) += eps * n(gen);
                }
        for (double& m : mu.mu0) m += eps * n(gen);
        CHECK(eval_F(KF) >= F.report.value * (1 - 1e-12));
        CHECK(eval_G(KG, mu, 0.4) >= G.report.value * (1 - 1e-12));
    }
}

TEST_CASE("minimize preconditions") {
    CHECK_THROWS_AS(minimize_F(1.0, 1.0, Grid{1.0, 6.0, 16, 31}), ParameterError);
    CHECK_THROWS_AS(minimize_F(1.0, 1.0, Grid{1.0, 3.0, 16, 32}), ParameterError);
    CHECK_THROWS_AS(minimize_F(1.0, 2.0, kSmall), ParameterError);
    CHECK_THROWS_AS(minimize_G(1.0, 1.0, 1.2, kSmall), ParameterError);
    VariationalOptions few;
    few.max_iter = 3;
    CHECK_THROWS_AS(minimize_F(1.0, 1.0, kSmall, few), SolverError);
}

TEST_CASE("reflected construction") {
    const double alpha = 1.0, T = 1.0;
    const Grid full{T, 6.0, 32, 64};
    const Grid half{T / 2, 6.0, 16, 64};
    VariationalOptions opt;
    opt.u_width_factor = 0.0;
    const auto h = minimize_F(alpha / 2, T / 2, half, opt);
    const auto R = construct_reflected_minimizer(h.K, full);
    const int m = half.nt;

    CHECK(R.K(full.nt, full.nu / 2) == doctest::Approx(alpha).epsilon(1e-12));
    for (int j = 0; j <= full.nu; ++j) CHECK(R.K(0, j) == 0.0);
    const auto mu = density_field(R.K, R.mu0);
    for (int f = 0; f < full.nu; ++f) {
        CHECK(std::abs(mu[m * full.nu + f]) < 1e-12);
        for (int s = 1; s <= m; ++s) CHECK(mu[(m + s) * full.nu + f] == doctest::Approx(-mu[(m - s) * full.nu + f]));
        const double dK = (R.K(full.nt, f + 1) - R.K(full.nt, f)) / full.du();
        CHECK(dK == doctest::Approx(2 * R.mu0.mu0[f]).epsilon(1e-12));
    }
    const double g_reflected = eval_G(R.K, R.mu0, 0.5);
    CHECK(g_reflected == doctest::Approx(2 * h.report.value).epsilon(1e-12));
    const double g_min = minimize_G(alpha, T, 0.5, full).report.value;
    CHECK(g_reflected == doctest::Approx(g_min).epsilon(1e-7));
    CHECK(g_reflected >= g_min * (1 - 1e-9));

    CHECK_THROWS_AS(construct_reflected_minimizer(h.K, Grid{T, 6.0, 30, 64}), ParameterError);
}

TEST_CASE("Euler-Lagrange residual of K = t^2") {
    const Grid g{2.0, 6.0, 16, 16};
    Field K(g);
    for (int i = 0; i <= g.nt; ++i)
        for (int j = 0; j <= g.nu; ++j) K(i, j) = g.t(i) * g.t(i);
    const auto r = euler_lagrange_residual(K);
    CHECK(r.bulk == doctest::Approx(2.0));
    CHECK(r.interior == doctest::Approx(2.0));
    CHECK(r.terminal_dt == doctest::Approx(2 * g.T));
    CHECK(r.terminal_uu == doctest::Approx(0.0));
    CHECK(r.natural_bc == doctest::Approx(2 * g.T));
    CHECK_THROWS_AS(euler_lagrange_residual(Field(Grid{1.0, 6.0, 4, 16})), ParameterError);
}

TEST_CASE("EL bulk residual shrinks under refinement") {
    const double r1 = minimize_F(1.0, 1.0, Grid{1.0, 6.0, 16, 32}).report.el_residual;
    const double r2 = minimize_F(1.0, 1.0, Grid{1.0, 6.0, 32, 64}).report.el_residual;
    CHECK(r2 < 0.5 * r1);
}

TEST_CASE("CSV dumps") {
    const Grid g{1.0, 6.0, 4, 4};
    Field K(g);
    K(4, 2) = 0.1;
    std::ostringstream out;
    write_field_csv(out, K);
    std::istringstream in(out.str());
    std::string line;
    int lines = 0;
    std::getline(in, line);
    CHECK(line == "t,u,K");
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 25);
    CHECK(out.str().find("1,0,0.10000000000000001") != std::string::npos);
    std::ostringstream prof;
    write_profile_csv(prof, InitialProfile(g));
    CHECK(prof.str().rfind("u,mu0\n-4.5,0\n", 0) == 0);
}
