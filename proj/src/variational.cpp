#include "ssep/variational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

namespace ssep {

namespace {

void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
}

void check_T(double T) {
    if (!(T > 0.0)) throw ParameterError("T must be > 0");
}

bool same_grid(const Grid& a, const Grid& b) {
    return a.nt == b.nt && a.nu == b.nu && a.T == b.T && a.U == b.U;
}

// The discrete functional is a sum of weighted squares w * (a . z)^2 over "rows",
// with z = (K nodes, mu0 faces). Every evaluation, gradient and diagonal below
// walks the same rows.
struct Row {
    double w = 0.0;
    int n = 0;
    std::size_t idx[8];
    double coef[8];
    void add(std::size_t i, double c) {
        idx[n] = i;
        coef[n] = c;
        ++n;
    }
};

template <class Fn>
void visit_rows(const Grid& g, bool with_mu, Fn&& fn) {
    const int nt = g.nt, nu = g.nu;
    const double dt = g.dt(), du = g.du();
    const std::size_t stride = static_cast<std::size_t>(nu) + 1;
    const std::size_t mu_base = g.nodes();
    auto node = [stride](int i, int j) { return static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(j); };

    // 1/2 K_t^2: forward difference per time cell, trapezoid in u
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j <= nu; ++j) {
            Row r;
            const double wu = (j == 0 || j == nu) ? 0.5 * du : du;
            r.w = 0.5 * dt * wu;
            r.add(node(i + 1, j), 1.0 / dt);
            r.add(node(i, j), -1.0 / dt);
            fn(r);
        }
    // 1/8 (K_uu - mu0_u)^2: 3-point K_uu averaged over the two time levels
    const double c2 = 0.5 / (du * du);
    for (int i = 0; i < nt; ++i)
        for (int j = 1; j < nu; ++j) {
            Row r;
            r.w = dt * du / 8.0;
            for (int di = 0; di <= 1; ++di) {
                r.add(node(i + di, j - 1), c2);
                r.add(node(i + di, j), -2.0 * c2);
                r.add(node(i + di, j + 1), c2);
            }
            if (with_mu) {
                r.add(mu_base + static_cast<std::size_t>(j), -1.0 / du);
                r.add(mu_base + static_cast<std::size_t>(j - 1), 1.0 / du);
            }
            fn(r);
        }
    // 1/4 (K_u(T) - mu0)^2 + 1/4 mu0^2 on faces
    for (int f = 0; f < nu; ++f) {
        Row r;
        r.w = 0.25 * du;
        r.add(node(nt, f + 1), 1.0 / du);
        r.add(node(nt, f), -1.0 / du);
        if (with_mu) r.add(mu_base + static_cast<std::size_t>(f), -1.0);
        fn(r);
        if (with_mu) {
            Row m;
            m.w = 0.25 * du;
            m.add(mu_base + static_cast<std::size_t>(f), 1.0);
            fn(m);
        }
    }
}

double energy(const Grid& g, bool with_mu, const std::vector<double>& z) {
    double sum = 0.0;
    visit_rows(g, with_mu, [&](const Row& r) {
        double a = 0.0;
        for (int k = 0; k < r.n; ++k) a += r.coef[k] * z[r.idx[k]];
        sum += r.w * a * a;
    });
    return sum;
}

// out = grad energy(z) = B z
void apply(const Grid& g, bool with_mu, const std::vector<double>& z, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    visit_rows(g, with_mu, [&](const Row& r) {
        double a = 0.0;
        for (int k = 0; k < r.n; ++k) a += r.coef[k] * z[r.idx[k]];
        const double s = 2.0 * r.w * a;
        for (int k = 0; k < r.n; ++k) out[r.idx[k]] += s * r.coef[k];
    });
}

std::vector<double> diagonal(const Grid& g, bool with_mu, std::size_t n) {
    std::vector<double> d(n, 0.0);
    visit_rows(g, with_mu, [&](const Row& r) {
        for (int k = 0; k < r.n; ++k) d[r.idx[k]] += 2.0 * r.w * r.coef[k] * r.coef[k];
    });
    return d;
}

std::vector<double> pack(const Field& K, const InitialProfile* mu0) {
    std::vector<double> z(K.K);
    if (mu0) z.insert(z.end(), mu0->mu0.begin(), mu0->mu0.end());
    return z;
}

struct QpResult {
    std::vector<double> z;
    int iterations = 0;
    double residual = 0.0;
};

// Minimize 1/2 z'Bz with the constrained entries of z fixed at their given values,
// by Jacobi-preconditioned CG on the free entries.
QpResult solve_constrained(const Grid& g, bool with_mu, std::vector<double> z, const std::vector<char>& fixed,
                           const VariationalOptions& opt) {
    const std::size_t n = z.size();
    std::vector<double> r(n), p(n), q(n), s(n);
    const std::vector<double> d = diagonal(g, with_mu, n);
    apply(g, with_mu, z, r);
    for (std::size_t k = 0; k < n; ++k) r[k] = fixed[k] ? 0.0 : -r[k];
    auto norm = [](const std::vector<double>& v) {
        double a = 0.0;
        for (const double x : v) a += x * x;
        return std::sqrt(a);
    };
    const double r0 = norm(r);
    QpResult out;
    if (r0 == 0.0) {
        out.z = std::move(z);
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) s[k] = fixed[k] ? 0.0 : r[k] / d[k];
    p = s;
    double rs = 0.0;
    for (std::size_t k = 0; k < n; ++k) rs += r[k] * s[k];
    double rel = 1.0;
    int it = 0;
    while (rel > opt.qp_tol) {
        if (it >= opt.max_iter)
            throw SolverError("conjugate gradient did not converge in " + std::to_string(opt.max_iter) +
                                  " iterations (relative residual " + std::to_string(rel) + ")",
                              rel);
        apply(g, with_mu, p, q);
        for (std::size_t k = 0; k < n; ++k)
            if (fixed[k]) q[k] = 0.0;
        double pq = 0.0;
        for (std::size_t k = 0; k < n; ++k) pq += p[k] * q[k];
        const double a = rs / pq;
        for (std::size_t k = 0; k < n; ++k) {
            z[k] += a * p[k];
            r[k] -= a * q[k];
        }
        // recompute the true residual now and then to stop drift
        if (++it % 500 == 0) {
            apply(g, with_mu, z, r);
            for (std::size_t k = 0; k < n; ++k) r[k] = fixed[k] ? 0.0 : -r[k];
        }
        for (std::size_t k = 0; k < n; ++k) s[k] = fixed[k] ? 0.0 : r[k] / d[k];
        double rs_new = 0.0;
        for (std::size_t k = 0; k < n; ++k) rs_new += r[k] * s[k];
        const double beta = rs_new / rs;
        rs = rs_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = s[k] + beta * p[k];
        rel = norm(r) / r0;
    }
    out.z = std::move(z);
    out.iterations = it;
    out.residual = rel;
    return out;
}

void check_problem(double alpha, double T, const Grid& grid, const VariationalOptions& opt) {
    grid.validate();
    check_T(T);
    if (!std::isfinite(alpha)) throw ParameterError("alpha must be finite");
    if (std::abs(grid.T - T) > 1e-12 * T) throw ParameterError("grid horizon differs from T");
    if (grid.nu % 2 != 0) throw ParameterError("nu must be even so that u = 0 is a node");
    if (grid.U < opt.u_width_factor * std::sqrt(T) * (1.0 - 1e-12))
        throw ParameterError("U must be at least u_width_factor * sqrt(T)");
}

std::vector<char> constraint_mask(const Grid& g, bool with_mu) {
    std::vector<char> fixed(g.nodes() + (with_mu ? static_cast<std::size_t>(g.nu) : 0), 0);
    const std::size_t stride = static_cast<std::size_t>(g.nu) + 1;
    for (int j = 0; j <= g.nu; ++j) fixed[static_cast<std::size_t>(j)] = 1;
    for (int i = 0; i <= g.nt; ++i) {
        fixed[static_cast<std::size_t>(i) * stride] = 1;
        fixed[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(g.nu)] = 1;
    }
    fixed[static_cast<std::size_t>(g.nt) * stride + static_cast<std::size_t>(g.nu / 2)] = 1;
    return fixed;
}

std::vector<double> constraint_residuals(const Field& K, double alpha) {
    const Grid& g = K.grid;
    double initial = 0.0, sides = 0.0;
    for (int j = 0; j <= g.nu; ++j) initial = std::max(initial, std::abs(K(0, j)));
    for (int i = 0; i <= g.nt; ++i) sides = std::max({sides, std::abs(K(i, 0)), std::abs(K(i, g.nu))});
    return {initial, sides, std::abs(K(g.nt, g.nu / 2) - alpha)};
}

}  // namespace

Grid Grid::with_width(double T, int nt, int nu, double u_width_factor) {
    check_T(T);
    Grid g{T, u_width_factor * std::sqrt(T), nt, nu};
    g.validate();
    return g;
}

void Grid::validate() const {
    if (!(T > 0.0)) throw ParameterError("grid T must be > 0");
    if (!(U > 0.0)) throw ParameterError("grid U must be > 0");
    if (nt < 4 || nu < 4) throw ParameterError("grid needs nt, nu >= 4");
}

double gaussian_rate(double alpha, double sigma2, double T) {
    check_T(T);
    if (!(sigma2 > 0.0)) throw ParameterError("variance must be > 0");
    return alpha * alpha / (2.0 * sigma2 * std::sqrt(T));
}

SigmaConstants sigma_constants(double rho) {
    check_rho(rho);
    const double c = std::sqrt(2.0 / std::numbers::pi);
    return {c * (1.0 - rho) / rho, c * rho * (1.0 - rho)};
}

double rate_J(double alpha, double rho, double T) { return gaussian_rate(alpha, sigma_constants(rho).sigma_J2, T); }

double rate_I(double alpha, double rho, double T) {
    check_rho(rho);
    return rate_J(rho * alpha, rho, T);
}

double eval_F(const Field& field) {
    field.grid.validate();
    if (field.K.size() != field.grid.nodes()) throw ParameterError("field size does not match its grid");
    return energy(field.grid, false, field.K);
}

double eval_F(const Field& field, const Grid& grid) {
    if (!same_grid(field.grid, grid)) throw ParameterError("field lives on a different grid");
    return eval_F(field);
}

double eval_G(const Field& field, const InitialProfile& mu0, double rho) {
    check_rho(rho);
    field.grid.validate();
    if (!same_grid(field.grid, mu0.grid)) throw ParameterError("field and profile grids differ");
    if (field.K.size() != field.grid.nodes() || mu0.mu0.size() != static_cast<std::size_t>(mu0.grid.nu))
        throw ParameterError("field size does not match its grid");
    return energy(field.grid, true, pack(field, &mu0));
}

double eval_G(const Field& field, const InitialProfile& mu0, const Grid& grid, double rho) {
    if (!same_grid(field.grid, grid)) throw ParameterError("field lives on a different grid");
    return eval_G(field, mu0, rho);
}

void gradient_F(const Field& field, std::vector<double>& gK) {
    gK.assign(field.K.size(), 0.0);
    apply(field.grid, false, field.K, gK);
}

void gradient_G(const Field& field, const InitialProfile& mu0, std::vector<double>& gK, std::vector<double>& gmu) {
    const auto z = pack(field, &mu0);
    std::vector<double> g(z.size());
    apply(field.grid, true, z, g);
    gK.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(field.K.size()));
    gmu.assign(g.begin() + static_cast<std::ptrdiff_t>(field.K.size()), g.end());
}

FMinimizer minimize_F(double alpha, double T, const Grid& grid, const VariationalOptions& options) {
    check_problem(alpha, T, grid, options);
    Field K(grid);
    K(grid.nt, grid.nu / 2) = alpha;
    auto qp = solve_constrained(grid, false, K.K, constraint_mask(grid, false), options);
    K.K = std::move(qp.z);

    FMinimizer out{RateReport{}, std::move(K)};
    auto& rep = out.report;
    rep.value = eval_F(out.K);
    rep.grid = grid;
    rep.closed_form = 0.5 * std::sqrt(std::numbers::pi) * alpha * alpha / std::sqrt(T);
    rep.iterations = qp.iterations;
    rep.residual_norm = qp.residual;
    rep.constraint_residuals = constraint_residuals(out.K, alpha);
    if (grid.nt >= 8 && grid.nu >= 8) {
        rep.el = euler_lagrange_residual(out.K, options.terminal_layer);
        rep.el_residual = rep.el.bulk;
    }
    return out;
}

GMinimizer minimize_G(double alpha, double T, double rho, const Grid& grid, const VariationalOptions& options) {
    check_rho(rho);
    check_problem(alpha, T, grid, options);
    Field K(grid);
    InitialProfile mu(grid);
    K(grid.nt, grid.nu / 2) = alpha;
    auto qp = solve_constrained(grid, true, pack(K, &mu), constraint_mask(grid, true), options);
    std::copy(qp.z.begin(), qp.z.begin() + static_cast<std::ptrdiff_t>(K.K.size()), K.K.begin());
    std::copy(qp.z.begin() + static_cast<std::ptrdiff_t>(K.K.size()), qp.z.end(), mu.mu0.begin());

    GMinimizer out{RateReport{}, std::move(K), std::move(mu)};
    auto& rep = out.report;
    rep.value = eval_G(out.K, out.mu0, rho);
    rep.grid = grid;
    rep.closed_form = rho * (1.0 - rho) * rate_J(alpha, rho, T);
    rep.iterations = qp.iterations;
    rep.residual_norm = qp.residual;
    rep.constraint_residuals = constraint_residuals(out.K, alpha);
    if (grid.nt >= 8 && grid.nu >= 8) {
        rep.el = euler_lagrange_residual(out.K, options.terminal_layer);
        rep.el_residual = rep.el.bulk;
    }
    return out;
}

ReflectedMinimizer construct_reflected_minimizer(const Field& K_half, const Grid& grid) {
    const Grid& h = K_half.grid;
    grid.validate();
    if (grid.nu != h.nu || std::abs(grid.U - h.U) > 1e-12 * grid.U || grid.nt != 2 * h.nt ||
        std::abs(grid.T - 2.0 * h.T) > 1e-12 * grid.T)
        throw ParameterError("reflected grid must match U and nu and double the half grid in time");
    const int m = h.nt;
    const double du = grid.du();
    ReflectedMinimizer out{Field(grid), InitialProfile(grid)};
    for (int i = 0; i <= grid.nt; ++i)
        for (int j = 0; j <= grid.nu; ++j)
            out.K(i, j) = i <= m ? K_half(m, j) - K_half(m - i, j) : K_half(m, j) + K_half(i - m, j);
    for (int f = 0; f < grid.nu; ++f)
        out.mu0.mu0[static_cast<std::size_t>(f)] = (K_half(m, f + 1) - K_half(m, f)) / du;
    return out;
}

std::vector<double> density_field(const Field& K, const InitialProfile& mu0) {
    const Grid& g = K.grid;
    if (!same_grid(g, mu0.grid)) throw ParameterError("field and profile grids differ");
    const double du = g.du();
    std::vector<double> mu(static_cast<std::size_t>(g.nt + 1) * static_cast<std::size_t>(g.nu));
    for (int i = 0; i <= g.nt; ++i)
        for (int f = 0; f < g.nu; ++f)
            mu[static_cast<std::size_t>(i) * g.nu + f] =
                mu0.mu0[static_cast<std::size_t>(f)] - (K(i, f + 1) - K(i, f)) / du;
    return mu;
}

EulerLagrangeResidual euler_lagrange_residual(const Field& K, double terminal_layer) {
    const Grid& g = K.grid;
    if (g.nt < 8 || g.nu < 8) throw ParameterError("Euler-Lagrange residual needs nt, nu >= 8");
    if (!(terminal_layer >= 0.0 && terminal_layer < 1.0)) throw ParameterError("terminal_layer must lie in [0,1)");
    const double dt = g.dt(), du = g.du();
    const double du4 = du * du * du * du, dt2 = dt * dt;
    const double t_bulk = (1.0 - terminal_layer) * g.T * (1.0 + 1e-12);
    EulerLagrangeResidual r;
    for (int i = 1; i < g.nt; ++i)
        for (int j = 2; j <= g.nu - 2; ++j) {
            const double d4 = (K(i, j - 2) - 4 * K(i, j - 1) + 6 * K(i, j) - 4 * K(i, j + 1) + K(i, j + 2)) / du4;
            const double dtt = (K(i + 1, j) - 2 * K(i, j) + K(i - 1, j)) / dt2;
            const double res = std::abs(0.25 * d4 - dtt);
            r.interior = std::max(r.interior, res);
            if (g.t(i) <= t_bulk) r.bulk = std::max(r.bulk, res);
        }
    const int n = g.nt, c = g.nu / 2;
    for (int j = 1; j < g.nu; ++j) {
        const double kt = (3 * K(n, j) - 4 * K(n - 1, j) + K(n - 2, j)) / (2 * dt);
        const double kuu = (K(n, j - 1) - 2 * K(n, j) + K(n, j + 1)) / (du * du);
        r.terminal_dt = std::max(r.terminal_dt, std::abs(kt));
        r.terminal_uu = std::max(r.terminal_uu, std::abs(kuu));
        if (std::abs(j - c) > 2) r.natural_bc = std::max(r.natural_bc, std::abs(kt - 0.5 * kuu));
    }
    return r;
}

void write_field_csv(std::ostream& out, const Field& field) {
    const Grid& g = field.grid;
    char buf[96];
    out << "t,u,K\n";
    for (int i = 0; i <= g.nt; ++i)
        for (int j = 0; j <= g.nu; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.t(i), g.u(j), field(i, j));
            out << buf;
        }
}

void write_profile_csv(std::ostream& out, const InitialProfile& mu0) {
    char buf[64];
    out << "u,mu0\n";
    for (int f = 0; f < mu0.grid.nu; ++f) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", mu0.grid.face(f), mu0.mu0[static_cast<std::size_t>(f)]);
        out << buf;
    }
}

}  // namespace ssep
