#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ssep/errors.hpp"

namespace ssep {

/// Rectangle [0,T] x [-U,U] with nt x nu cells; node (i,j) is (i dt, -U + j du).
struct Grid {
    double T = 1.0;
    double U = 6.0;
    int nt = 32;
    int nu = 64;

    /// U = factor * sqrt(T).
    static Grid with_width(double T, int nt, int nu, double u_width_factor = 6.0);

    double dt() const { return T / nt; }
    double du() const { return 2.0 * U / nu; }
    double t(int i) const { return i * dt(); }
    double u(int j) const { return -U + j * du(); }
    /// Midpoint of face j (between nodes j and j+1), j in [0, nu).
    double face(int j) const { return -U + (j + 0.5) * du(); }
    std::size_t nodes() const { return static_cast<std::size_t>(nt + 1) * static_cast<std::size_t>(nu + 1); }

    /// Throws ParameterError unless T, U > 0 and nt, nu >= 4.
    void validate() const;
    bool operator==(const Grid&) const = default;
};

/// Flux potential K on the grid nodes, time-major.
struct Field {
    Grid grid;
    std::vector<double> K;

    explicit Field(const Grid& g) : grid(g), K(g.nodes(), 0.0) {}
    double& operator()(int i, int j) { return K[static_cast<std::size_t>(i) * (grid.nu + 1) + j]; }
    double operator()(int i, int j) const { return K[static_cast<std::size_t>(i) * (grid.nu + 1) + j]; }
};

/// Initial density profile mu0 on the nu face midpoints u_{j+1/2}. The outer
/// faces sit strictly inside (-U, U); mu0(+-U) = 0 is implied.
struct InitialProfile {
    Grid grid;
    std::vector<double> mu0;

    explicit InitialProfile(const Grid& g) : grid(g), mu0(static_cast<std::size_t>(g.nu), 0.0) {}
};

struct VariationalOptions {
    double qp_tol = 1e-10;        ///< relative residual norm at which CG stops
    int max_iter = 100000;
    double u_width_factor = 6.0;  ///< require U >= factor * sqrt(T)
    double terminal_layer = 0.25; ///< bulk residual skips t > (1 - layer) T
};

struct EulerLagrangeResidual {
    double bulk = 0.0;          ///< max |D4K/4 - DttK| over interior nodes with t <= (1-layer) T
    double interior = 0.0;      ///< same over every interior node
    double terminal_dt = 0.0;   ///< max |dK/dt(T, u)| over interior u
    double terminal_uu = 0.0;   ///< max |d2K/du2(T, u)| over interior u
    double natural_bc = 0.0;    ///< max |dK/dt - 0.5 d2K/du2| at t = T, away from u = 0
};

struct RateReport {
    double value = 0.0;        ///< minimized functional
    Grid grid;
    double el_residual = 0.0;  ///< bulk Euler-Lagrange residual
    EulerLagrangeResidual el;
    /// |K(0,.)|max, |K(.,+-U)|max, |K(T,0) - alpha|
    std::vector<double> constraint_residuals;
    double closed_form = 0.0;  ///< limit value the discretization should approach
    int iterations = 0;
    double residual_norm = 0.0;  ///< final relative CG residual
};

// Closed forms.
double rate_J(double alpha, double rho, double T);
double rate_I(double alpha, double rho, double T);
struct SigmaConstants {
    double sigma_X2 = 0.0;
    double sigma_J2 = 0.0;
};
SigmaConstants sigma_constants(double rho);
/// alpha^2 / (2 sigma2 sqrt(T)): the Gaussian rate for a CLT variance sigma2 t^{1/2}.
double gaussian_rate(double alpha, double sigma2, double T);

/// F(K) = int int 1/2 K_t^2 + 1/8 K_uu^2 + 1/4 int K_u(T)^2, discretized.
double eval_F(const Field& field);
double eval_F(const Field& field, const Grid& grid);  ///< throws ParameterError on mismatch

/// rho(1-rho) Q: F plus the mu0 terms. The quadratic form does not depend on rho;
/// rho is validated only.
double eval_G(const Field& field, const InitialProfile& mu0, double rho);
double eval_G(const Field& field, const InitialProfile& mu0, const Grid& grid, double rho);

/// Gradients of eval_F / eval_G with respect to every nodal K and every mu0 face.
void gradient_F(const Field& field, std::vector<double>& gK);
void gradient_G(const Field& field, const InitialProfile& mu0, std::vector<double>& gK, std::vector<double>& gmu);

struct FMinimizer {
    RateReport report;
    Field K;
};
struct GMinimizer {
    RateReport report;
    Field K;
    InitialProfile mu0;
};

/// Minimize F under K(0,.) = 0, K(., +-U) = 0, K(T,0) = alpha (nu must be even).
/// Throws SolverError if CG does not converge within options.max_iter.
FMinimizer minimize_F(double alpha, double T, const Grid& grid, const VariationalOptions& options = {});

/// Joint minimization of G over (K, mu0) under the same constraints.
GMinimizer minimize_G(double alpha, double T, double rho, const Grid& grid, const VariationalOptions& options = {});

struct ReflectedMinimizer {
    Field K;
    InitialProfile mu0;
};

/// Reflected construction from the half-problem minimizer K_half at (alpha/2, T/2):
///   K~(t) = K_h(T/2) - K_h(T/2 - t)  for t <= T/2,   K_h(T/2) + K_h(t - T/2) after,
///   mu~0  = dK_h/du(T/2).
/// `grid` must have the same U, nu, dt and twice the cells in time.
ReflectedMinimizer construct_reflected_minimizer(const Field& K_half, const Grid& grid);

/// Density deviation mu(t_i, face j) = mu0(j) - dK/du(t_i, face j), time-major.
std::vector<double> density_field(const Field& K, const InitialProfile& mu0);

/// Throws ParameterError if nt or nu < 8.
EulerLagrangeResidual euler_lagrange_residual(const Field& field, double terminal_layer = 0.25);

/// CSV dumps: "t,u,K" per node and "u,mu0" per face.
void write_field_csv(std::ostream& out, const Field& field);
void write_profile_csv(std::ostream& out, const InitialProfile& mu0);

}  // namespace ssep
