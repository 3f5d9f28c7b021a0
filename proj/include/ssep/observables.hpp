#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "ssep/lattice.hpp"

namespace ssep {

/// Moderate-deviation scaling regime: a_N = N^theta, macroscopic time T
/// (microscopic horizon T N^2), density rho.
struct ScalingParams {
    std::int64_t N = 1;
    double theta = 0.75;
    double T = 1.0;
    double rho = 0.5;

    /// Throws ParameterError unless N >= 1, theta in (1/2, 1), T > 0, rho in (0,1).
    void validate() const;
    double a_N() const;
    double horizon() const { return T * static_cast<double>(N) * static_cast<double>(N); }
    /// Speed N / a_N^2 of the moderate deviation principle.
    double speed() const { return static_cast<double>(N) / (a_N() * a_N()); }
};

/// eta_T(x) - eta_0(x) == J_{x-1,x}(T) - J_{x,x+1}(T) for every x in [0, W), where
/// currents_at_T holds J_{x,x+1} for x in [0, W) and J_{-1,0} is passed separately.
bool check_conservation_identity(const Configuration& initial, const Configuration& final,
                                 std::int64_t origin_current, std::span<const std::int64_t> currents_at_T);

/// Same check on record entry k (needs snapshots and a current window).
bool check_conservation_identity(const TrajectoryRecord& record, std::size_t k);

enum class PositionIdentity { Holds, Violated, ZeroCurrent };

/// Current/position identity at record entry k:
///   J > 0:  J ==  sum_{x=0}^{X-1} eta_t(x)
///   J < 0:  J == -sum_{x=X}^{-1}  eta_t(x)
/// J == 0 is reported as ZeroCurrent and not judged.
PositionIdentity check_position_current_identity(const TrajectoryRecord& record, std::size_t k);

/// Triangular test function G_n(u) = 1{u > 0} (1 - u/n)^+.
double g_n(double u, double n);

/// <mu^N, G> = (1/a_N) sum_x (eta(x) - rho) G(x/N), summed over x with x/N in
/// [support_lo, support_hi]. Throws DomainError-style ParameterError if that range
/// leaves the ring.
double empirical_pairing(const Configuration& snapshot, const std::function<double(double)>& G,
                         double support_lo, double support_hi, const ScalingParams& scaling);

/// Pairing against G_n; support (0, n).
double empirical_pairing_gn(const Configuration& snapshot, double n, const ScalingParams& scaling);

struct SummedCurrentDiagnostic {
    double value = 0.0;            ///< (1/(n N a_N)) sum_{x=0}^{nN-1} J_{x,x+1}
    double residual = 0.0;         ///< <mu_t,G_n> - <mu_0,G_n> + value - J_{0,1}/a_N  (exactly 0)
    double origin_defect = 0.0;    ///< (eta_t(0) - eta_0(0)) / a_N: gap to the J_{-1,0} form
    double scale = 0.0;            ///< largest magnitude among the summed terms, for relative tolerances
};

/// Summed-current quantity at record entry k, with the exact summation-by-parts
/// residual. Needs snapshots and a window W >= nN.
SummedCurrentDiagnostic summed_current_diagnostic(const TrajectoryRecord& record, std::int64_t n,
                                                  const ScalingParams& scaling, std::size_t k);

}  // namespace ssep
