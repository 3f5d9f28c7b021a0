#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssep/errors.hpp"

namespace ssep {

/// One state of the finite chain: occupation pattern on the 2L-site ring
/// (bit s is site s - L), tagged site, unwrapped tagged displacement and J_{-1,0}.
struct AugmentedState {
    std::uint32_t pattern = 0;
    int tagged_site = 0;
    int displacement = 0;
    int current = 0;

    bool operator==(const AugmentedState&) const = default;
};

struct OracleOptions {
    int Jmax = 12;                      ///< current counter range [-Jmax, Jmax]
    int Dmax = 12;                      ///< displacement counter range [-Dmax, Dmax]
    std::size_t state_cap = 4'000'000;  ///< CapacityError above this many states
    double clip_tolerance = 1e-6;       ///< AccuracyError if more mass reaches the clip
    double truncation = 1e-12;          ///< Poisson tail left out of the uniformization sum
};

/// Sparse generator of the stirring chain restricted to k particles on 2L sites.
/// Every bond whose endpoints differ contributes one rate-1/2 transition. Moves
/// that would push |J| past Jmax or |D| past Dmax go to a single absorbing sink
/// state instead, so the sink's mass is the clipped mass.
class GeneratorMatrix {
public:
    int half_width() const noexcept { return L_; }
    int particle_count() const noexcept { return k_; }
    int Jmax() const noexcept { return Jmax_; }
    int Dmax() const noexcept { return Dmax_; }

    /// Number of states including the sink.
    std::size_t size() const noexcept { return offsets_.size() - 1; }
    std::size_t sink() const noexcept { return size() - 1; }
    std::size_t pattern_count() const noexcept { return patterns_.size(); }
    std::uint32_t pattern(std::size_t rank) const { return patterns_[rank]; }

    /// Targets of the rate-1/2 transitions out of state s (with multiplicity).
    std::span<const std::uint32_t> targets(std::size_t s) const {
        return {targets_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
    }
    double exit_rate(std::size_t s) const { return 0.5 * static_cast<double>(targets(s).size()); }
    /// Q(s, s2), including the diagonal.
    double entry(std::size_t s, std::size_t s2) const;
    double row_sum(std::size_t s) const;

    /// Largest exit rate any state can have (the uniformization constant).
    double uniformization_rate() const noexcept { return static_cast<double>(L_); }

    std::size_t index(const AugmentedState& state) const;
    AugmentedState state(std::size_t s) const;  ///< s must not be the sink
    std::size_t pattern_rank(std::uint32_t pattern) const;

private:
    friend GeneratorMatrix build_generator(int, int, int, const OracleOptions&);
    AugmentedState decode(std::size_t s) const;  // no range check; usable while building

    int L_ = 0, k_ = 0, Jmax_ = 0, Dmax_ = 0;
    std::vector<std::uint32_t> patterns_;
    std::vector<std::int32_t> rank_of_;  ///< -1 for patterns with another particle count
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> targets_;
};

/// Throws ParameterError unless 2 <= 2L <= 12, 1 <= k <= 2L-1, Jmax, Dmax >= 1;
/// CapacityError if the state space exceeds options.state_cap. options.Jmax is
/// overridden by the explicit argument.
GeneratorMatrix build_generator(int L, int particle_count, int Jmax, const OracleOptions& options = {});

/// Origin occupied and tagged, the other k-1 particles uniform, D = J = 0.
std::vector<double> conditioned_initial(const GeneratorMatrix& gen);

/// Uniform over all k-particle patterns, tagged particle uniform among the k, D = J = 0.
std::vector<double> uniform_initial(const GeneratorMatrix& gen);

struct OracleDistribution {
    double t = 0.0;
    std::vector<double> joint;   ///< indexed like the generator (sink last)
    std::vector<double> X;       ///< P(X(t) = d), d in [-Dmax, Dmax]
    std::vector<double> J;       ///< P(J(t) = j), j in [-Jmax, Jmax]
    double clipped_mass = 0.0;   ///< sink mass
    double total_mass = 0.0;
    std::size_t terms = 0;       ///< uniformization terms used
};

/// Law at time t by uniformization. Throws ParameterError for t < 0 or an initial
/// vector of the wrong size/mass, AccuracyError if the clipped mass exceeds
/// options.clip_tolerance.
OracleDistribution distribution_at(const GeneratorMatrix& gen, std::span<const double> initial, double t,
                                   const OracleOptions& options = {});

/// Occupation-pattern marginal (indexed by pattern rank) of a joint vector.
std::vector<double> pattern_marginal(const GeneratorMatrix& gen, std::span<const double> joint);

/// Marginals of X(t) and J(t) started from nu_rho conditioned on the origin,
/// mixing the fixed-count chains with binomial weights (the full lattice has X = J = 0).
struct MixedMarginals {
    std::vector<double> X, J;
    double clipped_mass = 0.0;
    int Dmax = 0, Jmax = 0;
};
MixedMarginals bernoulli_star_marginals(int L, double rho, double t, const OracleOptions& options = {});

/// Empirical law of integer samples on [-max, max], with one extra trailing bin
/// for samples beyond the range.
std::vector<double> clipped_histogram(std::span<const std::int64_t> samples, int max);

/// 0.5 * sum |p - q|; the shorter vector is padded with zeros.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace ssep
