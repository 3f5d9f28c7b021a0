#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssep/lattice.hpp"

namespace ssep {

enum class InitialLaw {
    BernoulliStar,  ///< nu_rho conditioned on a particle at the origin
    Bernoulli,      ///< plain nu_rho
    FixedCount,     ///< origin occupied plus particle_count-1 uniform others
};

/// Independent replicas observed at a common list of times. Replica r is seeded
/// with replica_seed(base_seed, r), so the outcome does not depend on scheduling.
struct EnsembleSpec {
    InitialLaw law = InitialLaw::BernoulliStar;
    double rho = 0.5;
    int L = 64;
    std::int64_t particle_count = 1;  ///< FixedCount only
    std::vector<double> times;        ///< sorted, > 0
    std::uint64_t base_seed = 0;
    std::int64_t replicas = 0;
    double ring_safety_factor = 10.0;

    void validate() const;
};

struct EnsembleSamples {
    std::vector<double> times;
    std::int64_t replicas = 0;
    std::vector<std::int64_t> X;  ///< replicas x times, row-major
    std::vector<std::int64_t> J;

    std::int64_t x(std::int64_t r, std::size_t k) const { return X[index(r, k)]; }
    std::int64_t j(std::int64_t r, std::size_t k) const { return J[index(r, k)]; }
    std::vector<double> x_column(std::size_t k) const;
    std::vector<double> j_column(std::size_t k) const;
    bool operator==(const EnsembleSamples&) const = default;

private:
    std::size_t index(std::int64_t r, std::size_t k) const {
        return static_cast<std::size_t>(r) * times.size() + k;
    }
};

/// Simulate replica r and write X and J at every spec time into the outputs.
void simulate_replica(const EnsembleSpec& spec, std::int64_t r, std::span<std::int64_t> X,
                      std::span<std::int64_t> J);

/// Reference implementation: replicas one after another.
EnsembleSamples simulate_ensemble_serial(const EnsembleSpec& spec);

/// OpenMP over replicas. Bit-identical to the serial path for any thread count.
/// threads <= 0 resolves through resolve_threads().
EnsembleSamples simulate_ensemble_parallel(const EnsembleSpec& spec, int threads = 0);

/// requested > 0 wins; otherwise SSEP_MDP_THREADS; otherwise the OpenMP default.
int resolve_threads(int requested);

/// Smallest half-width with 2L >= factor * sqrt(horizon), and at least `min_L`.
int ring_half_width_for(double horizon, double factor = 10.0, int min_L = 1);

}  // namespace ssep
