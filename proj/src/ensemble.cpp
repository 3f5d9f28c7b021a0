#include "ssep/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssep {

void EnsembleSpec::validate() const {
    if (replicas < 0) throw ParameterError("replicas must be >= 0");
    if (times.empty()) throw ParameterError("ensemble needs at least one observation time");
    if (!std::is_sorted(times.begin(), times.end()) || times.front() <= 0.0)
        throw ParameterError("ensemble times must be sorted and positive");
    SimParams p;
    p.rho = rho;
    p.L = L;
    p.horizon = times.back();
    p.ring_safety_factor = ring_safety_factor;
    p.validate();
    if (law == InitialLaw::FixedCount && (particle_count < 1 || particle_count > 2 * static_cast<std::int64_t>(L)))
        throw ParameterError("particle_count must lie in [1, 2L]");
}

std::vector<double> EnsembleSamples::x_column(std::size_t k) const {
    std::vector<double> out(static_cast<std::size_t>(replicas));
    for (std::int64_t r = 0; r < replicas; ++r) out[static_cast<std::size_t>(r)] = static_cast<double>(x(r, k));
    return out;
}

std::vector<double> EnsembleSamples::j_column(std::size_t k) const {
    std::vector<double> out(static_cast<std::size_t>(replicas));
    for (std::int64_t r = 0; r < replicas; ++r) out[static_cast<std::size_t>(r)] = static_cast<double>(j(r, k));
    return out;
}

void simulate_replica(const EnsembleSpec& spec, std::int64_t r, std::span<std::int64_t> X,
                      std::span<std::int64_t> J) {
    Xoshiro256 rng(replica_seed(spec.base_seed, static_cast<std::uint64_t>(r)));
    Configuration init = [&] {
        switch (spec.law) {
            case InitialLaw::Bernoulli: return init_bernoulli(spec.rho, spec.L, rng);
            case InitialLaw::FixedCount: return init_fixed_count(spec.particle_count, spec.L, rng);
            case InitialLaw::BernoulliStar: break;
        }
        return init_bernoulli_star(spec.rho, spec.L, rng);
    }();

    StirringState state(init);
    BondStream bonds(static_cast<std::uint32_t>(2 * spec.L));
    const double total_rate = static_cast<double>(spec.L);
    double now = 0.0;
    for (std::size_t k = 0; k < spec.times.size(); ++k) {
        const double t = spec.times[k];
        if (t > now) {
            std::poisson_distribution<std::int64_t> events(total_rate * (t - now));
            state.advance(static_cast<std::uint64_t>(events(rng)), bonds, rng);
            now = t;
        }
        X[k] = state.displacement();
        J[k] = state.origin_current();
    }
}

namespace {

EnsembleSamples allocate(const EnsembleSpec& spec) {
    spec.validate();
    EnsembleSamples out;
    out.times = spec.times;
    out.replicas = spec.replicas;
    const std::size_t n = static_cast<std::size_t>(spec.replicas) * spec.times.size();
    out.X.assign(n, 0);
    out.J.assign(n, 0);
    return out;
}

}  // namespace

EnsembleSamples simulate_ensemble_serial(const EnsembleSpec& spec) {
    EnsembleSamples out = allocate(spec);
    const std::size_t m = spec.times.size();
    for (std::int64_t r = 0; r < spec.replicas; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * m;
        simulate_replica(spec, r, std::span(out.X).subspan(off, m), std::span(out.J).subspan(off, m));
    }
    return out;
}

EnsembleSamples simulate_ensemble_parallel(const EnsembleSpec& spec, int threads) {
    EnsembleSamples out = allocate(spec);
    const std::size_t m = spec.times.size();
    const int nthreads = resolve_threads(threads);
    std::int64_t* xs = out.X.data();
    std::int64_t* js = out.J.data();
    (void)nthreads;
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
    for (std::int64_t r = 0; r < spec.replicas; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * m;
        simulate_replica(spec, r, std::span(xs + off, m), std::span(js + off, m));
    }
    return out;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SSEP_MDP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int ring_half_width_for(double horizon, double factor, int min_L) {
    const int L = static_cast<int>(std::ceil(0.5 * factor * std::sqrt(std::max(horizon, 0.0))));
    return std::max({L, min_L, 1});
}

}  // namespace ssep
