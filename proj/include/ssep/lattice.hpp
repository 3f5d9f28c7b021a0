#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "ssep/errors.hpp"
#include "ssep/rng.hpp"

namespace ssep {

/// Occupation state of the ring {-L, ..., L-1} (site arithmetic mod 2L), bit-packed,
/// with the position of the tagged particle. Site x is stored at bit x + L.
class Configuration {
public:
    /// Throws ParameterError if L < 1, the lattice is empty, or the tagged site is vacant.
    Configuration(int half_width, std::vector<std::uint64_t> words, std::int64_t tagged_site);

    static Configuration from_sites(int half_width, std::span<const std::int64_t> occupied,
                                    std::int64_t tagged_site);
    static Configuration full(int half_width);

    int half_width() const noexcept { return half_width_; }
    int ring_size() const noexcept { return 2 * half_width_; }
    std::int64_t tagged_site() const noexcept { return tagged_site_; }
    std::int64_t particle_count() const noexcept { return particle_count_; }

    /// Occupation of site x; x is reduced onto the ring first.
    bool occupied(std::int64_t x) const noexcept;

    /// Reduce an integer site onto {-L, ..., L-1}.
    std::int64_t wrap(std::int64_t x) const noexcept;

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool operator==(const Configuration&) const = default;

private:
    int half_width_;
    std::vector<std::uint64_t> words_;
    std::int64_t tagged_site_;
    std::int64_t particle_count_;
};

struct SimParams {
    double rho = 0.5;
    int L = 64;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> record_grid;
    double ring_safety_factor = 10.0;  ///< require 2L >= factor * sqrt(horizon); 0 disables
    int current_window = 0;            ///< track J_{x,x+1} for x in [0, W)
    bool snapshots = false;            ///< keep the configuration at every record time

    /// Throws ParameterError describing the first violated constraint.
    void validate() const;
};

/// Observations of one replica. Entry 0 is always t = 0.
struct TrajectoryRecord {
    int half_width = 0;
    std::vector<double> times;
    std::vector<std::int64_t> X;         ///< unwrapped tagged displacement
    std::vector<std::int64_t> J_origin;  ///< J_{-1,0}
    int window = 0;
    std::vector<std::int64_t> window_currents;  ///< times.size() x window, row-major
    std::vector<Configuration> snapshots;       ///< empty, or one per time

    std::span<const std::int64_t> currents_at(std::size_t k) const {
        return {window_currents.data() + k * static_cast<std::size_t>(window),
                static_cast<std::size_t>(window)};
    }
    bool operator==(const TrajectoryRecord&) const = default;
};

/// Mutable simulation state: occupations plus the tracked counters. Sites are
/// held unpacked (one byte each) while simulating; config() packs them.
class StirringState {
public:
    explicit StirringState(const Configuration& config, int current_window = 0);

    Configuration config() const;
    int half_width() const noexcept { return half_width_; }
    std::int64_t tagged_site() const noexcept { return static_cast<std::int64_t>(tagged_) - half_width_; }
    std::int64_t displacement() const noexcept { return displacement_; }
    std::int64_t origin_current() const noexcept { return origin_current_; }
    std::span<const std::int64_t> window_currents() const noexcept { return window_; }

    /// Swap the contents of sites x and x+1 (bond x, any integer, wrapped onto the ring).
    void apply_swap(std::int64_t bond);

    /// Apply one swap per entry; each entry is the storage index b = x + L of the
    /// bond's left site, in [0, 2L).
    void apply_bonds(std::span<const std::uint32_t> bonds) {
        if (window_.empty())
            apply_bonds_impl<false>(bonds);
        else
            apply_bonds_impl<true>(bonds);
    }

    /// Apply `events` swaps on uniformly chosen bonds.
    void advance(std::uint64_t events, BondStream& stream, Xoshiro256& rng) {
        while (events > 0) {
            const auto chunk = stream.take(rng, static_cast<std::size_t>(std::min<std::uint64_t>(events, BondStream::kBlock)));
            apply_bonds(chunk);
            events -= chunk.size();
        }
    }

private:
    template <bool TrackWindow>
    void apply_bonds_impl(std::span<const std::uint32_t> bonds);

    int half_width_;
    std::vector<std::uint8_t> sites_;
    std::uint32_t tagged_;
    std::int64_t displacement_ = 0;
    std::int64_t origin_current_ = 0;
    std::vector<std::int64_t> window_;
};

/// nu_rho conditioned on a particle at the origin; tagged particle at 0.
Configuration init_bernoulli_star(double rho, int L, Xoshiro256& rng);

/// Unconditioned nu_rho (resampled if empty). The tagged particle is the first
/// particle at or to the right of the origin.
Configuration init_bernoulli(double rho, int L, Xoshiro256& rng);

/// Exactly k particles: one at the origin (tagged), k-1 uniformly among the rest.
Configuration init_fixed_count(std::int64_t k, int L, Xoshiro256& rng);

/// Simulate the stirring dynamics from `config` and observe at t = 0 and every
/// record-grid time. Every bond swaps at rate 1/2.
TrajectoryRecord run_stirring(const Configuration& config, const SimParams& params);

/// Same, drawing events from a caller-owned engine (the ensemble kernel uses this).
TrajectoryRecord run_stirring(const Configuration& config, const SimParams& params, Xoshiro256& rng);

/// Unwrap a path of ring sites visited by nearest-neighbour steps into a cumulative
/// signed displacement from the first entry. Never reduced modulo 2L.
std::vector<std::int64_t> unwrap_displacement(std::span<const std::int64_t> sites, int L);

/// Displacement series of a record (already unwrapped during simulation).
std::vector<std::int64_t> unwrap_displacement(const TrajectoryRecord& record);

// ---------------------------------------------------------------------------

template <bool TrackWindow>
void StirringState::apply_bonds_impl(std::span<const std::uint32_t> bonds) {
    const std::uint32_t L = static_cast<std::uint32_t>(half_width_);
    const std::uint32_t n = 2 * L;
    const std::uint32_t origin_bond = L - 1;
    const std::uint32_t W = static_cast<std::uint32_t>(window_.size());
    std::uint8_t* occ = sites_.data();
    std::uint32_t tagged = tagged_;
    std::int64_t X = displacement_;
    std::int64_t J = origin_current_;

    for (const std::uint32_t b : bonds) {
        const std::uint32_t b2 = (b + 1 == n) ? 0u : b + 1;
        const std::uint8_t left = occ[b];
        const std::uint8_t right = occ[b2];
        occ[b] = right;
        occ[b2] = left;

        bool watched = (b == tagged) | (b2 == tagged) | (b == origin_bond);
        if constexpr (TrackWindow) watched |= (b - L) < W;
        if (watched && (left != right)) [[unlikely]] {
            const std::int64_t flow = left ? 1 : -1;  // +1: particle moved x -> x+1
            if (b == tagged) {
                tagged = b2;
                ++X;
            } else if (b2 == tagged) {
                tagged = b;
                --X;
            }
            if (b == origin_bond) J += flow;
            if constexpr (TrackWindow) {
                if (b - L < W) window_[b - L] += flow;
            }
        }
    }
    tagged_ = tagged;
    displacement_ = X;
    origin_current_ = J;
}

}  // namespace ssep
