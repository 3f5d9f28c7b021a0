#include "ssep/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace ssep {

namespace {

std::size_t word_count(int L) { return (static_cast<std::size_t>(2 * L) + 63) / 64; }

void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw ParameterError("rho must lie in (0,1), got " + std::to_string(rho));
}

void check_half_width(int L) {
    if (L < 1) throw ParameterError("L must be >= 1, got " + std::to_string(L));
}

void set_bit(std::vector<std::uint64_t>& words, std::int64_t s) {
    words[static_cast<std::size_t>(s) >> 6] |= std::uint64_t{1} << (s & 63);
}

}  // namespace

Configuration::Configuration(int half_width, std::vector<std::uint64_t> words, std::int64_t tagged_site)
    : half_width_(half_width), words_(std::move(words)), tagged_site_(tagged_site) {
    check_half_width(half_width_);
    if (words_.size() != word_count(half_width_))
        throw ParameterError("occupancy has " + std::to_string(words_.size()) + " words, expected " +
                             std::to_string(word_count(half_width_)));
    const std::int64_t n = ring_size();
    if (n % 64 != 0 && (words_.back() >> (n % 64)) != 0)
        throw ParameterError("occupancy has bits set beyond the ring");
    if (tagged_site_ < -half_width_ || tagged_site_ >= half_width_)
        throw ParameterError("tagged site " + std::to_string(tagged_site_) + " outside the ring");
    particle_count_ = 0;
    for (auto w : words_) particle_count_ += std::popcount(w);
    if (particle_count_ == 0) throw ParameterError("empty lattice has no tagged particle");
    if (!occupied(tagged_site_)) throw ParameterError("tagged site is vacant");
}

Configuration Configuration::from_sites(int half_width, std::span<const std::int64_t> occupied,
                                        std::int64_t tagged_site) {
    check_half_width(half_width);
    std::vector<std::uint64_t> words(word_count(half_width), 0);
    const std::int64_t n = 2 * static_cast<std::int64_t>(half_width);
    for (auto x : occupied) {
        const std::int64_t s = ((x + half_width) % n + n) % n;
        set_bit(words, s);
    }
    return Configuration(half_width, std::move(words), tagged_site);
}

Configuration Configuration::full(int half_width) {
    check_half_width(half_width);
    std::vector<std::uint64_t> words(word_count(half_width), ~std::uint64_t{0});
    const int rem = (2 * half_width) % 64;
    if (rem != 0) words.back() = (std::uint64_t{1} << rem) - 1;
    return Configuration(half_width, std::move(words), 0);
}

std::int64_t Configuration::wrap(std::int64_t x) const noexcept {
    const std::int64_t n = ring_size();
    return ((x + half_width_) % n + n) % n - half_width_;
}

bool Configuration::occupied(std::int64_t x) const noexcept {
    const std::int64_t s = wrap(x) + half_width_;
    return (words_[static_cast<std::size_t>(s) >> 6] >> (s & 63)) & 1u;
}

void SimParams::validate() const {
    check_rho(rho);
    check_half_width(L);
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be a finite value >= 0");
    if (!std::is_sorted(record_grid.begin(), record_grid.end()))
        throw ParameterError("record_grid must be sorted");
    for (double t : record_grid)
        if (!(t >= 0.0 && t <= horizon))
            throw ParameterError("record_grid entry " + std::to_string(t) + " outside [0, horizon]");
    if (ring_safety_factor < 0.0) throw ParameterError("ring_safety_factor must be >= 0");
    if (2.0 * L < ring_safety_factor * std::sqrt(horizon))
        throw ParameterError("ring too small: 2L = " + std::to_string(2 * L) + " < " +
                             std::to_string(ring_safety_factor) + " * sqrt(horizon)");
    if (current_window < 0 || current_window > L - 1)
        throw ParameterError("current_window must lie in [0, L-1]");
}

StirringState::StirringState(const Configuration& config, int current_window)
    : half_width_(config.half_width()),
      sites_(static_cast<std::size_t>(config.ring_size())),
      tagged_(static_cast<std::uint32_t>(config.tagged_site() + config.half_width())),
      window_(static_cast<std::size_t>(std::max(current_window, 0)), 0) {
    if (current_window > half_width_ - 1) throw ParameterError("current_window must lie in [0, L-1]");
    const auto words = config.words();
    for (std::size_t s = 0; s < sites_.size(); ++s) sites_[s] = (words[s >> 6] >> (s & 63)) & 1u;
}

Configuration StirringState::config() const {
    std::vector<std::uint64_t> words(word_count(half_width_), 0);
    for (std::size_t s = 0; s < sites_.size(); ++s)
        words[s >> 6] |= static_cast<std::uint64_t>(sites_[s]) << (s & 63);
    return Configuration(half_width_, std::move(words), tagged_site());
}

void StirringState::apply_swap(std::int64_t bond) {
    const std::int64_t n = 2 * static_cast<std::int64_t>(half_width_);
    const auto idx = static_cast<std::uint32_t>(((bond + half_width_) % n + n) % n);
    apply_bonds(std::span(&idx, 1));
}

Configuration init_bernoulli_star(double rho, int L, Xoshiro256& rng) {
    check_rho(rho);
    check_half_width(L);
    std::vector<std::uint64_t> words(word_count(L), 0);
    for (std::int64_t s = 0; s < 2 * L; ++s)
        if (s == L || rng.uniform() < rho) set_bit(words, s);
    return Configuration(L, std::move(words), 0);
}

Configuration init_bernoulli(double rho, int L, Xoshiro256& rng) {
    check_rho(rho);
    check_half_width(L);
    for (;;) {
        std::vector<std::uint64_t> words(word_count(L), 0);
        bool any = false;
        for (std::int64_t s = 0; s < 2 * L; ++s)
            if (rng.uniform() < rho) {
                set_bit(words, s);
                any = true;
            }
        if (!any) continue;
        for (std::int64_t s = L;; s = (s + 1) % (2 * L))
            if ((words[static_cast<std::size_t>(s) >> 6] >> (s & 63)) & 1u)
                return Configuration(L, std::move(words), s - L);
    }
}

Configuration init_fixed_count(std::int64_t k, int L, Xoshiro256& rng) {
    check_half_width(L);
    if (k < 1 || k > 2 * static_cast<std::int64_t>(L))
        throw ParameterError("particle count must lie in [1, 2L], got " + std::to_string(k));
    // Partial Fisher-Yates over the 2L-1 sites other than the origin.
    std::vector<std::int64_t> others;
    others.reserve(static_cast<std::size_t>(2 * L - 1));
    for (std::int64_t x = -L; x < L; ++x)
        if (x != 0) others.push_back(x);
    for (std::int64_t i = 0; i < k - 1; ++i) {
        const std::int64_t span = static_cast<std::int64_t>(others.size()) - i;
        const auto j = i + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(span));
        std::swap(others[static_cast<std::size_t>(i)], others[static_cast<std::size_t>(std::min(j, i + span - 1))]);
    }
    others.resize(static_cast<std::size_t>(k - 1));
    others.push_back(0);
    return Configuration::from_sites(L, others, 0);
}

TrajectoryRecord run_stirring(const Configuration& config, const SimParams& params) {
    Xoshiro256 rng(params.seed);
    return run_stirring(config, params, rng);
}

TrajectoryRecord run_stirring(const Configuration& config, const SimParams& params, Xoshiro256& rng) {
    params.validate();
    if (config.half_width() != params.L)
        throw ParameterError("configuration and parameters disagree on L");

    TrajectoryRecord rec;
    rec.half_width = params.L;
    rec.window = params.current_window;
    rec.times.reserve(params.record_grid.size() + 1);
    rec.times.push_back(0.0);
    for (double t : params.record_grid)
        if (t > 0.0) rec.times.push_back(t);

    StirringState state(config, params.current_window);
    BondStream bonds(static_cast<std::uint32_t>(2 * params.L));
    const double total_rate = static_cast<double>(params.L);  // 2L bonds at rate 1/2

    double now = 0.0;
    for (double t : rec.times) {
        if (t > now) {
            std::poisson_distribution<std::int64_t> events(total_rate * (t - now));
            state.advance(static_cast<std::uint64_t>(events(rng)), bonds, rng);
            now = t;
        }
        rec.X.push_back(state.displacement());
        rec.J_origin.push_back(state.origin_current());
        auto w = state.window_currents();
        rec.window_currents.insert(rec.window_currents.end(), w.begin(), w.end());
        if (params.snapshots) rec.snapshots.push_back(state.config());
    }
    return rec;
}

std::vector<std::int64_t> unwrap_displacement(std::span<const std::int64_t> sites, int L) {
    check_half_width(L);
    const std::int64_t n = 2 * static_cast<std::int64_t>(L);
    std::vector<std::int64_t> out;
    out.reserve(sites.size());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (i > 0) {
            std::int64_t step = ((sites[i] - sites[i - 1]) % n + n) % n;  // in [0, n)
            if (step > n / 2) step -= n;
            if (step < -1 || step > 1)
                throw ParameterError("consecutive sites are not nearest neighbours");
            total += step;
        }
        out.push_back(total);
    }
    return out;
}

std::vector<std::int64_t> unwrap_displacement(const TrajectoryRecord& record) { return record.X; }

}  // namespace ssep
