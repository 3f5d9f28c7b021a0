#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <cstdint>
#include <limits>

namespace ssep {

// SplitMix64 finalizer. Used for seeding and for deriving replica streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of replica `r` under `base_seed`: mix64(mix64(base_seed) ^ mix64(~r)).
/// Replicas can therefore be generated in any order, on any thread.
constexpr std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t r) noexcept {
    return mix64(mix64(base_seed) ^ mix64(~r));
}

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator, so it
/// plugs into <random> distributions.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z += 0x9E3779B97F4A7C15ull;
            w = mix64(z);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool operator==(const Xoshiro256&) const = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4]{};
};

/// Unbiased integers in [0, n) for a fixed n < 2^32 (Lemire's multiply-shift with
/// rejection). Each 64-bit engine output yields two 32-bit draws.
class BoundedDraw {
public:
    explicit BoundedDraw(std::uint32_t n) noexcept
        : n_(n), threshold_(static_cast<std::uint32_t>(-n) % n) {}

    template <class Engine>
    std::uint32_t operator()(Engine& eng) noexcept {
        for (;;) {
            if (!have_) {
                buffer_ = eng();
                have_ = true;
            } else {
                buffer_ >>= 32;
                have_ = false;
            }
            const std::uint64_t m = static_cast<std::uint64_t>(static_cast<std::uint32_t>(buffer_)) * n_;
            if (static_cast<std::uint32_t>(m) >= threshold_) return static_cast<std::uint32_t>(m >> 32);
        }
    }

    std::uint32_t bound() const noexcept { return n_; }

private:
    std::uint32_t n_;
    std::uint32_t threshold_;
    std::uint64_t buffer_ = 0;
    bool have_ = false;
};

/// Stream of unbiased integers in [0, n), generated in blocks. Same method as
/// BoundedDraw; the rare rejected slot is redrawn on the spot, so the stream is a
/// deterministic function of the engine state.
class BondStream {
public:
    static constexpr std::size_t kBlock = 2048;

    explicit BondStream(std::uint32_t n) noexcept
        : n_(n), threshold_(static_cast<std::uint32_t>(-n) % n), redraw_(n) {}

    template <class Engine>
    std::uint32_t next(Engine& eng) noexcept {
        if (pos_ == kBlock) [[unlikely]] refill(eng);
        return buf_[pos_++];
    }

    /// Up to `max` consecutive values of the stream (at least one if max > 0).
    template <class Engine>
    std::span<const std::uint32_t> take(Engine& eng, std::size_t max) noexcept {
        if (pos_ == kBlock) refill(eng);
        const std::size_t k = std::min(max, kBlock - pos_);
        std::span<const std::uint32_t> out(buf_ + pos_, k);
        pos_ += k;
        return out;
    }

    std::uint32_t bound() const noexcept { return n_; }

private:
    template <class Engine>
    void refill(Engine& eng) noexcept {
        bool rejected = false;
        for (std::size_t k = 0; k < kBlock; k += 2) {
            const std::uint64_t r = eng();
            const std::uint64_t lo = (r & 0xFFFFFFFFull) * n_;
            const std::uint64_t hi = (r >> 32) * n_;
            buf_[k] = static_cast<std::uint32_t>(lo >> 32);
            buf_[k + 1] = static_cast<std::uint32_t>(hi >> 32);
            rejected |= (static_cast<std::uint32_t>(lo) < threshold_) | (static_cast<std::uint32_t>(hi) < threshold_);
            low_[k] = static_cast<std::uint32_t>(lo);
            low_[k + 1] = static_cast<std::uint32_t>(hi);
        }
        if (rejected) [[unlikely]]
            for (std::size_t k = 0; k < kBlock; ++k)
                if (low_[k] < threshold_) buf_[k] = redraw_(eng);
        pos_ = 0;
    }

    std::uint32_t n_;
    std::uint32_t threshold_;
    BoundedDraw redraw_;
    std::size_t pos_ = kBlock;
    std::uint32_t buf_[kBlock];
    std::uint32_t low_[kBlock];
};

}  // namespace ssep
