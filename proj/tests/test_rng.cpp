#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "ssep/rng.hpp"

using namespace ssep;

namespace {

// Straight transcription of the published xoshiro256++ next().
struct ReferenceXoshiro {
    std::uint64_t s[4];
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

}  // namespace

TEST_CASE("splitmix64 finalizer matches the published first output for state 0") {
    CHECK(mix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("xoshiro256++ agrees with the reference recurrence") {
    Xoshiro256 eng(42);
    ReferenceXoshiro ref{};
    std::uint64_t z = 42;
    for (auto& w : ref.s) {
        z += 0x9E3779B97F4A7C15ull;
        w = mix64(z);
    }
    for (int i = 0; i < 1000; ++i) REQUIRE(eng() == ref.next());
}

TEST_CASE("replica seeds are distinct and order independent") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(replica_seed(7, r));
    CHECK(seen.size() == 10000);
    CHECK(replica_seed(7, 3) == replica_seed(7, 3));
    CHECK(replica_seed(7, 3) != replica_seed(8, 3));
}

TEST_CASE("uniform() lies in [0,1) with mean 1/2") {
    Xoshiro256 eng(1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = eng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // sd of the mean is sqrt(1/12/n)
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("bounded draws are uniform (chi-square) for several bounds") {
    for (std::uint32_t n : {2u, 3u, 7u, 500u, 1000u}) {
        Xoshiro256 eng(n);
        BondStream stream(n);
        BoundedDraw draw(n);
        std::vector<double> a(n, 0.0), b(n, 0.0);
        const int draws = 400 * static_cast<int>(n);
        for (int i = 0; i < draws; ++i) {
            const auto x = stream.next(eng);
            const auto y = draw(eng);
            REQUIRE(x < n);
            REQUIRE(y < n);
            a[x] += 1;
            b[y] += 1;
        }
        const double e = static_cast<double>(draws) / n;
        double ca = 0, cb = 0;
        for (std::uint32_t k = 0; k < n; ++k) {
            ca += (a[k] - e) * (a[k] - e) / e;
            cb += (b[k] - e) * (b[k] - e) / e;
        }
        // df = n-1; mean df, sd sqrt(2 df); allow 5 sd
        const double df = n - 1.0;
        CHECK(ca < df + 5.0 * std::sqrt(2.0 * df) + 10.0);
        CHECK(cb < df + 5.0 * std::sqrt(2.0 * df) + 10.0);
    }
}

TEST_CASE("bond stream chunks concatenate to the same stream as next()") {
    Xoshiro256 e1(5), e2(5);
    BondStream s1(37), s2(37);
    std::vector<std::uint32_t> a, b;
    for (int i = 0; i < 10000; ++i) a.push_back(s1.next(e1));
    std::size_t want = 10000;
    std::size_t chunk = 1;
    while (b.size() < want) {
        const auto part = s2.take(e2, std::min(chunk, want - b.size()));
        b.insert(b.end(), part.begin(), part.end());
        chunk = chunk * 3 % 1999 + 1;
    }
    CHECK(a == b);
}
