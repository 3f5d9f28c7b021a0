#include "ssep/exact_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace ssep {

namespace {

int tag_position(std::uint32_t pattern, int site_bit) {
    return std::popcount(pattern & ((1u << site_bit) - 1u));
}

int tag_bit(std::uint32_t pattern, int position) {
    for (int b = 0;; ++b) {
        if (pattern >> b & 1u) {
            if (position == 0) return b;
            --position;
        }
    }
}

double binomial_pmf(int n, int k, double p) {
    const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace

std::size_t GeneratorMatrix::pattern_rank(std::uint32_t pattern) const {
    if (pattern >= rank_of_.size() || rank_of_[pattern] < 0)
        throw ParameterError("pattern with the wrong particle count");
    return static_cast<std::size_t>(rank_of_[pattern]);
}

std::size_t GeneratorMatrix::index(const AugmentedState& st) const {
    const std::size_t rank = pattern_rank(st.pattern);
    const int bit = st.tagged_site + L_;
    if (bit < 0 || bit >= 2 * L_ || !(st.pattern >> bit & 1u)) throw ParameterError("tagged site vacant");
    if (std::abs(st.displacement) > Dmax_ || std::abs(st.current) > Jmax_)
        throw ParameterError("counter outside the clipped range");
    const std::size_t nD = 2 * static_cast<std::size_t>(Dmax_) + 1;
    const std::size_t nJ = 2 * static_cast<std::size_t>(Jmax_) + 1;
    const std::size_t pos = static_cast<std::size_t>(tag_position(st.pattern, bit));
    return ((rank * static_cast<std::size_t>(k_) + pos) * nD + static_cast<std::size_t>(st.displacement + Dmax_)) * nJ +
           static_cast<std::size_t>(st.current + Jmax_);
}

AugmentedState GeneratorMatrix::state(std::size_t s) const {
    if (s >= sink()) throw ParameterError("state index out of range");
    return decode(s);
}

AugmentedState GeneratorMatrix::decode(std::size_t s) const {
    const std::size_t nD = 2 * static_cast<std::size_t>(Dmax_) + 1;
    const std::size_t nJ = 2 * static_cast<std::size_t>(Jmax_) + 1;
    AugmentedState st;
    st.current = static_cast<int>(s % nJ) - Jmax_;
    s /= nJ;
    st.displacement = static_cast<int>(s % nD) - Dmax_;
    s /= nD;
    const int pos = static_cast<int>(s % static_cast<std::size_t>(k_));
    st.pattern = patterns_[s / static_cast<std::size_t>(k_)];
    st.tagged_site = tag_bit(st.pattern, pos) - L_;
    return st;
}

double GeneratorMatrix::entry(std::size_t s, std::size_t s2) const {
    double q = s == s2 ? -exit_rate(s) : 0.0;
    for (const auto t : targets(s))
        if (t == s2) q += 0.5;
    return q;
}

double GeneratorMatrix::row_sum(std::size_t s) const {
    double sum = -exit_rate(s);
    for (std::size_t i = 0; i < targets(s).size(); ++i) sum += 0.5;
    return sum;
}

GeneratorMatrix build_generator(int L, int particle_count, int Jmax, const OracleOptions& options) {
    if (L < 1 || 2 * L > 12) throw ParameterError("exact oracle needs 2 <= 2L <= 12");
    if (particle_count < 1 || particle_count > 2 * L - 1)
        throw ParameterError("particle_count must lie in [1, 2L-1]");
    if (Jmax < 1) throw ParameterError("Jmax must be >= 1");
    if (options.Dmax < 1) throw ParameterError("Dmax must be >= 1");

    GeneratorMatrix g;
    g.L_ = L;
    g.k_ = particle_count;
    g.Jmax_ = Jmax;
    g.Dmax_ = options.Dmax;
    const int n = 2 * L;
    g.rank_of_.assign(std::size_t{1} << n, -1);
    for (std::uint32_t p = 0; p < (1u << n); ++p)
        if (std::popcount(p) == particle_count) {
            g.rank_of_[p] = static_cast<std::int32_t>(g.patterns_.size());
            g.patterns_.push_back(p);
        }
    const std::size_t nD = 2 * static_cast<std::size_t>(g.Dmax_) + 1;
    const std::size_t nJ = 2 * static_cast<std::size_t>(Jmax) + 1;
    const std::size_t states = g.patterns_.size() * static_cast<std::size_t>(particle_count) * nD * nJ + 1;
    if (states > options.state_cap)
        throw CapacityError("exact state space has " + std::to_string(states) + " states, cap is " +
                            std::to_string(options.state_cap));

    const auto sink = static_cast<std::uint32_t>(states - 1);
    const int origin_bond = L - 1;  // bond b joins bits b and b+1 mod 2L
    g.offsets_.reserve(states + 1);
    g.targets_.reserve((states - 1) * static_cast<std::size_t>(n) / 2);
    g.offsets_.push_back(0);
    for (std::size_t s = 0; s + 1 < states; ++s) {
        const AugmentedState st = g.decode(s);
        const int tag = st.tagged_site + L;
        for (int b = 0; b < n; ++b) {
            const int b2 = (b + 1) % n;
            const bool left = st.pattern >> b & 1u;
            const bool right = st.pattern >> b2 & 1u;
            if (left == right) continue;
            AugmentedState next = st;
            next.pattern = st.pattern ^ (1u << b) ^ (1u << b2);
            int tag_next = tag;
            if (b == tag) {
                tag_next = b2;
                ++next.displacement;
            } else if (b2 == tag) {
                tag_next = b;
                --next.displacement;
            }
            next.tagged_site = tag_next - L;
            if (b == origin_bond) next.current += left ? 1 : -1;
            if (std::abs(next.displacement) > g.Dmax_ || std::abs(next.current) > Jmax)
                g.targets_.push_back(sink);
            else
                g.targets_.push_back(static_cast<std::uint32_t>(g.index(next)));
        }
        g.offsets_.push_back(g.targets_.size());
    }
    g.offsets_.push_back(g.targets_.size());  // sink: absorbing
    return g;
}

std::vector<double> conditioned_initial(const GeneratorMatrix& gen) {
    std::vector<double> v(gen.size(), 0.0);
    const int L = gen.half_width();
    const std::uint32_t origin = 1u << L;
    std::size_t count = 0;
    for (std::size_t r = 0; r < gen.pattern_count(); ++r)
        if (gen.pattern(r) & origin) ++count;
    for (std::size_t r = 0; r < gen.pattern_count(); ++r)
        if (gen.pattern(r) & origin) v[gen.index({gen.pattern(r), 0, 0, 0})] = 1.0 / static_cast<double>(count);
    return v;
}

std::vector<double> uniform_initial(const GeneratorMatrix& gen) {
    std::vector<double> v(gen.size(), 0.0);
    const double w = 1.0 / (static_cast<double>(gen.pattern_count()) * gen.particle_count());
    const int n = 2 * gen.half_width();
    for (std::size_t r = 0; r < gen.pattern_count(); ++r) {
        const std::uint32_t p = gen.pattern(r);
        for (int b = 0; b < n; ++b)
            if (p >> b & 1u) v[gen.index({p, b - gen.half_width(), 0, 0})] = w;
    }
    return v;
}

OracleDistribution distribution_at(const GeneratorMatrix& gen, std::span<const double> initial, double t,
                                   const OracleOptions& options) {
    if (!(t >= 0.0)) throw ParameterError("t must be >= 0");
    if (initial.size() != gen.size()) throw ParameterError("initial distribution has the wrong length");
    double mass = 0.0;
    for (const double p : initial) {
        if (p < 0.0) throw ParameterError("initial distribution has a negative entry");
        mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-10) throw ParameterError("initial distribution does not sum to 1");

    OracleDistribution out;
    out.t = t;
    out.joint.assign(gen.size(), 0.0);
    const double lambda = gen.uniformization_rate();
    const double lt = lambda * t;
    const double jump = 0.5 / lambda;

    std::vector<double> v(initial.begin(), initial.end());
    std::vector<double> next(gen.size());
    // Poisson(lt) weights in log space; stop once the remaining tail is below tolerance.
    double accumulated = 0.0;
    for (std::size_t n = 0;; ++n) {
        const double w = std::exp(-lt + (n == 0 ? 0.0 : static_cast<double>(n) * std::log(lt)) -
                                  std::lgamma(static_cast<double>(n) + 1.0));
        for (std::size_t s = 0; s < v.size(); ++s) out.joint[s] += w * v[s];
        accumulated += w;
        ++out.terms;
        if (lt == 0.0 || (static_cast<double>(n) > lt && 1.0 - accumulated < options.truncation)) break;
        if (out.terms > 100000) throw AccuracyError("uniformization did not reach the truncation tolerance");
        for (std::size_t s = 0; s < v.size(); ++s) next[s] = v[s] * (1.0 - gen.exit_rate(s) / lambda);
        for (std::size_t s = 0; s < v.size(); ++s) {
            const double flow = v[s] * jump;
            if (flow == 0.0) continue;
            for (const auto target : gen.targets(s)) next[target] += flow;
        }
        v.swap(next);
    }

    const int Dmax = gen.Dmax(), Jmax = gen.Jmax();
    out.X.assign(2 * static_cast<std::size_t>(Dmax) + 1, 0.0);
    out.J.assign(2 * static_cast<std::size_t>(Jmax) + 1, 0.0);
    const std::size_t nJ = out.J.size(), nD = out.X.size();
    for (std::size_t s = 0; s < gen.sink(); ++s) {
        const double p = out.joint[s];
        out.J[s % nJ] += p;
        out.X[(s / nJ) % nD] += p;
        out.total_mass += p;
    }
    out.clipped_mass = out.joint[gen.sink()];
    out.total_mass += out.clipped_mass;
    if (out.clipped_mass > options.clip_tolerance)
        throw AccuracyError("clipped mass " + std::to_string(out.clipped_mass) +
                            " exceeds tolerance; increase Jmax/Dmax");
    return out;
}

std::vector<double> pattern_marginal(const GeneratorMatrix& gen, std::span<const double> joint) {
    if (joint.size() != gen.size()) throw ParameterError("joint vector has the wrong length");
    std::vector<double> m(gen.pattern_count(), 0.0);
    const std::size_t per_pattern = (gen.size() - 1) / gen.pattern_count();
    for (std::size_t s = 0; s < gen.sink(); ++s) m[s / per_pattern] += joint[s];
    return m;
}

MixedMarginals bernoulli_star_marginals(int L, double rho, double t, const OracleOptions& options) {
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
    MixedMarginals out;
    out.Dmax = options.Dmax;
    out.Jmax = options.Jmax;
    out.X.assign(2 * static_cast<std::size_t>(options.Dmax) + 1, 0.0);
    out.J.assign(2 * static_cast<std::size_t>(options.Jmax) + 1, 0.0);
    const int others = 2 * L - 1;
    for (int extra = 0; extra <= others; ++extra) {
        const double w = binomial_pmf(others, extra, rho);
        const int k = extra + 1;
        if (k == 2 * L) {
            out.X[static_cast<std::size_t>(options.Dmax)] += w;
            out.J[static_cast<std::size_t>(options.Jmax)] += w;
            continue;
        }
        const auto gen = build_generator(L, k, options.Jmax, options);
        const auto d = distribution_at(gen, conditioned_initial(gen), t, options);
        for (std::size_t i = 0; i < out.X.size(); ++i) out.X[i] += w * d.X[i];
        for (std::size_t i = 0; i < out.J.size(); ++i) out.J[i] += w * d.J[i];
        out.clipped_mass += w * d.clipped_mass;
    }
    return out;
}

std::vector<double> clipped_histogram(std::span<const std::int64_t> samples, int max) {
    std::vector<double> h(2 * static_cast<std::size_t>(max) + 2, 0.0);
    if (samples.empty()) return h;
    for (const auto s : samples) {
        if (s < -max || s > max)
            h.back() += 1.0;
        else
            h[static_cast<std::size_t>(s + max)] += 1.0;
    }
    for (auto& x : h) x /= static_cast<double>(samples.size());
    return h;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    const std::size_t n = std::max(p.size(), q.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.size() ? p[i] : 0.0;
        const double b = i < q.size() ? q[i] : 0.0;
        sum += std::abs(a - b);
    }
    return 0.5 * sum;
}

}  // namespace ssep
