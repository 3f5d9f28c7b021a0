#include "ssep/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssep {

void ScalingParams::validate() const {
    if (N < 1) throw ParameterError("N must be >= 1");
    if (!(theta > 0.5 && theta < 1.0)) throw ParameterError("theta must lie in (1/2, 1)");
    if (!(T > 0.0)) throw ParameterError("T must be > 0");
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
}

double ScalingParams::a_N() const { return std::pow(static_cast<double>(N), theta); }

namespace {

const Configuration& snapshot_at(const TrajectoryRecord& record, std::size_t k) {
    if (record.snapshots.size() != record.times.size())
        throw DataError("record has no configuration snapshots");
    if (k >= record.times.size()) throw DataError("record index out of range");
    return record.snapshots[k];
}

int occ(const Configuration& c, std::int64_t x) { return c.occupied(x) ? 1 : 0; }

}  // namespace

bool check_conservation_identity(const Configuration& initial, const Configuration& final,
                                 std::int64_t origin_current, std::span<const std::int64_t> currents_at_T) {
    if (initial.half_width() != final.half_width()) throw DataError("snapshots from different rings");
    if (currents_at_T.empty()) throw DataError("no current window to check against");
    const auto W = static_cast<std::int64_t>(currents_at_T.size());
    if (W > final.half_width() - 1) throw DataError("current window wider than the ring allows");
    for (std::int64_t x = 0; x < W; ++x) {
        const std::int64_t in = x == 0 ? origin_current : currents_at_T[static_cast<std::size_t>(x - 1)];
        // the last site of the window needs J_{W-1,W}, which is in the window; sites
        // beyond it are not tested
        const std::int64_t out = currents_at_T[static_cast<std::size_t>(x)];
        if (occ(final, x) - occ(initial, x) != in - out) return false;
    }
    return true;
}

bool check_conservation_identity(const TrajectoryRecord& record, std::size_t k) {
    const auto& initial = snapshot_at(record, 0);
    const auto& final = snapshot_at(record, k);
    if (record.window == 0) throw DataError("record has no current window");
    return check_conservation_identity(initial, final, record.J_origin[k], record.currents_at(k));
}

PositionIdentity check_position_current_identity(const TrajectoryRecord& record, std::size_t k) {
    const auto& snap = snapshot_at(record, k);
    const std::int64_t J = record.J_origin[k];
    const std::int64_t X = record.X[k];
    if (J == 0) return PositionIdentity::ZeroCurrent;
    std::int64_t sum = 0;
    if (J > 0) {
        for (std::int64_t x = 0; x < X; ++x) sum += occ(snap, x);
        return (X > 0 && J == sum) ? PositionIdentity::Holds : PositionIdentity::Violated;
    }
    for (std::int64_t x = X; x < 0; ++x) sum += occ(snap, x);
    return (X < 0 && J == -sum) ? PositionIdentity::Holds : PositionIdentity::Violated;
}

double g_n(double u, double n) {
    if (!(u > 0.0)) return 0.0;
    return std::max(0.0, 1.0 - u / n);
}

double empirical_pairing(const Configuration& snapshot, const std::function<double(double)>& G,
                         double support_lo, double support_hi, const ScalingParams& scaling) {
    scaling.validate();
    const double N = static_cast<double>(scaling.N);
    const auto lo = static_cast<std::int64_t>(std::floor(support_lo * N));
    const auto hi = static_cast<std::int64_t>(std::ceil(support_hi * N));
    const std::int64_t L = snapshot.half_width();
    if (lo < -L || hi > L - 1)
        throw ParameterError("test-function support [" + std::to_string(support_lo) + ", " +
                             std::to_string(support_hi) + "] exceeds the simulated window");
    double sum = 0.0;
    for (std::int64_t x = lo; x <= hi; ++x) {
        const double g = G(static_cast<double>(x) / N);
        if (g != 0.0) sum += (occ(snapshot, x) - scaling.rho) * g;
    }
    return sum / scaling.a_N();
}

double empirical_pairing_gn(const Configuration& snapshot, double n, const ScalingParams& scaling) {
    return empirical_pairing(snapshot, [n](double u) { return g_n(u, n); }, 0.0, n, scaling);
}

SummedCurrentDiagnostic summed_current_diagnostic(const TrajectoryRecord& record, std::int64_t n,
                                                  const ScalingParams& scaling, std::size_t k) {
    scaling.validate();
    if (n < 1) throw ParameterError("n must be >= 1");
    const std::int64_t nN = n * scaling.N;
    if (record.window < nN)
        throw DataError("current window " + std::to_string(record.window) + " shorter than nN = " +
                        std::to_string(nN));
    const auto& initial = snapshot_at(record, 0);
    const auto& final = snapshot_at(record, k);
    const double aN = scaling.a_N();
    const auto currents = record.currents_at(k);

    double summed = 0.0;
    for (std::int64_t x = 0; x < nN; ++x) summed += static_cast<double>(currents[static_cast<std::size_t>(x)]);
    SummedCurrentDiagnostic out;
    out.value = summed / (static_cast<double>(nN) * aN);

    const double before = empirical_pairing_gn(initial, static_cast<double>(n), scaling);
    const double after = empirical_pairing_gn(final, static_cast<double>(n), scaling);
    const double j01 = static_cast<double>(currents[0]) / aN;
    out.residual = after - before + out.value - j01;
    out.origin_defect = static_cast<double>(occ(final, 0) - occ(initial, 0)) / aN;
    out.scale = std::max({std::abs(after), std::abs(before), std::abs(out.value), std::abs(j01), 1.0 / aN});
    return out;
}

}  // namespace ssep
