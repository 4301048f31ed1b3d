#pragma once

// Shared test scenarios. Kept separate from oracles.hpp because these call
// into the library.

#include "assq/recovery_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fixture {

using namespace assq;

// phi' = 20 + 18 t on [0, 4) s at 1024 Hz. The record is long enough that every
// analysis window centred in [0.4, 3.6] decays before the ends, and the sample
// rate keeps the passband of the smallest zone scale clear of Nyquist.
inline SignalSpec long_chirp() {
    SignalSpec s;
    s.components = {linear_chirp(1.0, 20.0, 18.0)};
    s.fs = 1024.0;
    s.n = 4096;
    return s;
}

struct ChirpErrors {
    double first = 0.0;  // max |omega1 - phi'| over the cells below
    double second = 0.0; // max |omega2 - phi'| over the same cells
    std::size_t cells = 0;
};

// Errors over every cell passing both thresholds at the evaluated interior
// columns b in [0.1 T, 0.9 T] (every `stride`-th sample).
inline ChirpErrors chirp_errors(const SigmaProfile &sp, std::size_t stride, double gamma1 = 0.01) {
    const auto spec = long_chirp();
    const WindowModel wm;
    const double T = double(spec.n) / spec.fs;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < spec.n; i += stride)
        if (spec.time(i) >= 0.1 * T && spec.time(i) <= 0.9 * T) cols.push_back(i);
    const auto z = zones(spec, wm, sp, ZoneOrder::Second);
    const auto st = compute_stack(synthesize(spec), sp, zone_grid(z), wm, cols);
    const auto p1 = phase_first(st, gamma1);
    const auto p2 = phase_second(st, gamma1, default_gamma2(st, gamma1), false);
    ChirpErrors e;
    for (std::size_t i : cols) {
        const double want = spec.components[0].dphase(spec.time(i));
        const auto c = Eigen::Index(i);
        for (Eigen::Index j = 0; j < st.w.rows(); ++j) {
            if (!p2.mask_g1(j, c) || !p2.mask_g2(j, c)) continue;
            e.first = std::max(e.first, std::abs(p1.omega(j, c) - want));
            e.second = std::max(e.second, std::abs(p2.omega(j, c) - want));
            ++e.cells;
        }
    }
    return e;
}

// sigma(b) = 1 + 0.2 sin(b)
inline SigmaProfile gentle_sigma(const std::vector<double> &b) {
    return sigma_from_function(
        b, [](double t) { return 1.0 + 0.2 * std::sin(t); }, [](double t) { return 0.2 * std::cos(t); });
}

} // namespace fixture
