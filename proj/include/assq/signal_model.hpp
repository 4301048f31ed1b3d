#pragma once

#include "assq/windows.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace assq {

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using RealFn = std::function<double(double)>;

// One component A(t) e^{i 2 pi phi(t)} with phi in cycles.
struct ComponentTruth {
    RealFn amp, damp;
    RealFn phase, dphase, d2phase, d3phase;
};

namespace detail {

inline double poly_eval(const std::vector<double> &c, double t) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
    return acc;
}

inline std::vector<double> poly_diff(const std::vector<double> &c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = double(i) * c[i];
    return d;
}

inline RealFn poly_fn(std::vector<double> c) {
    return [c = std::move(c)](double t) { return poly_eval(c, t); };
}

} // namespace detail

// Polynomial amplitude and phase, coefficients in increasing degree.
inline ComponentTruth polynomial_component(std::vector<double> amp_coeffs,
                                           std::vector<double> phase_coeffs) {
    using namespace detail;
    auto p1 = poly_diff(phase_coeffs);
    auto p2 = poly_diff(p1);
    auto p3 = poly_diff(p2);
    ComponentTruth c;
    c.amp = poly_fn(amp_coeffs);
    c.damp = poly_fn(poly_diff(amp_coeffs));
    c.phase = poly_fn(phase_coeffs);
    c.dphase = poly_fn(p1);
    c.d2phase = poly_fn(p2);
    c.d3phase = poly_fn(p3);
    return c;
}

inline ComponentTruth tone(double amp, double freq, double phase0 = 0.0) {
    return polynomial_component({amp}, {phase0, freq});
}

// phi(t) = phase0 + f0 t + rate t^2 / 2, so phi'(t) = f0 + rate t.
inline ComponentTruth linear_chirp(double amp, double f0, double rate, double phase0 = 0.0) {
    return polynomial_component({amp}, {phase0, f0, 0.5 * rate});
}

struct SignalSpec {
    std::vector<ComponentTruth> components;
    double fs = 256.0;
    std::size_t n = 256;
    double t0 = 0.0;
    bool real_mode = false;

    double time(std::size_t i) const { return t0 + double(i) / fs; }
    double t_end() const { return time(n == 0 ? 0 : n - 1); }
    std::vector<double> times() const {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = time(i);
        return t;
    }
};

struct SampledSignal {
    std::vector<cplx> samples;
    double fs = 256.0;
    double t0 = 0.0;
    bool real_mode = false;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t0 + double(i) / fs; }
};

struct ClassParams {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double eps3 = 0.0;
    double dprime = 1.0;
};

// Checks the supplied derivatives against central differences at 32 probes.
inline void validate_derivatives(const ComponentTruth &c, double lo, double hi,
                                 double rtol = 1e-6) {
    const double span = std::max(hi - lo, 1e-3);
    const double h = 1e-4 * span;
    auto check = [&](const RealFn &f, const RealFn &df, const char *what) {
        for (int p = 0; p < 32; ++p) {
            double t = lo + span * (p + 0.5) / 32.0;
            double fd = (f(t + h) - f(t - h)) / (2.0 * h);
            double ref = df(t);
            double scale = std::max({std::abs(ref), std::abs(f(t)) / span, 1.0});
            if (!(std::abs(fd - ref) <= rtol * scale))
                throw SpecError(std::string("derivative mismatch for ") + what + " at t=" +
                                std::to_string(t));
        }
    };
    check(c.amp, c.damp, "A'");
    check(c.phase, c.dphase, "phi'");
    check(c.dphase, c.d2phase, "phi''");
    check(c.d2phase, c.d3phase, "phi'''");
}

// Ordering, Nyquist and positivity on the sampled interval.
inline void validate(const SignalSpec &spec) {
    if (!(spec.fs > 0.0)) throw SpecError("fs must be positive");
    if (spec.n == 0) throw SpecError("sample count must be positive");
    const double nyq = 0.5 * spec.fs;
    for (std::size_t i = 0; i < spec.n; ++i) {
        double t = spec.time(i);
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < spec.components.size(); ++k) {
            const auto &c = spec.components[k];
            double f = c.dphase(t);
            if (!(c.amp(t) > 0.0))
                throw SpecError("amplitude of component " + std::to_string(k + 1) +
                                " is not positive at t=" + std::to_string(t));
            if (!(f > 0.0))
                throw SpecError("instantaneous frequency of component " + std::to_string(k + 1) +
                                " is not positive at t=" + std::to_string(t));
            if (!(f < nyq))
                throw SpecError("component " + std::to_string(k + 1) +
                                " exceeds the Nyquist frequency at t=" + std::to_string(t));
            if (!(f > prev))
                throw SpecError("components are not ordered by frequency at t=" +
                                std::to_string(t));
            prev = f;
        }
    }
}

// x_k(t): A e^{i 2 pi phi} in complex mode, A cos(2 pi phi) in real mode.
inline cplx component_value(const ComponentTruth &c, double t, bool real_mode) {
    const double A = c.amp(t);
    const double ph = 2.0 * pi * c.phase(t);
    if (real_mode) return {A * std::cos(ph), 0.0};
    return std::polar(A, ph);
}

inline SampledSignal synthesize(const SignalSpec &spec) {
    validate(spec);
    SampledSignal s;
    s.fs = spec.fs;
    s.t0 = spec.t0;
    s.real_mode = spec.real_mode;
    s.samples.assign(spec.n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < spec.n; ++i) {
        double t = spec.time(i);
        for (const auto &c : spec.components) s.samples[i] += component_value(c, t, spec.real_mode);
    }
    return s;
}

// Suprema over an 8x oversampled probe grid of the sampled interval.
inline ClassParams class_params(const SignalSpec &spec) {
    ClassParams p;
    const std::size_t m = std::max<std::size_t>(8 * spec.n, 2);
    const double lo = spec.t0, hi = spec.t_end();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double t = lo + (hi - lo) * double(i) / double(m - 1);
        for (std::size_t k = 0; k < spec.components.size(); ++k) {
            const auto &c = spec.components[k];
            p.eps1 = std::max(p.eps1, std::abs(c.damp(t)));
            p.eps2 = std::max(p.eps2, std::abs(c.d2phase(t)));
            p.eps3 = std::max(p.eps3, std::abs(c.d3phase(t)));
            if (k > 0) {
                double f1 = c.dphase(t), f0 = spec.components[k - 1].dphase(t);
                dmin = std::min(dmin, (f1 - f0) / (f1 + f0));
            }
        }
    }
    p.dprime = spec.components.size() >= 2 ? dmin : 1.0;
    return p;
}

// Two real chirps with IF 12 + 0.5 t and 26 - 0.5 t, N = 256 at 256 Hz.
inline SignalSpec example1_spec() {
    SignalSpec s;
    s.components = {linear_chirp(1.0, 12.0, 0.5), linear_chirp(1.0, 26.0, -0.5)};
    s.fs = 256.0;
    s.n = 256;
    s.t0 = 0.0;
    s.real_mode = true;
    return s;
}

// Two real chirps with IF 20 + 18 t and 42 + 36 t, N = 256 at 256 Hz.
inline SignalSpec example2_spec() {
    SignalSpec s;
    s.components = {linear_chirp(1.0, 20.0, 18.0), linear_chirp(1.0, 42.0, 36.0)};
    s.fs = 256.0;
    s.n = 256;
    s.t0 = 0.0;
    s.real_mode = true;
    return s;
}

} // namespace assq
