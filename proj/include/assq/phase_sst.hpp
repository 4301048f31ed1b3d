#pragma once

#include "assq/adaptive_cwt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace assq {

using BMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double invalid_omega = std::numeric_limits<double>::quiet_NaN();

enum class PhaseKind { First, SecondPure, SecondHybrid };

// Reassignment frequencies; cells outside the masks hold NaN.
struct PhasePlane {
    RMat omega;
    BMat mask_g1;
    BMat mask_g2;
    PhaseKind kind = PhaseKind::First;

    bool valid(Eigen::Index j, Eigen::Index i) const { return !std::isnan(omega(j, i)); }
};

enum class SqueezeKernel { Dirac, Triangle, Gauss };
enum class SqueezeVariant { T1, T2, S2 };

struct SqueezeConfig {
    double xi0 = 0.0;     // centre of the first bin (Hz)
    double dxi = 1.0;     // bin spacing (Hz)
    std::size_t n_xi = 0; // number of bins
    double fs = 0.0;      // frequencies outside [0, fs/2) leak
    double lambda = 0.0;  // kernel width; 0 means nearest-bin assignment
    SqueezeKernel kernel = SqueezeKernel::Dirac;

    double xi(std::size_t m) const { return xi0 + dxi * double(m); }

    // Gauss has unbounded support; it is offered for pictures only.
    bool kernel_compact() const { return kernel != SqueezeKernel::Gauss; }
};

// Bins centred on 0, fs/N, ..., fs/2.
inline SqueezeConfig default_squeeze_config(double fs, std::size_t n) {
    SqueezeConfig c;
    c.dxi = fs / double(n);
    c.n_xi = n / 2 + 1;
    c.fs = fs;
    return c;
}

struct TfPlane {
    CMat values; // n_xi x n
    SqueezeConfig config;
    std::vector<cplx> leaked; // per column, mass sent outside [0, fs/2)
};

namespace detail {

// d_a (a W^{g1} / W)
inline cplx dlog_ratio(const CwtStack &st, Eigen::Index j, Eigen::Index i) {
    const double a = st.grid.a[static_cast<std::size_t>(j)];
    const cplx w = st.w(j, i), w1 = st.w_g1(j, i);
    return w1 / w + a * (st.da_w_g1(j, i) * w - w1 * st.da_w(j, i)) / (w * w);
}

inline double first_phase_cell(const CwtStack &st, Eigen::Index j, Eigen::Index i) {
    const double s = st.sp.sigma[static_cast<std::size_t>(i)];
    const double r = st.sp.dsigma[static_cast<std::size_t>(i)] / s;
    const cplx w = st.w(j, i);
    const cplx tpi = I * (2.0 * pi);
    const cplx om = st.db_w(j, i) / (tpi * w) + r / tpi + r * st.w_g3(j, i) / (tpi * w);
    return om.real();
}

inline cplx r0_cell(const CwtStack &st, Eigen::Index j, Eigen::Index i, cplx q) {
    const double s = st.sp.sigma[static_cast<std::size_t>(i)];
    const double r = st.sp.dsigma[static_cast<std::size_t>(i)] / s;
    const cplx w = st.w(j, i), da = st.da_w(j, i);
    const cplx d_dbw = (st.dadb_w(j, i) * w - st.db_w(j, i) * da) / (w * w);
    const cplx d_g3w = (st.da_w_g3(j, i) * w - st.w_g3(j, i) * da) / (w * w);
    return (d_dbw + r * d_g3w) / q;
}

inline double second_phase_cell(const CwtStack &st, Eigen::Index j, Eigen::Index i, cplx q) {
    const double s = st.sp.sigma[static_cast<std::size_t>(i)];
    const double r = st.sp.dsigma[static_cast<std::size_t>(i)] / s;
    const double a = st.grid.a[static_cast<std::size_t>(j)];
    const cplx w = st.w(j, i);
    const cplx tpi = I * (2.0 * pi);
    const cplx om = st.db_w(j, i) / (tpi * w) + (r / tpi) * (1.0 + st.w_g3(j, i) / w) -
                    a * (st.w_g1(j, i) / (tpi * w)) * r0_cell(st, j, i, q);
    return om.real();
}

} // namespace detail

inline PhasePlane phase_first(const CwtStack &st, double gamma1) {
    PhasePlane p;
    p.kind = PhaseKind::First;
    const auto J = st.w.rows(), n = st.w.cols();
    p.omega = RMat::Constant(J, n, invalid_omega);
    p.mask_g1 = (st.w.array().abs() > gamma1);
    p.mask_g2 = BMat::Constant(J, n, true);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < J; ++j)
            if (p.mask_g1(j, i)) p.omega(j, i) = detail::first_phase_cell(st, j, i);
    return p;
}

// |d_a(a W^{g1}/W)| on cells with |W| > gamma1; NaN elsewhere.
inline RMat g2_magnitude(const CwtStack &st, double gamma1) {
    RMat q = RMat::Constant(st.w.rows(), st.w.cols(), invalid_omega);
    for (Eigen::Index i = 0; i < st.w.cols(); ++i)
        for (Eigen::Index j = 0; j < st.w.rows(); ++j)
            if (std::abs(st.w(j, i)) > gamma1) q(j, i) = std::abs(detail::dlog_ratio(st, j, i));
    return q;
}

// 1e-4 times the median of |d_a(a W^{g1}/W)| over cells with |W| > gamma1.
inline double default_gamma2(const CwtStack &st, double gamma1) {
    RMat q = g2_magnitude(st, gamma1);
    std::vector<double> v;
    for (Eigen::Index k = 0; k < q.size(); ++k)
        if (!std::isnan(q(k))) v.push_back(q(k));
    if (v.empty()) return 1e-12;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return std::max(1e-4 * *mid, 1e-300);
}

inline PhasePlane phase_second(const CwtStack &st, double gamma1, double gamma2, bool hybrid) {
    if (!(gamma2 > 0.0)) throw std::invalid_argument("phase_second: gamma2 must be positive");
    PhasePlane p;
    p.kind = hybrid ? PhaseKind::SecondHybrid : PhaseKind::SecondPure;
    const auto J = st.w.rows(), n = st.w.cols();
    p.omega = RMat::Constant(J, n, invalid_omega);
    p.mask_g1 = (st.w.array().abs() > gamma1);
    p.mask_g2 = BMat::Constant(J, n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            if (!p.mask_g1(j, i)) continue;
            const cplx q = detail::dlog_ratio(st, j, i);
            p.mask_g2(j, i) = std::abs(q) > gamma2;
            if (p.mask_g2(j, i))
                p.omega(j, i) = detail::second_phase_cell(st, j, i, q);
            else if (hybrid)
                p.omega(j, i) = detail::first_phase_cell(st, j, i);
        }
    }
    return p;
}

// Nearest bin, ties to the lower bin; -1 when outside [0, fs/2).
inline long nearest_bin(const SqueezeConfig &cfg, double omega) {
    if (!(omega >= 0.0) || !(omega < 0.5 * cfg.fs)) return -1;
    const double pos = (omega - cfg.xi0) / cfg.dxi - 0.5;
    const long m = static_cast<long>(std::ceil(pos));
    if (m < 0 || m >= static_cast<long>(cfg.n_xi)) return -1;
    return m;
}

inline double squeeze_kernel(SqueezeKernel k, double t) {
    switch (k) {
    case SqueezeKernel::Triangle: return std::max(0.0, 1.0 - std::abs(t));
    case SqueezeKernel::Gauss: return gauss(t);
    case SqueezeKernel::Dirac: break;
    }
    return 0.0;
}

inline TfPlane squeeze(const CwtStack &st, const PhasePlane &plane, const SqueezeConfig &cfg,
                       SqueezeVariant variant) {
    if (plane.omega.rows() != st.w.rows() || plane.omega.cols() != st.w.cols())
        throw std::invalid_argument("squeeze: plane and stack shapes differ");
    const PhaseKind want = variant == SqueezeVariant::T1   ? PhaseKind::First
                           : variant == SqueezeVariant::T2 ? PhaseKind::SecondPure
                                                           : PhaseKind::SecondHybrid;
    if (plane.kind != want) throw std::invalid_argument("squeeze: phase kind does not match variant");
    if (!(cfg.dxi > 0.0) || cfg.n_xi == 0) throw std::invalid_argument("squeeze: empty frequency grid");
    const bool hard = cfg.kernel == SqueezeKernel::Dirac || cfg.lambda == 0.0;

    TfPlane tf;
    tf.config = cfg;
    const auto n = st.w.cols();
    tf.values = CMat::Zero(static_cast<Eigen::Index>(cfg.n_xi), n);
    tf.leaked.assign(static_cast<std::size_t>(n), cplx{});
    const double dlog = st.grid.dlog;

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const auto i = static_cast<Eigen::Index>(ii);
        for (Eigen::Index j = 0; j < st.w.rows(); ++j) {
            const double om = plane.omega(j, i);
            if (std::isnan(om)) continue;
            const cplx mass = st.w(j, i) * dlog;
            if (hard) {
                const long m = nearest_bin(cfg, om);
                if (m < 0)
                    tf.leaked[ii] += mass;
                else
                    tf.values(m, i) += mass / cfg.dxi;
                continue;
            }
            cplx placed = 0.0;
            const double reach = cfg.kernel == SqueezeKernel::Gauss ? 8.0 : 1.0;
            const double lo = om - reach * cfg.lambda, hi = om + reach * cfg.lambda;
            const long m0 = std::max(0L, static_cast<long>(std::floor((lo - cfg.xi0) / cfg.dxi)));
            const long m1 = std::min(static_cast<long>(cfg.n_xi) - 1,
                                     static_cast<long>(std::ceil((hi - cfg.xi0) / cfg.dxi)));
            for (long m = m0; m <= m1; ++m) {
                const double kv =
                    squeeze_kernel(cfg.kernel, (cfg.xi(std::size_t(m)) - om) / cfg.lambda) / cfg.lambda;
                if (kv == 0.0) continue;
                tf.values(m, i) += mass * kv;
                placed += mass * kv * cfg.dxi;
            }
            tf.leaked[ii] += mass - placed;
        }
    });
    return tf;
}

// Sum over scales of W dlog on cells where the plane carries a frequency.
inline std::vector<cplx> thresholded_line_integral(const CwtStack &st, const PhasePlane &plane) {
    std::vector<cplx> out(static_cast<std::size_t>(st.w.cols()), cplx{});
    for (Eigen::Index i = 0; i < st.w.cols(); ++i)
        for (Eigen::Index j = 0; j < st.w.rows(); ++j)
            if (!std::isnan(plane.omega(j, i))) out[std::size_t(i)] += st.w(j, i) * st.grid.dlog;
    return out;
}

// Classical fixed-window transform, written against the wavelet
// psi(t) = g(t / sigma) e^{i 2 pi mu t} / sigma and its Fourier transform
// ghat(sigma (xi - mu)). Serves as the reference the adaptive pipeline
// must reduce to when sigma is constant.
namespace conventional {

struct Cwt {
    CMat w, w_g1, db_w, da_w, da_w_g1, dadb_w;
    ScaleGrid grid;
};

inline Cwt transform(const SampledSignal &x, double sigma, const ScaleGrid &grid, double mu) {
    const std::size_t N = x.size();
    const auto bins = signal_spectrum(x);
    const SpecPoly pg = spectral_poly(WindowKind::G), pg1 = spectral_poly(WindowKind::TG);
    const SpecPoly dpg = pg.derivative(), dpg1 = pg1.derivative();
    Cwt c;
    c.grid = grid;
    const auto J = static_cast<Eigen::Index>(grid.size());
    for (CMat *m : {&c.w, &c.w_g1, &c.db_w, &c.da_w, &c.da_w_g1, &c.dadb_w})
        m->setZero(J, static_cast<Eigen::Index>(N));
    for (std::size_t i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            const double a = grid.a[std::size_t(j)];
            for (const auto &bin : bins) {
                const double v = sigma * (a * bin.xi - mu);
                const double gh = gauss_hat(v);
                if (gh == 0.0) continue;
                const cplx e = bin.coef * std::polar(1.0, 2.0 * pi * double((bin.m * i) % N) / double(N));
                // conj of the wavelet transform at a xi, and its a-derivative
                const cplx psi = std::conj(pg(v) * gh);
                const cplx psi1 = std::conj(pg1(v) * gh);
                const cplx dpsi = std::conj(dpg(v) * gh) * (sigma * bin.xi);
                const cplx dpsi1 = std::conj(dpg1(v) * gh) * (sigma * bin.xi);
                const cplx ixi = I * (2.0 * pi * bin.xi);
                const auto col = static_cast<Eigen::Index>(i);
                c.w(j, col) += e * psi;
                c.w_g1(j, col) += e * psi1;
                c.db_w(j, col) += e * ixi * psi;
                c.da_w(j, col) += e * dpsi;
                c.da_w_g1(j, col) += e * dpsi1;
                c.dadb_w(j, col) += e * ixi * dpsi;
            }
        }
    }
    return c;
}

// Re(d_b W / (i 2 pi W)) where |W| > gamma.
inline RMat phase(const Cwt &c, double gamma) {
    RMat om = RMat::Constant(c.w.rows(), c.w.cols(), invalid_omega);
    for (Eigen::Index i = 0; i < c.w.cols(); ++i)
        for (Eigen::Index j = 0; j < c.w.rows(); ++j)
            if (std::abs(c.w(j, i)) > gamma)
                om(j, i) = (c.db_w(j, i) / (I * (2.0 * pi) * c.w(j, i))).real();
    return om;
}

// Re(d_bW/(i2piW)) - a Re{ W^{g1}/(i2piW) * d_a(d_bW/W) / d_a(a W^{g1}/W) }
// where |W| > gamma and |d_a(a W^{g1}/W)| > gamma2.
inline RMat phase_second(const Cwt &c, double gamma, double gamma2) {
    RMat om = RMat::Constant(c.w.rows(), c.w.cols(), invalid_omega);
    const cplx tpi = I * (2.0 * pi);
    for (Eigen::Index i = 0; i < c.w.cols(); ++i) {
        for (Eigen::Index j = 0; j < c.w.rows(); ++j) {
            const cplx w = c.w(j, i);
            if (!(std::abs(w) > gamma)) continue;
            const double a = c.grid.a[std::size_t(j)];
            const cplx denom = c.w_g1(j, i) / w + a * (c.da_w_g1(j, i) * w - c.w_g1(j, i) * c.da_w(j, i)) / (w * w);
            if (!(std::abs(denom) > gamma2)) continue;
            const cplx dq = (c.dadb_w(j, i) * w - c.db_w(j, i) * c.da_w(j, i)) / (w * w);
            om(j, i) = (c.db_w(j, i) / (tpi * w)).real() -
                       a * (c.w_g1(j, i) / (tpi * w) * (1.0 / denom) * dq).real();
        }
    }
    return om;
}

// T(xi, b) = sum over valid cells of W dlog / dxi in the nearest bin.
inline CMat squeeze(const Cwt &c, const RMat &omega, const SqueezeConfig &cfg) {
    CMat T = CMat::Zero(static_cast<Eigen::Index>(cfg.n_xi), c.w.cols());
    for (Eigen::Index i = 0; i < c.w.cols(); ++i)
        for (Eigen::Index j = 0; j < c.w.rows(); ++j) {
            if (std::isnan(omega(j, i))) continue;
            const long m = nearest_bin(cfg, omega(j, i));
            if (m >= 0) T(m, i) += c.w(j, i) * c.grid.dlog / cfg.dxi;
        }
    return T;
}

} // namespace conventional

} // namespace assq
