#pragma once

#include "assq/parallel.hpp"
#include "assq/signal_model.hpp"
#include "assq/windows.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace assq {

using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

class AdmissibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// sigma(b_i) and sigma'(b_i) on the sample times b_i.
struct SigmaProfile {
    std::vector<double> b;
    std::vector<double> sigma;
    std::vector<double> dsigma;

    std::size_t size() const { return b.size(); }
};

inline SigmaProfile constant_sigma(const std::vector<double> &b, double value) {
    return {b, std::vector<double>(b.size(), value), std::vector<double>(b.size(), 0.0)};
}

inline SigmaProfile sigma_from_function(const std::vector<double> &b,
                                        const std::function<double(double)> &s,
                                        const std::function<double(double)> &ds) {
    SigmaProfile p{b, {}, {}};
    for (double t : b) {
        p.sigma.push_back(s(t));
        p.dsigma.push_back(ds(t));
    }
    return p;
}

// Tabulated sigma; the derivative is taken by finite differences of the table.
inline SigmaProfile sigma_from_table(const std::vector<double> &b, std::vector<double> sigma) {
    if (b.size() != sigma.size()) throw std::invalid_argument("sigma table length mismatch");
    SigmaProfile p{b, std::move(sigma), std::vector<double>(b.size(), 0.0)};
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n && n > 1; ++i) {
        std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == n ? n - 1 : i + 1;
        p.dsigma[i] = (p.sigma[hi] - p.sigma[lo]) / (b[hi] - b[lo]);
    }
    return p;
}

inline void check_admissible(const SigmaProfile &sp, const WindowModel &wm) {
    const double floor = wm.alpha() / wm.mu();
    for (std::size_t i = 0; i < sp.size(); ++i) {
        if (!(sp.sigma[i] > floor) || !std::isfinite(sp.sigma[i]))
            throw AdmissibilityError("sigma(b) = " + std::to_string(sp.sigma[i]) + " at b = " +
                                     std::to_string(sp.b[i]) + " does not exceed alpha/mu = " +
                                     std::to_string(floor));
    }
}

// Geometric scale grid a_j = a_min 2^{j / voices}.
struct ScaleGrid {
    std::vector<double> a;
    double dlog = 0.0;

    std::size_t size() const { return a.size(); }
    double a_min() const { return a.front(); }
    double a_max() const { return a.back(); }
};

inline ScaleGrid make_scale_grid(double a_min, double a_max, int voices_per_octave = 32) {
    if (!(a_min > 0.0 && a_max > a_min) || voices_per_octave <= 0)
        throw std::invalid_argument("make_scale_grid: need 0 < a_min < a_max and voices > 0");
    ScaleGrid g;
    g.dlog = std::log(2.0) / voices_per_octave;
    const auto J = static_cast<std::size_t>(std::ceil(std::log(a_max / a_min) / g.dlog)) + 1;
    for (std::size_t j = 0; j < J; ++j) g.a.push_back(a_min * std::exp(g.dlog * double(j)));
    return g;
}

// Grid covering the first-order zones of every frequency in [xi_lo, xi_hi] at every b.
inline ScaleGrid covering_grid(const SigmaProfile &sp, const WindowModel &wm, double xi_lo,
                               double xi_hi, int voices_per_octave = 32) {
    if (!(xi_lo > 0.0 && xi_hi > xi_lo))
        throw std::invalid_argument("covering_grid: need 0 < xi_lo < xi_hi");
    const double smin = *std::min_element(sp.sigma.begin(), sp.sigma.end());
    const double lo = (wm.mu() - wm.alpha() / smin) / xi_hi;
    const double hi = (wm.mu() + wm.alpha() / smin) / xi_lo;
    if (!(lo > 0.0)) throw AdmissibilityError("covering_grid: sigma below alpha/mu");
    return make_scale_grid(lo, hi, voices_per_octave);
}

// Adaptive CWT and its companion fields on a J x n lattice (rows = scales).
struct CwtStack {
    CMat w, w_g1, w_g2, w_g3, w_gp;
    CMat db_w, da_w, da_w_g1, da_w_g3, dadb_w;
    SigmaProfile sp;
    ScaleGrid grid;
    WindowModel wm;
    double fs = 0.0;
    double t0 = 0.0;
    bool real_mode = false;

    std::size_t rows() const { return grid.size(); }
    std::size_t cols() const { return sp.size(); }
};

struct SpectrumBin {
    double xi;
    cplx coef;
    std::size_t m;
};

// X[m] = (1/N) sum_n x_n e^{-i 2 pi m n / N} at xi_m = m fs / N. Real mode keeps
// m = 0..N/2 (analytic half, nothing doubled); complex mode folds m > N/2 to
// negative frequencies.
inline std::vector<SpectrumBin> signal_spectrum(const SampledSignal &x) {
    const std::size_t N = x.size();
    std::vector<cplx> X;
    Eigen::FFT<double> fft;
    fft.fwd(X, x.samples);
    std::vector<SpectrumBin> bins;
    const std::size_t top = x.real_mode ? N / 2 : N - 1;
    for (std::size_t m = 0; m <= top && m < N; ++m) {
        double mm = (!x.real_mode && 2 * m > N) ? double(m) - double(N) : double(m);
        bins.push_back({mm * x.fs / double(N), X[m] / double(N), m});
    }
    return bins;
}

namespace detail {

// Spectral polynomial with its degree cached for the inner loop.
struct TrimmedPoly {
    SpecPoly p;
    int deg = 0;
    TrimmedPoly() = default;
    TrimmedPoly(const SpecPoly &q) : p(q), deg(q.degree()) {}
    cplx operator()(double x) const { return p.eval(x, deg); }
};

struct StackKernels {
    TrimmedPoly g, dg, ddg, g1, dg1, g2, g3, dg3, gp;
    StackKernels() {
        const SpecPoly pg = spectral_poly(WindowKind::G);
        const SpecPoly pg1 = spectral_poly(WindowKind::TG);
        const SpecPoly pg3 = spectral_poly(WindowKind::TGP);
        g = pg;
        dg = pg.derivative();
        ddg = pg.derivative().derivative();
        g1 = pg1;
        dg1 = pg1.derivative();
        g2 = spectral_poly(WindowKind::T2G);
        g3 = pg3;
        dg3 = pg3.derivative();
        gp = spectral_poly(WindowKind::GP);
    }
};

} // namespace detail

// Only the listed columns are evaluated when `columns` is non-empty; the others stay zero
// and therefore fall below every magnitude threshold.
inline CwtStack compute_stack(const SampledSignal &x, const SigmaProfile &sp,
                              const ScaleGrid &grid, const WindowModel &wm,
                              const std::vector<std::size_t> &columns = {}) {
    const std::size_t N = x.size();
    if (sp.size() != N) throw std::invalid_argument("compute_stack: sigma profile length mismatch");
    if (grid.size() == 0) throw std::invalid_argument("compute_stack: empty scale grid");
    check_admissible(sp, wm);

    CwtStack st;
    st.sp = sp;
    st.grid = grid;
    st.wm = wm;
    st.fs = x.fs;
    st.t0 = x.t0;
    st.real_mode = x.real_mode;
    const auto J = static_cast<Eigen::Index>(grid.size());
    const auto n = static_cast<Eigen::Index>(N);
    for (CMat *m : {&st.w, &st.w_g1, &st.w_g2, &st.w_g3, &st.w_gp, &st.db_w, &st.da_w,
                    &st.da_w_g1, &st.da_w_g3, &st.dadb_w})
        m->setZero(J, n);

    const auto bins = signal_spectrum(x);
    const detail::StackKernels K;
    const double mu = wm.mu();
    const double tp = 2.0 * pi;

    for (std::size_t c : columns)
        if (c >= N) throw std::invalid_argument("compute_stack: column index out of range");
    const std::size_t count = columns.empty() ? N : columns.size();
    parallel_for(count, [&](std::size_t k) {
        const std::size_t i = columns.empty() ? k : columns[k];
        const double s = sp.sigma[i];
        const double r = sp.dsigma[i] / s;
        // e^{i 2 pi xi_m (b_i - t0)} = e^{i 2 pi m i / N}, reduced mod N for exact phases
        std::vector<cplx> e(bins.size());
        for (std::size_t q = 0; q < bins.size(); ++q) {
            const std::size_t mi = (bins[q].m * i) % N;
            e[q] = bins[q].coef * std::polar(1.0, tp * double(mi) / double(N));
        }
        const auto col = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < J; ++j) {
            const double a = grid.a[static_cast<std::size_t>(j)];
            cplx w = 0, w1 = 0, w2 = 0, w3 = 0, wp = 0, db = 0, da = 0, da1 = 0, da3 = 0, dadb = 0;
            for (std::size_t q = 0; q < bins.size(); ++q) {
                const double xi = bins[q].xi;
                const double u = s * (mu - a * xi);
                const double gh = gauss_hat(u);
                if (gh == 0.0) continue;
                const cplx ev = e[q] * gh;
                const cplx g0 = K.g(u), d1 = K.dg(u), d2 = K.ddg(u);
                const cplx ixi = I * (tp * xi);
                const double du_da = -s * xi;
                w += ev * g0;
                w1 += ev * K.g1(u);
                w2 += ev * K.g2(u);
                w3 += ev * K.g3(u);
                wp += ev * K.gp(u);
                db += ev * (d1 * (r * u) + ixi * g0);
                da += ev * (d1 * du_da);
                da1 += ev * (K.dg1(u) * du_da);
                da3 += ev * (K.dg3(u) * du_da);
                dadb += ev * (du_da * (d2 * (r * u) + d1 * r + ixi * d1));
            }
            st.w(j, col) = w;
            st.w_g1(j, col) = w1;
            st.w_g2(j, col) = w2;
            st.w_g3(j, col) = w3;
            st.w_gp(j, col) = wp;
            st.db_w(j, col) = db;
            st.da_w(j, col) = da;
            st.da_w_g1(j, col) = da1;
            st.da_w_g3(j, col) = da3;
            st.dadb_w(j, col) = dadb;
        }
    });
    return st;
}

// d_b W - [(i 2 pi mu / a - s'/s) W - (s'/s) W^{g3} - W^{g'} / (a s)]
inline CMat lemma0_residual(const CwtStack &st) {
    CMat res(st.w.rows(), st.w.cols());
    const double mu = st.wm.mu();
    for (Eigen::Index i = 0; i < st.w.cols(); ++i) {
        const double s = st.sp.sigma[static_cast<std::size_t>(i)];
        const double r = st.sp.dsigma[static_cast<std::size_t>(i)] / s;
        for (Eigen::Index j = 0; j < st.w.rows(); ++j) {
            const double a = st.grid.a[static_cast<std::size_t>(j)];
            const cplx rhs = (I * (2.0 * pi * mu / a) - r) * st.w(j, i) - r * st.w_g3(j, i) -
                             st.w_gp(j, i) / (a * s);
            res(j, i) = st.db_w(j, i) - rhs;
        }
    }
    return res;
}

} // namespace assq
