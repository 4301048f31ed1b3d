#pragma once

#include "assq/adaptive_cwt.hpp"
#include "assq/dual.hpp"
#include "assq/signal_model.hpp"
#include "assq/windows.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace assq {

enum class ZoneOrder { First, Second };

// Per component k and time index i: scale interval [lower, upper].
struct ZoneSet {
    ZoneOrder order = ZoneOrder::First;
    std::vector<double> b;
    std::vector<std::vector<double>> lower, upper;
    std::vector<bool> separation_ok;
    std::vector<bool> sqrt_clamped; // second order: radicand of u_k was negative somewhere

    std::size_t components() const { return lower.size(); }
    bool contains(std::size_t k, std::size_t i, double a) const {
        return a > lower[k][i] && a < upper[k][i];
    }
};

struct SigmaSelection {
    SigmaProfile profile;
    std::vector<bool> cond1_ok;   // pairwise radicand condition (second order only)
    std::vector<int> active_pair; // k attaining the max, or -1 for the alpha/mu floor
};

struct SeparationReport {
    // rho[l][k][i]; empty diagonal
    std::vector<std::vector<std::vector<double>>> rho;
    std::vector<std::vector<double>> Lk; // [k][i]
    std::vector<bool> cond1_ok, cond2_ok;
    std::vector<double> sigma_lo, sigma_hi; // admissible sigma interval per b
};

namespace detail {

struct Pair2 {
    double lower; // (beta - sqrt(Ups)) / (2 alpha_k), or the first-order value
    double upper;
    bool radicand_ok;
};

template <class T>
struct PairTerms {
    T ak, beta, ups;
};

// alpha_k, beta_k, Upsilon_k (factored form) for the pair (k-1, k).
template <class T>
PairTerms<T> pair_terms(T p0, T p1, T c0, T c1, double alpha, double mu) {
    const T P = p1 * c0 + p0 * c1;
    const T gap = p1 - p0;
    const T csum = c1 + c0;
    PairTerms<T> r;
    r.ak = (2.0 * pi * alpha * mu) * (csum * csum);
    r.beta = P * gap + (4.0 * pi * alpha * alpha) * (c1 * c1 - c0 * c0);
    r.ups = (P * P) * (gap * gap - (16.0 * pi * alpha * alpha) * csum);
    return r;
}

inline double ratio_first(double p0, double p1) { return (p1 + p0) / (p1 - p0); }

inline Pair2 pair_second(double p0, double p1, double c0, double c1, double alpha, double mu) {
    c0 = std::abs(c0);
    c1 = std::abs(c1);
    if (c0 + c1 == 0.0) {
        double v = alpha / mu * ratio_first(p0, p1);
        return {v, std::numeric_limits<double>::infinity(), true};
    }
    auto t = pair_terms(p0, p1, c0, c1, alpha, mu);
    if (t.ups < 0.0) return {t.beta / (2.0 * t.ak), t.beta / (2.0 * t.ak), false};
    const double sq = std::sqrt(t.ups);
    return {(t.beta - sq) / (2.0 * t.ak), (t.beta + sq) / (2.0 * t.ak), true};
}

inline Dual pair_second_dual(Dual p0, Dual p1, Dual c0, Dual c1, double alpha, double mu) {
    c0 = abs(c0);
    c1 = abs(c1);
    if (c0.v + c1.v == 0.0) return (alpha / mu) * ((p1 + p0) / (p1 - p0));
    auto t = pair_terms(p0, p1, c0, c1, alpha, mu);
    if (t.ups.v < 0.0) return t.beta / (2.0 * t.ak);
    return (t.beta - sqrt(t.ups)) / (2.0 * t.ak);
}

// sigma' from dual numbers on the active branch, central differences where the branch switches.
inline void finish_profile(SigmaSelection &sel, const std::vector<double> &dual_d) {
    auto &p = sel.profile;
    const std::size_t n = p.size();
    p.dsigma = dual_d;
    for (std::size_t i = 0; i < n && n > 1; ++i) {
        const bool left = i > 0 && sel.active_pair[i - 1] != sel.active_pair[i];
        const bool right = i + 1 < n && sel.active_pair[i + 1] != sel.active_pair[i];
        if (!left && !right) continue;
        std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == n ? n - 1 : i + 1;
        p.dsigma[i] = (p.sigma[hi] - p.sigma[lo]) / (p.b[hi] - p.b[lo]);
    }
}

} // namespace detail

inline SigmaSelection sigma1(const SignalSpec &spec, const WindowModel &wm) {
    const auto &cs = spec.components;
    if (cs.size() < 2) throw std::invalid_argument("sigma1: needs at least two components");
    const double alpha = wm.alpha(), mu = wm.mu();
    SigmaSelection sel;
    sel.profile.b = spec.times();
    std::vector<double> d;
    for (double t : sel.profile.b) {
        double best = -std::numeric_limits<double>::infinity();
        Dual bestd;
        int arg = -1;
        for (std::size_t k = 1; k < cs.size(); ++k) {
            Dual p0{cs[k - 1].dphase(t), cs[k - 1].d2phase(t)};
            Dual p1{cs[k].dphase(t), cs[k].d2phase(t)};
            Dual v = (alpha / mu) * ((p1 + p0) / (p1 - p0));
            if (v.v > best) {
                best = v.v;
                bestd = v;
                arg = int(k);
            }
        }
        sel.profile.sigma.push_back(best);
        d.push_back(bestd.d);
        sel.active_pair.push_back(arg);
        sel.cond1_ok.push_back(true);
    }
    detail::finish_profile(sel, d);
    return sel;
}

inline SigmaSelection sigma2(const SignalSpec &spec, const WindowModel &wm) {
    const auto &cs = spec.components;
    if (cs.size() < 2) throw std::invalid_argument("sigma2: needs at least two components");
    const double alpha = wm.alpha(), mu = wm.mu();
    SigmaSelection sel;
    sel.profile.b = spec.times();
    std::vector<double> d;
    for (double t : sel.profile.b) {
        double best = alpha / mu;
        double bestd = 0.0;
        int arg = -1;
        bool ok = true;
        for (std::size_t k = 1; k < cs.size(); ++k) {
            const auto &c0 = cs[k - 1], &c1 = cs[k];
            auto pr = detail::pair_second(c0.dphase(t), c1.dphase(t), c0.d2phase(t), c1.d2phase(t),
                                          alpha, mu);
            ok = ok && pr.radicand_ok;
            if (pr.lower > best) {
                Dual v = detail::pair_second_dual({c0.dphase(t), c0.d2phase(t)},
                                                  {c1.dphase(t), c1.d2phase(t)},
                                                  {c0.d2phase(t), c0.d3phase(t)},
                                                  {c1.d2phase(t), c1.d3phase(t)}, alpha, mu);
                best = pr.lower;
                bestd = v.d;
                arg = int(k);
            }
        }
        sel.profile.sigma.push_back(best);
        d.push_back(bestd);
        sel.active_pair.push_back(arg);
        sel.cond1_ok.push_back(ok);
    }
    detail::finish_profile(sel, d);
    return sel;
}

// Second-order zone edges for one component.
inline std::pair<double, double> second_order_edges(double p1, double p2, double sigma,
                                                    const WindowModel &wm, bool *clamped = nullptr) {
    const double alpha = wm.alpha(), mu = wm.mu();
    const double c = std::abs(p2);
    double ru = p1 * p1 - 8.0 * pi * alpha * (alpha + mu * sigma) * c;
    if (ru < 0.0) {
        if (clamped) *clamped = true;
        ru = 0.0;
    }
    const double rl = p1 * p1 + 8.0 * pi * alpha * (mu * sigma - alpha) * c;
    const double u = 2.0 * (mu + alpha / sigma) / (p1 + std::sqrt(ru));
    const double l = 2.0 * (mu - alpha / sigma) / (p1 + std::sqrt(rl));
    return {l, u};
}

inline ZoneSet zones(const SignalSpec &spec, const WindowModel &wm, const SigmaProfile &sp,
                     ZoneOrder order) {
    check_admissible(sp, wm);
    const auto &cs = spec.components;
    const std::size_t K = cs.size(), n = sp.size();
    ZoneSet z;
    z.order = order;
    z.b = sp.b;
    z.lower.assign(K, std::vector<double>(n));
    z.upper.assign(K, std::vector<double>(n));
    z.separation_ok.assign(n, true);
    z.sqrt_clamped.assign(n, false);
    const double alpha = wm.alpha(), mu = wm.mu();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sp.b[i], s = sp.sigma[i];
        for (std::size_t k = 0; k < K; ++k) {
            const double p1 = cs[k].dphase(t);
            if (order == ZoneOrder::First) {
                z.lower[k][i] = (mu - alpha / s) / p1;
                z.upper[k][i] = (mu + alpha / s) / p1;
            } else {
                bool cl = false;
                auto [l, u] = second_order_edges(p1, cs[k].d2phase(t), s, wm, &cl);
                z.lower[k][i] = l;
                z.upper[k][i] = u;
                if (cl) z.sqrt_clamped[i] = true;
            }
        }
        for (std::size_t k = 1; k < K; ++k) {
            // zone k sits below zone k-1 on the scale axis
            const double up = z.upper[k][i], lo = z.lower[k - 1][i];
            if (up > lo * (1.0 + 1e-12)) z.separation_ok[i] = false;
        }
        if (z.sqrt_clamped[i]) z.separation_ok[i] = false;
    }
    return z;
}

// rho_{l,k} for l != k per the two-sided definition.
inline double rho_value(std::size_t l, std::size_t k, double pl, double pk, double sigma,
                        const WindowModel &wm) {
    const double sm = sigma * wm.mu();
    if (l < k) return sm - (sm + wm.alpha()) * pl / pk;
    return (sm - wm.alpha()) * pl / pk - sm;
}

inline SeparationReport separation_report(const SignalSpec &spec, const WindowModel &wm,
                                          const SigmaProfile &sp) {
    const auto &cs = spec.components;
    const std::size_t K = cs.size(), n = sp.size();
    const double alpha = wm.alpha(), mu = wm.mu();
    SeparationReport r;
    r.rho.assign(K, std::vector<std::vector<double>>(K));
    r.Lk.assign(K, std::vector<double>(n, std::numeric_limits<double>::infinity()));
    r.cond1_ok.assign(n, true);
    r.cond2_ok.assign(n, true);
    r.sigma_lo.assign(n, alpha / mu);
    r.sigma_hi.assign(n, std::numeric_limits<double>::infinity());
    for (std::size_t l = 0; l < K; ++l)
        for (std::size_t k = 0; k < K; ++k)
            if (l != k) r.rho[l][k].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sp.b[i], s = sp.sigma[i];
        for (std::size_t l = 0; l < K; ++l)
            for (std::size_t k = 0; k < K; ++k)
                if (l != k) r.rho[l][k][i] = rho_value(l, k, cs[l].dphase(t), cs[k].dphase(t), s, wm);
        for (std::size_t k = 0; k < K; ++k) {
            double L = std::numeric_limits<double>::infinity();
            if (k > 0) L = std::min(L, cs[k].dphase(t) - cs[k - 1].dphase(t));
            if (k + 1 < K) L = std::min(L, cs[k + 1].dphase(t) - cs[k].dphase(t));
            r.Lk[k][i] = L;
        }
        for (std::size_t k = 1; k < K; ++k) {
            const double p0 = cs[k - 1].dphase(t), p1 = cs[k].dphase(t);
            const double c0 = std::abs(cs[k - 1].d2phase(t)), c1 = std::abs(cs[k].d2phase(t));
            if (4.0 * alpha * std::sqrt(pi) * std::sqrt(c0 + c1) > p1 - p0) r.cond1_ok[i] = false;
            auto pr = detail::pair_second(p0, p1, c0, c1, alpha, mu);
            r.sigma_lo[i] = std::max(r.sigma_lo[i], pr.lower);
            r.sigma_hi[i] = std::min(r.sigma_hi[i], pr.upper);
        }
        r.cond2_ok[i] = r.sigma_lo[i] <= r.sigma_hi[i];
    }
    return r;
}

// Scale grid spanning every zone interval, widened by the factor pad on both ends.
inline ScaleGrid zone_grid(const ZoneSet &z, double pad = 1.5, int voices_per_octave = 32) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k < z.components(); ++k)
        for (std::size_t i = 0; i < z.b.size(); ++i) {
            lo = std::min(lo, z.lower[k][i]);
            hi = std::max(hi, z.upper[k][i]);
        }
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("zone_grid: degenerate zones");
    return make_scale_grid(lo / pad, hi * pad, voices_per_octave);
}

} // namespace assq
