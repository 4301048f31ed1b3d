#pragma once

#include "assq/adaptive_cwt.hpp"
#include "assq/phase_sst.hpp"
#include "assq/quadrature.hpp"
#include "assq/separation.hpp"
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

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// In real mode only the positive-frequency half is analysed, so every bound is
// computed for the analytic model (amplitudes halved) and recovery bounds are
// doubled to cover 2 Re(.).
inline double analytic_scale(const SignalSpec &spec) { return spec.real_mode ? 0.5 : 1.0; }

// Component k of the analysed model at time t.
inline cplx analytic_component(const SignalSpec &spec, std::size_t k, double t) {
    const auto &c = spec.components[k];
    return std::polar(analytic_scale(spec) * c.amp(t), 2.0 * pi * c.phase(t));
}

// ---------------------------------------------------------------- normalizers

inline double c_alpha_value(double sigma, const WindowModel &wm) {
    const double mu = wm.mu(), h = wm.alpha() / sigma;
    if (!(mu - h > 0.0)) throw AdmissibilityError("c_alpha: sigma must exceed alpha/mu");
    return integrate([&](double xi) { return gauss_hat(sigma * (mu - xi)) / xi; }, mu - h, mu + h);
}

inline cplx c_k_value(double lo, double hi, double p1, double p2, double sigma,
                      const WindowModel &wm) {
    const double mu = wm.mu();
    auto f = [&](double a) {
        return chirped_transform_G(sigma * (mu - a * p1), chirp_factor(p2, a, sigma)) / a;
    };
    return integrate(f, lo, hi);
}

// Classical normalizer restricted to the band where |ghat| > 1e-16; the full
// integral diverges at xi -> 0 for a Gaussian. NaN if the band reaches xi <= 0.
inline double c_const_value(double sigma, const WindowModel &wm) {
    const double mu = wm.mu(), h = essential_alpha(1e-16) / sigma;
    if (!(mu - h > 0.0)) return nan_value;
    return integrate([&](double xi) { return gauss_hat(sigma * (xi - mu)) / xi; }, mu - h, mu + h);
}

struct Normalizers {
    std::vector<double> c_alpha;             // [i]
    std::vector<std::vector<cplx>> c_k;      // [k][i]
    std::vector<double> c_const;             // [i]
};

inline Normalizers normalizers(const SignalSpec &spec, const WindowModel &wm,
                               const SigmaProfile &sp, const ZoneSet &z) {
    check_admissible(sp, wm);
    Normalizers nz;
    const std::size_t n = sp.size(), K = spec.components.size();
    nz.c_alpha.resize(n);
    nz.c_const.resize(n);
    nz.c_k.assign(K, std::vector<cplx>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sp.sigma[i], t = sp.b[i];
        nz.c_alpha[i] = c_alpha_value(s, wm);
        nz.c_const[i] = c_const_value(s, wm);
        for (std::size_t k = 0; k < K; ++k) {
            const auto &c = spec.components[k];
            nz.c_k[k][i] = c_k_value(z.lower[k][i], z.upper[k][i], c.dphase(t), c.d2phase(t), s, wm);
        }
    }
    return nz;
}

// ---------------------------------------------------------------- recovery

enum class RecoveryMode { FirstOrder, SecondT, SecondS };

struct RecoveryResult {
    std::vector<cplx> estimate;
    std::vector<double> abs_error; // empty unless truth is attached
    std::vector<double> window;
    std::vector<bool> empty_window;
    RecoveryMode mode = RecoveryMode::FirstOrder;
};

// (1/c) sum_{|xi_m - ridge| < eps3} T dxi; real mode returns 2 Re(.).
// A window holding no bin yields NaN and is flagged.
inline RecoveryResult recover(const TfPlane &tf, const std::vector<cplx> &c,
                              const std::vector<double> &ridge, const std::vector<double> &eps3,
                              RecoveryMode mode, bool real_mode) {
    const auto n = static_cast<std::size_t>(tf.values.cols());
    if (c.size() != n || ridge.size() != n || eps3.size() != n)
        throw std::invalid_argument("recover: per-time inputs must match the plane width");
    const auto &cfg = tf.config;
    RecoveryResult r;
    r.mode = mode;
    r.estimate.resize(n);
    r.window = eps3;
    r.empty_window.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = 0.0;
        bool any = false;
        for (std::size_t m = 0; m < cfg.n_xi; ++m) {
            if (std::abs(cfg.xi(m) - ridge[i]) < eps3[i]) {
                acc += tf.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) * cfg.dxi;
                any = true;
            }
        }
        if (!any) {
            r.empty_window[i] = true;
            r.estimate[i] = {nan_value, nan_value};
            continue;
        }
        cplx est = acc / c[i];
        r.estimate[i] = real_mode ? cplx{2.0 * est.real(), 0.0} : est;
    }
    return r;
}

inline void attach_truth(RecoveryResult &r, const SignalSpec &spec, std::size_t k) {
    r.abs_error.resize(r.estimate.size());
    for (std::size_t i = 0; i < r.estimate.size(); ++i)
        r.abs_error[i] = std::abs(r.estimate[i] -
                                  component_value(spec.components[k], spec.time(i), spec.real_mode));
}

inline std::vector<cplx> to_complex(const std::vector<double> &v) {
    return {v.begin(), v.end()};
}

// eps3 = L_k / 2 per time.
inline std::vector<double> default_eps3(const SeparationReport &rep, std::size_t k) {
    std::vector<double> e(rep.Lk[k]);
    for (double &v : e) v *= 0.5;
    return e;
}

inline std::vector<double> ridge_truth(const SignalSpec &spec, std::size_t k) {
    std::vector<double> r(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) r[i] = spec.components[k].dphase(spec.time(i));
    return r;
}

// Demo-only ridge tracker, not part of the theory: dynamic programming over
// bins maximising sum |T| / max|T| minus penalty * |jump in Hz|. Successive
// ridges exclude a band of +-exclusion Hz around earlier ones.
inline std::vector<std::vector<double>> extract_ridges(const TfPlane &tf, std::size_t count,
                                                       double penalty_per_hz = -1.0,
                                                       double exclusion_hz = -1.0) {
    const auto &cfg = tf.config;
    if (penalty_per_hz < 0.0) penalty_per_hz = 0.2 * cfg.dxi;
    if (exclusion_hz < 0.0) exclusion_hz = 3.0 * cfg.dxi;
    const auto M = static_cast<std::size_t>(tf.values.rows());
    const auto n = static_cast<std::size_t>(tf.values.cols());
    Eigen::ArrayXXd e = tf.values.array().abs();
    const double mx = e.maxCoeff();
    if (mx > 0.0) e /= mx;
    std::vector<std::vector<double>> ridges;
    for (std::size_t r = 0; r < count && n > 0 && M > 0; ++r) {
        std::vector<double> score(M), next(M);
        std::vector<std::vector<std::size_t>> from(n, std::vector<std::size_t>(M, 0));
        for (std::size_t m = 0; m < M; ++m) score[m] = e(Eigen::Index(m), 0);
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t m = 0; m < M; ++m) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t p = 0; p < M; ++p) {
                    double v = score[p] - penalty_per_hz * cfg.dxi * std::abs(double(m) - double(p));
                    if (v > best) {
                        best = v;
                        arg = p;
                    }
                }
                next[m] = best + e(Eigen::Index(m), Eigen::Index(i));
                from[i][m] = arg;
            }
            score.swap(next);
        }
        std::size_t m = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
        std::vector<double> ridge(n);
        for (std::size_t i = n; i-- > 0;) {
            ridge[i] = cfg.xi(m);
            if (i > 0) m = from[i][m];
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t q = 0; q < M; ++q)
                if (std::abs(cfg.xi(q) - ridge[i]) <= exclusion_hz) e(Eigen::Index(q), Eigen::Index(i)) = 0.0;
        ridges.push_back(std::move(ridge));
    }
    std::sort(ridges.begin(), ridges.end(),
              [](const auto &x, const auto &y) { return x[x.size() / 2] < y[y.size() / 2]; });
    return ridges;
}

// ---------------------------------------------------------------- first-order bounds

struct FirstOrderBounds {
    std::vector<std::vector<double>> Lambda, Lambda_t; // [k][i]
    std::vector<std::vector<double>> bd;               // IF bound
    std::vector<std::vector<double>> bd_tilde;         // recovery bound (doubled in real mode)
    std::vector<std::vector<std::vector<double>>> m;   // m[l][k][i], empty diagonal
    std::vector<double> c_alpha;
    double eps_tilde1 = 0.0;
};

inline double m_lk_value(double pl, double pk, double sigma, const WindowModel &wm) {
    const double mu = wm.mu(), h = wm.alpha() / sigma;
    return integrate([&](double xi) { return gauss_hat(sigma * (mu - pl / pk * xi)) / xi; }, mu - h,
                     mu + h);
}

inline FirstOrderBounds bounds_first(const SignalSpec &spec, const WindowModel &wm,
                                     const SigmaProfile &sp, double eps_tilde1) {
    if (!(eps_tilde1 > 0.0)) throw std::invalid_argument("bounds_first: eps_tilde1 must be positive");
    check_admissible(sp, wm);
    const auto cp = class_params(spec);
    const double h = analytic_scale(spec);
    const double eps1 = h * cp.eps1, eps2 = cp.eps2;
    const auto &cs = spec.components;
    const std::size_t K = cs.size(), n = sp.size();
    const double alpha = wm.alpha(), mu = wm.mu();
    FirstOrderBounds B;
    B.eps_tilde1 = eps_tilde1;
    for (auto *v : {&B.Lambda, &B.Lambda_t, &B.bd, &B.bd_tilde}) v->assign(K, std::vector<double>(n));
    B.m.assign(K, std::vector<std::vector<double>>(K));
    for (std::size_t l = 0; l < K; ++l)
        for (std::size_t k = 0; k < K; ++k)
            if (l != k) B.m[l][k].resize(n);
    B.c_alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sp.b[i], s = sp.sigma[i];
        double Asum = 0.0;
        for (const auto &c : cs) Asum += h * c.amp(t);
        const double ca = c_alpha_value(s, wm);
        B.c_alpha[i] = ca;
        const double lnr = std::log((mu * s + alpha) / (mu * s - alpha));
        for (std::size_t k = 0; k < K; ++k) {
            const double pk = cs[k].dphase(t);
            const double span = (mu * s + alpha) / pk;
            const double Lam = double(K) * eps1 * wm.I(1) + pi * eps2 * wm.I(2) * span * Asum;
            const double Lamt =
                double(K) * eps1 * wm.Itilde(1) + pi * eps2 * wm.Itilde(2) * span * Asum;
            double cross = 0.0, msum = 0.0;
            for (std::size_t l = 0; l < K; ++l) {
                if (l == k) continue;
                const double pl = cs[l].dphase(t), Al = h * cs[l].amp(t);
                const double rho = rho_value(l, k, pl, pk, s, wm);
                cross += Al * std::abs(pl - pk) * gauss_hat(rho);
                const double mlk = m_lk_value(pl, pk, s, wm);
                B.m[l][k][i] = mlk;
                msum += Al * mlk;
            }
            B.Lambda[k][i] = Lam;
            B.Lambda_t[k][i] = Lamt;
            B.bd[k][i] = (alpha * Lam + Lamt / (2.0 * pi)) / eps_tilde1 + cross / eps_tilde1;
            B.bd_tilde[k][i] =
                (eps_tilde1 * lnr + 2.0 * alpha / pk * Lam + msum) / std::abs(ca) / h;
        }
    }
    return B;
}

// ---------------------------------------------------------------- second-order bounds

struct SecondOrderBounds {
    // envelopes at the top of the zone a = u_k, where they are largest
    std::vector<std::vector<double>> Pi0, Pi1, Pi2, Pit0, Pit1;
    std::vector<std::vector<std::vector<double>>> M; // M[l][k][i]
    std::vector<std::vector<double>> Bd_p, Bd_pp;    // Bd~' and Bd~''
    std::vector<std::vector<double>> U_measure;      // Lebesgue measure of U_b
    std::vector<std::vector<double>> U_log_measure;  // same set in da/a
    std::vector<std::vector<cplx>> c_k;
    std::vector<std::vector<double>> bound_S; // Bd~'/|c_k| (doubled in real mode)
    std::vector<std::vector<double>> bound_T; // (Bd~' + Bd~'')/|c_k| (doubled in real mode)
    double eps_tilde1 = 0.0, eps_tilde2 = 0.0;
};

inline double M_lk_value(double lo, double hi, double pl, double p2l, double sigma,
                         const WindowModel &wm) {
    const double mu = wm.mu();
    return integrate(
        [&](double a) {
            return std::abs(chirped_transform_G(sigma * (mu - a * pl), chirp_factor(p2l, a, sigma))) / a;
        },
        lo, hi);
}

// z must be the second-order zones; stack may be null, in which case |U_b| = 0.
inline SecondOrderBounds bounds_second(const SignalSpec &spec, const WindowModel &wm,
                                       const SigmaProfile &sp, const ZoneSet &z, double eps_tilde1,
                                       double eps_tilde2, const CwtStack *stack) {
    if (!(eps_tilde1 > 0.0) || !(eps_tilde2 > 0.0))
        throw std::invalid_argument("bounds_second: thresholds must be positive");
    check_admissible(sp, wm);
    const auto cp = class_params(spec);
    const double h = analytic_scale(spec);
    const double eps1 = h * cp.eps1, eps3 = cp.eps3;
    const auto &cs = spec.components;
    const std::size_t K = cs.size(), n = sp.size();
    SecondOrderBounds B;
    B.eps_tilde1 = eps_tilde1;
    B.eps_tilde2 = eps_tilde2;
    for (auto *v : {&B.Pi0, &B.Pi1, &B.Pi2, &B.Pit0, &B.Pit1, &B.Bd_p, &B.Bd_pp, &B.U_measure,
                    &B.U_log_measure, &B.bound_S, &B.bound_T})
        v->assign(K, std::vector<double>(n));
    B.c_k.assign(K, std::vector<cplx>(n));
    B.M.assign(K, std::vector<std::vector<double>>(K));
    for (std::size_t l = 0; l < K; ++l)
        for (std::size_t k = 0; k < K; ++k)
            if (l != k) B.M[l][k].resize(n);
    RMat q;
    if (stack) q = g2_magnitude(*stack, eps_tilde1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sp.b[i], s = sp.sigma[i];
        double Asum = 0.0;
        for (const auto &c : cs) Asum += h * c.amp(t);
        for (std::size_t k = 0; k < K; ++k) {
            const double lo = z.lower[k][i], hi = z.upper[k][i];
            const double a2s2 = hi * hi * s * s;
            auto env = [&](double In, double In2) {
                return double(K) * eps1 * In + pi / 3.0 * eps3 * In2 * a2s2 * Asum;
            };
            B.Pi0[k][i] = env(wm.I(1), wm.I(3));
            B.Pi1[k][i] = env(wm.I(2), wm.I(4));
            B.Pi2[k][i] = env(wm.I(3), wm.I(5));
            B.Pit0[k][i] = env(wm.Itilde(1), wm.Itilde(3));
            B.Pit1[k][i] = env(wm.Itilde(2), wm.Itilde(4));

            double msum = 0.0;
            for (std::size_t l = 0; l < K; ++l) {
                if (l == k) continue;
                const double Ml = M_lk_value(lo, hi, cs[l].dphase(t), cs[l].d2phase(t), s, wm);
                B.M[l][k][i] = Ml;
                msum += h * cs[l].amp(t) * Ml;
            }
            const double w = hi - lo;
            const double common = s * double(K) * eps1 * wm.I(1) * w +
                                  pi / 9.0 * eps3 * wm.I(3) * w * w * w * s * s * s * Asum + msum;

            double U = 0.0, Ulog = 0.0;
            if (stack) {
                const auto col = static_cast<Eigen::Index>(i);
                for (std::size_t j = 0; j < stack->grid.size(); ++j) {
                    const double a = stack->grid.a[j];
                    if (!(a > lo && a < hi)) continue;
                    const double qv = q(Eigen::Index(j), col);
                    if (std::isnan(qv) || qv > eps_tilde2) continue;
                    U += a * stack->grid.dlog;
                    Ulog += stack->grid.dlog;
                }
            }
            B.U_measure[k][i] = U;
            B.U_log_measure[k][i] = Ulog;
            B.Bd_p[k][i] = eps_tilde1 * std::log(hi / lo) + common;
            B.Bd_pp[k][i] = h * cs[k].amp(t) / lo * U + common; // ||g||_1 = 1
            const cplx ck = c_k_value(lo, hi, cs[k].dphase(t), cs[k].d2phase(t), s, wm);
            B.c_k[k][i] = ck;
            B.bound_S[k][i] = B.Bd_p[k][i] / std::abs(ck) / h;
            B.bound_T[k][i] = (B.Bd_p[k][i] + B.Bd_pp[k][i]) / std::abs(ck) / h;
        }
    }
    return B;
}

// ---------------------------------------------------------------- residual diagnostics

struct ResidualDiag {
    // per component k, J x n lattices
    std::vector<CMat> res1, res2, res3;
    std::vector<CMat> B, D, E, F;
    std::vector<CMat> res1_struct, res2_struct, res3_struct;
    std::vector<BMat> in_zone; // (a, b) in O_k
};

inline ResidualDiag residual_diagnostics(const CwtStack &st, const SignalSpec &spec,
                                         const ZoneSet &z) {
    const auto &cs = spec.components;
    const std::size_t K = cs.size();
    const auto J = st.w.rows(), n = st.w.cols();
    const double mu = st.wm.mu();
    ResidualDiag d;
    for (auto *v : {&d.res1, &d.res2, &d.res3, &d.B, &d.D, &d.E, &d.F, &d.res1_struct,
                    &d.res2_struct, &d.res3_struct})
        v->assign(K, CMat::Zero(J, n));
    d.in_zone.assign(K, BMat::Constant(J, n, false));
    const cplx tpi = I * (2.0 * pi);
    const double fpp = 4.0 * pi * pi;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t ii = std::size_t(i);
        const double t = st.sp.b[ii], s = st.sp.sigma[ii], r = st.sp.dsigma[ii] / s;
        std::vector<double> p1(K), p2(K);
        std::vector<cplx> xv(K);
        for (std::size_t k = 0; k < K; ++k) {
            p1[k] = cs[k].dphase(t);
            p2[k] = cs[k].d2phase(t);
            xv[k] = analytic_component(spec, k, t);
        }
        for (Eigen::Index j = 0; j < J; ++j) {
            const double a = st.grid.a[std::size_t(j)];
            const cplx w = st.w(j, i), w1 = st.w_g1(j, i), w3 = st.w_g3(j, i);
            const cplx db = st.db_w(j, i), da = st.da_w(j, i), da1 = st.da_w_g1(j, i),
                       da3 = st.da_w_g3(j, i), dadb = st.dadb_w(j, i);
            std::vector<std::array<cplx, 4>> G(K);
            for (std::size_t l = 0; l < K; ++l)
                for (int q = 0; q < 4; ++q) G[l][q] = chirped_transform_Gj(q, a, p1[l], p2[l], s, mu);
            const cplx denom3 = w * w1 + a * w * da1 - a * w1 * da;
            for (std::size_t k = 0; k < K; ++k) {
                const cplx r1 = db - ((tpi * p1[k] - r) * w + tpi * (p2[k] * a * s) * w1 - r * w3);
                const cplx r2 = dadb - ((tpi * p1[k] - r) * da + tpi * (p2[k] * s) * (w1 + a * da1) -
                                        r * da3);
                const cplx qd = w1 / w + a * (da1 * w - w1 * da) / (w * w);
                const cplx R0 = ((dadb * w - db * da) / (w * w) + r * (da3 * w - w3 * da) / (w * w)) / qd;
                d.res1[k](j, i) = r1;
                d.res2[k](j, i) = r2;
                d.res3[k](j, i) = R0 - tpi * (s * p2[k]);

                cplx Bk = 0, Dk = 0, Ek = 0, Fk = 0;
                for (std::size_t l = 0; l < K; ++l) {
                    if (l == k) continue;
                    const double df = p1[l] - p1[k], dc = p2[l] - p2[k];
                    Bk += xv[l] * df * G[l][0];
                    Dk += xv[l] * dc * G[l][1];
                    Ek += xv[l] * df * (p1[l] * G[l][1] + p2[l] * a * s * G[l][2]);
                    Fk += xv[l] * dc * (p1[l] * G[l][2] + p2[l] * a * s * G[l][3]);
                }
                d.B[k](j, i) = Bk;
                d.D[k](j, i) = Dk;
                d.E[k](j, i) = Ek;
                d.F[k](j, i) = Fk;
                const cplx s1 = tpi * Bk + tpi * (a * s) * Dk;
                const cplx s2 = -fpp * s * Ek + tpi * s * Dk - fpp * a * s * s * Fk;
                d.res1_struct[k](j, i) = s1;
                d.res2_struct[k](j, i) = s2;
                d.res3_struct[k](j, i) = (w * s2 - da * s1) / denom3;
                d.in_zone[k](j, i) = z.contains(k, ii, a);
            }
        }
    }
    return d;
}

// Central differences in a of res1 across the geometric grid, compared with res2.
// Returns max |d_a res1 - res2| / max |res2| over masked interior rows.
inline double scale_derivative_consistency(const CwtStack &st, const CMat &res1, const CMat &res2,
                                 const BMat &mask) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < res1.cols(); ++i)
        for (Eigen::Index j = 1; j + 1 < res1.rows(); ++j) {
            if (!mask(j, i)) continue;
            const double am = st.grid.a[std::size_t(j - 1)], ap = st.grid.a[std::size_t(j + 1)];
            const cplx fd = (res1(j + 1, i) - res1(j - 1, i)) / (ap - am);
            num = std::max(num, std::abs(fd - res2(j, i)));
            den = std::max(den, std::abs(res2(j, i)));
        }
    return den > 0.0 ? num / den : num;
}

} // namespace assq
