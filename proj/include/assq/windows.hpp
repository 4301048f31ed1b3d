#pragma once

#include "assq/quadrature.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace assq {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Gaussian window g and kernels derived from it:
//   G = g, TG = t g, T2G = t^2 g, TGP = t g', GP = g', T2GP = t^2 g', TGPP = t g''.
enum class WindowKind { G, TG, T2G, TGP, GP, T2GP, TGPP };

inline double gauss(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * pi); }

// Fourier transform of g with the convention F(f)(xi) = int f(t) e^{-i 2 pi xi t} dt.
inline double gauss_hat(double xi) { return std::exp(-2.0 * pi * pi * xi * xi); }

inline double window_eval(WindowKind kind, double t) {
    const double g = gauss(t);
    switch (kind) {
    case WindowKind::G: return g;
    case WindowKind::TG: return t * g;
    case WindowKind::T2G: return t * t * g;
    case WindowKind::TGP: return -t * t * g;
    case WindowKind::GP: return -t * g;
    case WindowKind::T2GP: return -t * t * t * g;
    case WindowKind::TGPP: return t * (t * t - 1.0) * g;
    }
    return 0.0;
}

// Polynomial with complex coefficients, c[0] + c[1] x + ... Every kernel
// transform above is such a polynomial times gauss_hat.
struct SpecPoly {
    static constexpr int cap = 8;
    std::array<cplx, cap> c{};

    int degree() const {
        int d = cap - 1;
        while (d > 0 && c[d] == cplx{}) --d;
        return d;
    }

    cplx operator()(double x) const { return eval(x, cap - 1); }

    cplx eval(double x, int deg) const {
        cplx acc = 0.0;
        for (int i = deg; i >= 0; --i) acc = acc * x + c[i];
        return acc;
    }

    // Q ghat -> (Q' - 4 pi^2 x Q) ghat, the derivative of the product.
    SpecPoly derivative() const {
        SpecPoly r;
        for (int i = 1; i < cap; ++i) r.c[i - 1] += double(i) * c[i];
        for (int i = 0; i + 1 < cap; ++i) r.c[i + 1] -= 4.0 * pi * pi * c[i];
        return r;
    }

    SpecPoly operator-() const {
        SpecPoly r;
        for (int i = 0; i < cap; ++i) r.c[i] = -c[i];
        return r;
    }

    SpecPoly operator-(const SpecPoly &o) const {
        SpecPoly r;
        for (int i = 0; i < cap; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
};

// F(t^j g) = P_j ghat with P_{j+1} = (i/2pi)(P_j' - 4 pi^2 xi P_j).
inline SpecPoly moment_poly(int j) {
    SpecPoly p;
    p.c[0] = 1.0;
    for (int s = 0; s < j; ++s) {
        SpecPoly d = p.derivative();
        for (auto &v : d.c) v *= I / (2.0 * pi);
        p = d;
    }
    return p;
}

inline SpecPoly spectral_poly(WindowKind kind) {
    switch (kind) {
    case WindowKind::G: return moment_poly(0);
    case WindowKind::TG: return moment_poly(1);
    case WindowKind::T2G: return moment_poly(2);
    case WindowKind::TGP: return -moment_poly(2);
    case WindowKind::GP: return -moment_poly(1);
    case WindowKind::T2GP: return -moment_poly(3);
    case WindowKind::TGPP: return moment_poly(3) - moment_poly(1);
    }
    return {};
}

inline cplx window_hat_eval(WindowKind kind, double xi) {
    return spectral_poly(kind)(xi) * gauss_hat(xi);
}

// Half-width alpha with |ghat(alpha)| = tau0.
inline double essential_alpha(double tau0) {
    if (!(tau0 > 0.0 && tau0 < 1.0))
        throw std::invalid_argument("essential_alpha: tau0 must lie in (0,1)");
    return std::sqrt(2.0 * std::log(1.0 / tau0)) / (2.0 * pi);
}

// int |t^n h(t)| dt for h = g (base G) or h = g' (base GP).
inline double moment(WindowKind base, int n) {
    if (base != WindowKind::G && base != WindowKind::GP)
        throw std::invalid_argument("moment: base must be G or GP");
    if (n < 0) throw std::invalid_argument("moment: negative order");
    auto f = [&](double t) { return std::abs(std::pow(t, n) * window_eval(base, t)); };
    // even integrand; |.| has a kink at 0 so split there
    return 2.0 * integrate(f, 0.0, 12.0);
}

class WindowModel {
public:
    static constexpr int max_order = 5;

    explicit WindowModel(double mu = 1.0, double tau0 = 1.0 / 20.0) : mu_(mu), tau0_(tau0) {
        if (!(mu > 0.0)) throw std::invalid_argument("WindowModel: mu must be positive");
        alpha_ = essential_alpha(tau0);
        for (int n = 0; n <= max_order; ++n) {
            I_[n] = moment(WindowKind::G, n);
            It_[n] = moment(WindowKind::GP, n);
        }
    }

    double mu() const { return mu_; }
    double tau0() const { return tau0_; }
    double alpha() const { return alpha_; }
    double I(int n) const { return I_.at(n); }
    double Itilde(int n) const { return It_.at(n); }

private:
    double mu_;
    double tau0_;
    double alpha_ = 0.0;
    std::array<double, max_order + 1> I_{};
    std::array<double, max_order + 1> It_{};
};

// lam = 2 pi phi'' a^2 sigma^2
struct ChirpFactor {
    double lam = 0.0;
};

inline ChirpFactor chirp_factor(double phi2, double a, double sigma) {
    return {2.0 * pi * phi2 * a * a * sigma * sigma};
}

// F(e^{i lam t^2 / 2} g)(u) = (1 - i lam)^{-1/2} exp(-2 pi^2 u^2 / (1 - i lam)).
inline cplx chirped_transform_G(double u, ChirpFactor c) {
    const cplx d = 1.0 - I * c.lam;
    return std::exp(-2.0 * pi * pi * u * u / d) / std::sqrt(d);
}

// F(e^{i lam t^2 / 2} t^j g)(xi) = (i/2pi)^j P_j(xi) G(xi) with
// P_0 = 1, P_{j+1} = P_j' - 2 kappa xi P_j, kappa = 2 pi^2 / (1 - i lam).
inline cplx chirped_transform_Gj_at(int j, double xi, ChirpFactor c) {
    const cplx kappa = 2.0 * pi * pi / (1.0 - I * c.lam);
    cplx p;
    switch (j) {
    case 0: p = 1.0; break;
    case 1: p = -2.0 * kappa * xi; break;
    case 2: p = -2.0 * kappa + 4.0 * kappa * kappa * xi * xi; break;
    case 3: p = 12.0 * kappa * kappa * xi - 8.0 * kappa * kappa * kappa * xi * xi * xi; break;
    default: throw std::invalid_argument("chirped_transform_Gj: j must be in 0..3");
    }
    return std::pow(I / (2.0 * pi), j) * p * chirped_transform_G(xi, c);
}

// G_j evaluated at sigma (mu - a phi'); b only enters through phi', phi'', sigma.
inline cplx chirped_transform_Gj(int j, double a, double phi1, double phi2, double sigma,
                                 double mu) {
    if (!(sigma > 0.0)) throw std::invalid_argument("chirped_transform_Gj: sigma must be positive");
    return chirped_transform_Gj_at(j, sigma * (mu - a * phi1), chirp_factor(phi2, a, sigma));
}

} // namespace assq
