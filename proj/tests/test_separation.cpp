#include "assq/separation.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace assq;

namespace {

SignalSpec spec_of(std::vector<ComponentTruth> cs) {
    SignalSpec s;
    s.components = std::move(cs);
    return s;
}

// Second-order zone edges written out independently of the library.
double edge_upper(double p1, double p2, double s, double al) {
    return 2.0 * (1.0 + al / s) / (p1 + std::sqrt(p1 * p1 - 8.0 * oracle::pi * al * (al + s) * std::abs(p2)));
}
double edge_lower(double p1, double p2, double s, double al) {
    return 2.0 * (1.0 - al / s) / (p1 + std::sqrt(p1 * p1 + 8.0 * oracle::pi * al * (s - al) * std::abs(p2)));
}

} // namespace

TEST(Sigma1, ExampleOneAtStart) {
    const WindowModel wm;
    const auto sel = sigma1(example1_spec(), wm);
    EXPECT_NEAR(sel.profile.sigma[0], 1.057407, 1e-6);
    EXPECT_NEAR(sel.profile.sigma[0], wm.alpha() * 38.0 / 14.0, 1e-12);
    EXPECT_EQ(sel.active_pair[0], 1);
}

TEST(Sigma1, TwoTonesAndScaleInvariance) {
    const WindowModel wm;
    const auto a = sigma1(spec_of({tone(1, 10), tone(1, 30)}), wm);
    const auto b = sigma1(spec_of({tone(1, 30), tone(1, 90)}), wm);
    for (std::size_t i = 0; i < a.profile.size(); i += 17) {
        EXPECT_NEAR(a.profile.sigma[i], 2.0 * wm.alpha(), 1e-12);
        EXPECT_NEAR(b.profile.sigma[i], a.profile.sigma[i], 1e-12);
        EXPECT_EQ(a.profile.dsigma[i], 0.0);
    }
    EXPECT_THROW(sigma1(spec_of({tone(1, 10)}), wm), std::invalid_argument);
}

TEST(Sigma1, DerivativeMatchesDifferences) {
    const WindowModel wm;
    const auto sel = sigma1(example1_spec(), wm);
    const auto &p = sel.profile;
    for (std::size_t i = 5; i + 5 < p.size(); i += 10) {
        const double fd = (p.sigma[i + 1] - p.sigma[i - 1]) / (p.b[i + 1] - p.b[i - 1]);
        EXPECT_NEAR(p.dsigma[i], fd, 1e-6);
    }
}

TEST(Sigma2, NoCurvatureFallsBackToSigma1) {
    const WindowModel wm;
    const auto s = spec_of({tone(1, 12), tone(1, 30), tone(1, 41)});
    const auto a = sigma1(s, wm), b = sigma2(s, wm);
    for (std::size_t i = 0; i < s.n; i += 13) EXPECT_NEAR(a.profile.sigma[i], b.profile.sigma[i], 1e-12);
}

TEST(Sigma2, ExampleTwoMatchesBisection) {
    const WindowModel wm;
    const auto spec = example2_spec();
    const auto sel = sigma2(spec, wm);
    const double al = wm.alpha();
    for (std::size_t i : {0u, 77u, 128u, 255u}) {
        const double t = spec.time(i);
        const auto &c0 = spec.components[0], &c1 = spec.components[1];
        // upper edge of the faster component meets the lower edge of the slower one
        const double root = oracle::bisect(
            [&](double s) {
                return edge_upper(c1.dphase(t), c1.d2phase(t), s, al) - edge_lower(c0.dphase(t), c0.d2phase(t), s, al);
            },
            1.01 * al, 20.0);
        EXPECT_NEAR(sel.profile.sigma[i], root, 1e-9 * root) << "t " << t;
        EXPECT_TRUE(sel.cond1_ok[i]);
    }
}

TEST(Sigma2, NegativeRadicandIsFlagged) {
    const WindowModel wm;
    // gap 5 Hz against |phi''| = 50 + 50 leaves Upsilon < 0
    const auto sel = sigma2(spec_of({linear_chirp(1, 20, 50), linear_chirp(1, 25, 50)}), wm);
    EXPECT_FALSE(sel.cond1_ok[0]);
    const auto rep = separation_report(spec_of({linear_chirp(1, 20, 50), linear_chirp(1, 25, 50)}), wm,
                                       constant_sigma(SignalSpec{}.times(), 1.0));
    EXPECT_FALSE(rep.cond1_ok[0]);
}

TEST(Sigma2, DerivativeMatchesDifferences) {
    const WindowModel wm;
    const double h = 1e-5;
    for (double t : {0.1, 0.37, 0.5, 0.83}) {
        // three samples at t - h, t, t + h
        auto spec = example2_spec();
        spec.fs = 1.0 / h;
        spec.n = 3;
        spec.t0 = t - h;
        const auto p = sigma2(spec, wm).profile;
        const double fd = (p.sigma[2] - p.sigma[0]) / (2 * h);
        EXPECT_NEAR(p.dsigma[1], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "t " << t;
    }
}

TEST(Zones, ToneFirstOrder) {
    const WindowModel wm;
    const auto s = spec_of({tone(1, 40)});
    const auto z = zones(s, wm, constant_sigma(s.times(), 1.0), ZoneOrder::First);
    EXPECT_NEAR(z.lower[0][3], (1 - wm.alpha()) / 40, 1e-15);
    EXPECT_NEAR(z.upper[0][3], (1 + wm.alpha()) / 40, 1e-15);
    EXPECT_TRUE(z.contains(0, 3, 1.0 / 40));
    EXPECT_FALSE(z.contains(0, 3, 2.0 / 40));
}

TEST(Zones, SecondOrderWithoutCurvatureCollapses) {
    const WindowModel wm;
    const auto s = spec_of({tone(1, 10), tone(1, 30)});
    const auto sp = constant_sigma(s.times(), 1.3);
    const auto z1 = zones(s, wm, sp, ZoneOrder::First), z2 = zones(s, wm, sp, ZoneOrder::Second);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_NEAR(z1.lower[k][9], z2.lower[k][9], 1e-15);
        EXPECT_NEAR(z1.upper[k][9], z2.upper[k][9], 1e-15);
    }
}

TEST(Zones, ChirpEdgesAgainstIndependentFormula) {
    const WindowModel wm;
    const auto s = spec_of({linear_chirp(1, 20, 18)});
    const auto z = zones(s, wm, constant_sigma(s.times(), 1.2), ZoneOrder::Second);
    for (std::size_t i : {0u, 100u, 255u}) {
        const double t = s.time(i);
        EXPECT_NEAR(z.upper[0][i], edge_upper(20 + 18 * t, 18, 1.2, wm.alpha()), 1e-14);
        EXPECT_NEAR(z.lower[0][i], edge_lower(20 + 18 * t, 18, 1.2, wm.alpha()), 1e-14);
        EXPECT_LT(z.lower[0][i], 1.0 / (20 + 18 * t));
        EXPECT_GT(z.upper[0][i], 1.0 / (20 + 18 * t));
    }
}

TEST(Zones, ExampleOneSigma1Disjoint) {
    const WindowModel wm;
    const auto spec = example1_spec();
    const auto z = zones(spec, wm, sigma1(spec, wm).profile, ZoneOrder::First);
    for (std::size_t i = 0; i < spec.n; ++i) {
        EXPECT_TRUE(z.separation_ok[i]);
        EXPECT_LE(z.upper[1][i], z.lower[0][i] * (1 + 1e-12));
    }
}

TEST(Zones, ExampleTwoSigma2Disjoint) {
    const WindowModel wm;
    const auto spec = example2_spec();
    const auto z = zones(spec, wm, sigma2(spec, wm).profile, ZoneOrder::Second);
    for (std::size_t i = 0; i < spec.n; ++i) {
        EXPECT_TRUE(z.separation_ok[i]);
        EXPECT_FALSE(z.sqrt_clamped[i]);
        EXPECT_LE(z.upper[1][i], z.lower[0][i] * (1 + 1e-12));
    }
}

TEST(Zones, SmallSigmaOverlaps) {
    const WindowModel wm;
    const auto spec = example1_spec();
    const auto z = zones(spec, wm, constant_sigma(spec.times(), 0.5), ZoneOrder::First);
    EXPECT_FALSE(z.separation_ok[0]);
    EXPECT_THROW(zones(spec, wm, constant_sigma(spec.times(), 0.3), ZoneOrder::First), AdmissibilityError);
}

TEST(Rho, ExampleOneAtLeastAlpha) {
    const WindowModel wm;
    const auto spec = example1_spec();
    const auto sp = sigma1(spec, wm).profile;
    const auto r = separation_report(spec, wm, sp);
    for (std::size_t i = 0; i < spec.n; ++i) {
        EXPECT_GE(r.rho[0][1][i], wm.alpha() * (1 - 1e-12));
        EXPECT_GE(r.rho[1][0][i], wm.alpha() * (1 - 1e-12));
    }
    EXPECT_NEAR(r.Lk[0][128], 13.5, 1e-12);
    EXPECT_NEAR(r.Lk[1][128], 13.5, 1e-12);
}

TEST(Rho, IsTheSmallestWindowArgumentOverTheZone) {
    // rho_{l,k} = min over a in zone k of sigma |mu - a phi_l'|
    const WindowModel wm;
    const double al = wm.alpha();
    oracle::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const double f0 = rng.uniform(5, 30), f1 = f0 + rng.uniform(5, 40), s = rng.uniform(0.5, 3.0);
        const double p[2] = {f0, f1};
        for (std::size_t l = 0; l < 2; ++l) {
            const std::size_t k = 1 - l;
            const double lo = (1 - al / s) / p[k], hi = (1 + al / s) / p[k];
            double best = 1e300;
            for (int m = 0; m <= 20000; ++m) {
                const double a = lo + (hi - lo) * m / 20000.0;
                best = std::min(best, s * std::abs(1 - a * p[l]));
            }
            const double rho = rho_value(l, k, p[l], p[k], s, wm);
            if (rho > 0) {
                EXPECT_NEAR(rho, best, 1e-3 * (hi - lo) * s * p[l]);
            }
        }
    }
}

TEST(Rho, SeparationIsRhoAboveAlpha) {
    const WindowModel wm;
    oracle::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double f0 = rng.uniform(5, 30), f1 = f0 + rng.uniform(1, 40), s = rng.uniform(0.4, 3.0);
        const auto spec = spec_of({tone(1, f0), tone(1, f1)});
        const auto sp = constant_sigma({0.0}, s);
        const auto z = zones(spec, wm, sp, ZoneOrder::First);
        const double rho = rho_value(0, 1, f0, f1, s, wm);
        EXPECT_EQ(z.separation_ok[0], rho >= wm.alpha() * (1 - 1e-12)) << f0 << " " << f1 << " " << s;
    }
}

TEST(SeparationReport, SingleComponentHasInfiniteGap) {
    const WindowModel wm;
    const auto s = spec_of({tone(1, 40)});
    const auto r = separation_report(s, wm, constant_sigma(s.times(), 1.0));
    EXPECT_TRUE(std::isinf(r.Lk[0][0]));
    EXPECT_TRUE(r.cond1_ok[0] && r.cond2_ok[0]);
}

TEST(SeparationReport, AdmissibleIntervalContainsSigma2) {
    const WindowModel wm;
    const auto spec = example2_spec();
    const auto sel = sigma2(spec, wm);
    const auto r = separation_report(spec, wm, sel.profile);
    for (std::size_t i = 0; i < spec.n; ++i) {
        EXPECT_TRUE(r.cond2_ok[i]);
        EXPECT_NEAR(sel.profile.sigma[i], r.sigma_lo[i], 1e-12);
        EXPECT_LE(sel.profile.sigma[i], r.sigma_hi[i]);
    }
}

TEST(SigmaProfiles, AlwaysAdmissible) {
    const WindowModel wm;
    for (const auto &spec : {example1_spec(), example2_spec()}) {
        for (const auto &sel : {sigma1(spec, wm), sigma2(spec, wm)})
            for (double s : sel.profile.sigma) EXPECT_GT(s, wm.alpha() / wm.mu());
    }
}

TEST(ZoneGrid, CoversEveryZone) {
    const WindowModel wm;
    const auto spec = example2_spec();
    const auto z = zones(spec, wm, sigma2(spec, wm).profile, ZoneOrder::Second);
    const auto g = zone_grid(z);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < spec.n; ++i) {
            EXPECT_LT(g.a_min(), z.lower[k][i]);
            EXPECT_GT(g.a_max(), z.upper[k][i]);
        }
}
