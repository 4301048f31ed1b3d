#pragma once

#include "assq/config.hpp"
#include "assq/recovery_bounds.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace assq {

// Raised when an operation needs component descriptors that the input lacks.
class MissingTruth : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Prepared {
    RunConfig cfg;
    std::optional<SignalSpec> truth; // absent for signals read from file
    SampledSignal x;
    WindowModel wm;
    SqueezeVariant variant = SqueezeVariant::T1;
    std::string sigma_mode; // resolved: constant sigma1 sigma2 table
};

struct Analysis {
    SigmaProfile sp;
    std::optional<ZoneSet> zones;
    CwtStack st;
    PhasePlane plane;
    TfPlane tf;
    double gamma2 = NAN;
};

struct ComponentReport {
    RecoveryResult result;
    std::vector<double> bound;
    std::vector<bool> within;
    double max_interior_error = 0.0;
    bool interior_ok = true;
};

struct Recovery {
    std::vector<ComponentReport> components;
    std::vector<std::vector<double>> if_bound; // bd (first order) or Bd~' (second order)
    std::vector<std::vector<double>> aux_bound; // Bd~'' for second order, empty otherwise
};

inline const char *variant_name(SqueezeVariant v) {
    switch (v) {
    case SqueezeVariant::T1: return "T1";
    case SqueezeVariant::T2: return "T2";
    case SqueezeVariant::S2: return "S2";
    }
    return "?";
}

inline SignalSpec preset_spec(const RunConfig &cfg) {
    const auto &s = cfg.signal;
    SignalSpec spec;
    spec.fs = 256.0;
    spec.n = 256;
    spec.real_mode = false;
    if (s.preset == "example1")
        spec = example1_spec();
    else if (s.preset == "example2")
        spec = example2_spec();
    else if (s.preset == "tone")
        spec.components = {tone(1.0, 40.0)};
    else if (s.preset == "chirp")
        spec.components = {linear_chirp(1.0, 20.0, 18.0)};
    else if (s.preset == "custom")
        for (const auto &c : s.components) spec.components.push_back(polynomial_component(c.amp, c.phase));
    if (s.fs > 0.0) spec.fs = s.fs;
    if (s.n > 0) spec.n = s.n;
    spec.t0 = s.t0;
    if (s.real >= 0) spec.real_mode = s.real == 1;
    return spec;
}

// Zero-amplitude copy; phases (and hence zones and windows) are kept.
inline SignalSpec silenced(SignalSpec spec) {
    for (auto &c : spec.components) {
        c.amp = [](double) { return 0.0; };
        c.damp = [](double) { return 0.0; };
    }
    return spec;
}

inline Prepared prepare(const RunConfig &cfg) {
    check_config(cfg);
    Prepared p{cfg, std::nullopt, {}, WindowModel(cfg.window.mu, cfg.window.tau0), {}, {}};
    if (cfg.signal.preset == "file") {
        try {
            p.x = io::read_signal(cfg.signal.file, cfg.signal.real == 1);
        } catch (const io::IoError &e) {
            throw ConfigError(e.what());
        }
    } else {
        SignalSpec spec = preset_spec(cfg);
        try {
            p.x = synthesize(spec);
        } catch (const SpecError &e) {
            throw ConfigError(std::string("signal: ") + e.what());
        }
        if (cfg.signal.silent) {
            spec = silenced(std::move(spec));
            for (auto &v : p.x.samples) v = 0.0;
        }
        p.truth = std::move(spec);
    }
    const std::size_t K = p.truth ? p.truth->components.size() : 0;

    const auto &v = cfg.squeeze.variant;
    if (v == "T1")
        p.variant = SqueezeVariant::T1;
    else if (v == "T2")
        p.variant = SqueezeVariant::T2;
    else if (v == "S2")
        p.variant = SqueezeVariant::S2;
    else
        p.variant = cfg.signal.preset == "example2" ? SqueezeVariant::S2 : SqueezeVariant::T1;

    p.sigma_mode = cfg.sigma.mode;
    if (p.sigma_mode == "auto")
        p.sigma_mode = K < 2 ? "constant" : p.variant == SqueezeVariant::T1 ? "sigma1" : "sigma2";
    if (p.sigma_mode == "sigma1" || p.sigma_mode == "sigma2") {
        if (!p.truth) throw MissingTruth("sigma." + p.sigma_mode + " needs component descriptors");
        if (K < 2) throw ConfigError("config: sigma." + p.sigma_mode + " needs at least two components");
    }
    return p;
}

inline SigmaProfile make_profile(const Prepared &p) {
    std::vector<double> b(p.x.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = p.x.time(i);
    if (p.sigma_mode == "sigma1") return sigma1(*p.truth, p.wm).profile;
    if (p.sigma_mode == "sigma2") return sigma2(*p.truth, p.wm).profile;
    if (p.sigma_mode == "table") {
        SampledSignal tab;
        try {
            // same three-column layout as signals: b,sigma,dsigma (dsigma is re-derived)
            tab = io::read_signal(p.cfg.sigma.table, false);
        } catch (const io::IoError &e) {
            throw ConfigError(e.what());
        }
        if (tab.size() != b.size())
            throw ConfigError(p.cfg.sigma.table + ": expected " + std::to_string(b.size()) + " rows");
        std::vector<double> s(b.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = tab.samples[i].real();
        return sigma_from_table(b, std::move(s));
    }
    return constant_sigma(b, p.cfg.sigma.value);
}

inline SqueezeConfig make_squeeze_config(const Prepared &p) {
    SqueezeConfig c = default_squeeze_config(p.x.fs, p.x.size());
    if (p.cfg.grid.xi_bins >= 2) {
        c.n_xi = p.cfg.grid.xi_bins;
        c.dxi = 0.5 * p.x.fs / double(c.n_xi - 1);
    }
    c.lambda = p.cfg.squeeze.lambda;
    const auto &k = p.cfg.squeeze.kernel;
    c.kernel = k == "triangle" ? SqueezeKernel::Triangle : k == "gauss" ? SqueezeKernel::Gauss : SqueezeKernel::Dirac;
    return c;
}

inline Analysis analyze(const Prepared &p) {
    Analysis an;
    an.sp = make_profile(p);
    check_admissible(an.sp, p.wm);
    const auto &g = p.cfg.grid;
    const bool second = p.variant != SqueezeVariant::T1;
    if (p.truth && !p.truth->components.empty())
        an.zones = zones(*p.truth, p.wm, an.sp, second ? ZoneOrder::Second : ZoneOrder::First);
    ScaleGrid grid;
    if (g.a_min > 0.0)
        grid = make_scale_grid(g.a_min, g.a_max, g.voices);
    else if (an.zones)
        grid = zone_grid(*an.zones, g.pad, g.voices);
    else
        grid = covering_grid(an.sp, p.wm, p.x.fs / double(p.x.size()), 0.5 * p.x.fs, g.voices);
    an.st = compute_stack(p.x, an.sp, grid, p.wm);
    const double g1 = p.cfg.thresholds.gamma1;
    if (!second) {
        an.plane = phase_first(an.st, g1);
    } else {
        an.gamma2 = std::isnan(p.cfg.thresholds.gamma2) ? default_gamma2(an.st, g1) : p.cfg.thresholds.gamma2;
        an.plane = phase_second(an.st, g1, an.gamma2, p.variant == SqueezeVariant::S2);
    }
    an.tf = squeeze(an.st, an.plane, make_squeeze_config(p), p.variant);
    return an;
}

// Middle 80% of the analysed interval.
inline bool interior(const Prepared &p, std::size_t i) {
    const double lo = p.x.time(0), hi = p.x.time(p.x.size() - 1);
    const double t = p.x.time(i);
    return t >= lo + 0.1 * (hi - lo) - 1e-12 && t <= lo + 0.9 * (hi - lo) + 1e-12;
}

// Recovery on the true ridges with the matching error bound per component.
inline Recovery recover_all(const Prepared &p, const Analysis &an) {
    if (!p.truth) throw MissingTruth("recovery bounds need component descriptors");
    const SignalSpec &spec = *p.truth;
    const std::size_t K = spec.components.size(), n = p.x.size();
    Recovery out;
    if (K == 0) return out;
    const double g1 = p.cfg.thresholds.gamma1;
    const auto rep = separation_report(spec, p.wm, an.sp);
    std::vector<std::vector<cplx>> c(K);
    std::vector<std::vector<double>> bound(K);
    RecoveryMode mode = RecoveryMode::FirstOrder;
    if (p.variant == SqueezeVariant::T1) {
        auto B = bounds_first(spec, p.wm, an.sp, g1);
        for (std::size_t k = 0; k < K; ++k) c[k] = to_complex(B.c_alpha);
        bound = B.bd_tilde;
        out.if_bound = B.bd;
    } else {
        auto B = bounds_second(spec, p.wm, an.sp, *an.zones, g1, an.gamma2, &an.st);
        c = B.c_k;
        mode = p.variant == SqueezeVariant::S2 ? RecoveryMode::SecondS : RecoveryMode::SecondT;
        bound = p.variant == SqueezeVariant::S2 ? B.bound_S : B.bound_T;
        out.if_bound = B.Bd_p;
        out.aux_bound = B.Bd_pp;
    }
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> eps3(n, p.cfg.thresholds.eps3);
        if (std::isnan(p.cfg.thresholds.eps3)) {
            eps3 = default_eps3(rep, k);
            // a lone component has no neighbour; half its frequency keeps the window positive
            for (std::size_t i = 0; i < n; ++i)
                if (!std::isfinite(eps3[i])) eps3[i] = 0.5 * spec.components[k].dphase(p.x.time(i));
        }
        ComponentReport cr;
        cr.result = recover(an.tf, c[k], ridge_truth(spec, k), eps3, mode, spec.real_mode);
        attach_truth(cr.result, spec, k);
        cr.bound = bound[k];
        cr.within.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            cr.within[i] = cr.result.abs_error[i] <= cr.bound[i];
            if (interior(p, i)) {
                cr.max_interior_error = std::max(cr.max_interior_error, cr.result.abs_error[i]);
                if (!cr.within[i]) cr.interior_ok = false;
            }
        }
        out.components.push_back(std::move(cr));
    }
    return out;
}

} // namespace assq
