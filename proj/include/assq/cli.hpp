#pragma once

#include "assq/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

namespace assq::cli {

enum Exit : int { ok = 0, failure = 1, config_error = 2, inadmissible = 3, missing_truth = 4 };

namespace detail {

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    std::string outdir, preset, sigma, variant, signal_file, eps3, gamma2;
    double tau0 = 0, mu = 0, gamma1 = 0, sigma_value = 0;
    int voices = 0;
    std::size_t xi_bins = 0;
    bool pgm = false, no_pgm = false, stack = false;
};

inline void add_options(CLI::App &app, Options &o) {
    app.add_option("-c,--config", o.config_path, "INI-style run configuration");
    app.add_option("--set", o.sets, "Override a key, e.g. --set sigma.mode=sigma1");
    app.add_option("-o,--outdir", o.outdir, "Output directory");
    app.add_option("--preset", o.preset, "example1 example2 tone chirp empty custom file");
    app.add_option("--signal-file", o.signal_file, "Signal CSV (t,re,im); implies --preset file");
    app.add_option("--sigma", o.sigma, "auto constant sigma1 sigma2 table");
    app.add_option("--sigma-value", o.sigma_value, "Constant sigma");
    app.add_option("--variant", o.variant, "T1 T2 S2");
    app.add_option("--tau0", o.tau0, "Essential-support threshold");
    app.add_option("--mu", o.mu, "Centre frequency");
    app.add_option("--voices", o.voices, "Voices per octave");
    app.add_option("--xi-bins", o.xi_bins, "Number of frequency bins");
    app.add_option("--gamma1", o.gamma1, "Magnitude threshold");
    app.add_option("--gamma2", o.gamma2, "Second-order threshold or auto");
    app.add_option("--eps3", o.eps3, "Recovery half-window in Hz or auto");
    app.add_flag("--pgm", o.pgm, "Write tf.pgm");
    app.add_flag("--no-pgm", o.no_pgm, "Skip tf.pgm");
    app.add_flag("--stack", o.stack, "Write the CWT lattice as stack.csv and meta.txt");
}

// File first, then named flags, then --set in command-line order.
inline RunConfig build_config(const Options &o, const std::string &default_outdir = {}) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (!default_outdir.empty() && o.config_path.empty()) c.output.dir = default_outdir;
    auto set = [&](const std::string &sec, const std::string &key, const std::string &v, const char *flag) {
        config_set(c, sec, key, v, std::string("--") + flag);
    };
    if (!o.preset.empty()) set("signal", "preset", o.preset, "preset");
    if (!o.signal_file.empty()) {
        set("signal", "preset", "file", "signal-file");
        set("signal", "file", o.signal_file, "signal-file");
    }
    if (!o.outdir.empty()) set("output", "dir", o.outdir, "outdir");
    if (!o.sigma.empty()) set("sigma", "mode", o.sigma, "sigma");
    if (o.sigma_value != 0) set("sigma", "value", io::fmt(o.sigma_value), "sigma-value");
    if (!o.variant.empty()) set("squeeze", "variant", o.variant, "variant");
    if (o.tau0 != 0) set("window", "tau0", io::fmt(o.tau0), "tau0");
    if (o.mu != 0) set("window", "mu", io::fmt(o.mu), "mu");
    if (o.voices != 0) set("grid", "voices", std::to_string(o.voices), "voices");
    if (o.xi_bins != 0) set("grid", "xi_bins", std::to_string(o.xi_bins), "xi-bins");
    if (o.gamma1 != 0) set("thresholds", "gamma1", io::fmt(o.gamma1), "gamma1");
    if (!o.gamma2.empty()) set("thresholds", "gamma2", o.gamma2, "gamma2");
    if (!o.eps3.empty()) set("thresholds", "eps3", o.eps3, "eps3");
    if (o.pgm) c.output.pgm = true;
    if (o.no_pgm) c.output.pgm = false;
    if (o.stack) c.output.stack = true;
    for (const auto &s : o.sets) config_override(c, s);
    check_config(c);
    return c;
}

inline std::string path_in(const RunConfig &c, const char *name) {
    return (std::filesystem::path(c.output.dir) / name).string();
}

inline void ensure_outdir(const RunConfig &c) {
    std::error_code ec;
    std::filesystem::create_directories(c.output.dir, ec);
    if (ec) throw io::IoError("cannot create " + c.output.dir + ": " + ec.message());
}

inline void do_synth(const Prepared &p, std::ostream &out) {
    ensure_outdir(p.cfg);
    const auto path = path_in(p.cfg, "signal.csv");
    io::write_signal(path, p.x);
    out << "wrote " << path << " (" << p.x.size() << " samples, fs " << io::fmt(p.x.fs) << ")\n";
}

inline void write_analysis(const Prepared &p, const Analysis &an, std::ostream &out) {
    ensure_outdir(p.cfg);
    const auto &c = p.cfg;
    io::write_tf(path_in(c, "tf.csv"), an.tf, an.sp.b);
    if (c.output.pgm) io::write_tf_pgm(path_in(c, "tf.pgm"), an.tf);
    io::write_omega(path_in(c, "omega.csv"), an.plane, an.st);
    io::write_sigma(path_in(c, "sigma.csv"), an.sp);
    if (an.zones) io::write_zones(path_in(c, "zones.csv"), *an.zones);
    if (c.output.stack) {
        io::write_stack(path_in(c, "stack.csv"), an.st.w, an.st);
        io::write_meta(path_in(c, "meta.txt"), an.st);
    }
    out << "analyze: variant " << variant_name(p.variant) << ", sigma " << p.sigma_mode << ", "
        << an.st.rows() << " scales x " << an.st.cols() << " times";
    if (!std::isnan(an.gamma2)) out << ", gamma2 " << io::fmt(an.gamma2);
    out << ", outdir " << c.output.dir << '\n';
}

inline bool write_recovery(const Prepared &p, const Recovery &r, std::ostream &out) {
    ensure_outdir(p.cfg);
    const auto &c = p.cfg;
    const std::size_t n = p.x.size();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = p.x.time(i);
    std::vector<io::ReportRow> rows;
    std::vector<std::vector<cplx>> est;
    std::vector<std::vector<double>> bounds, errors;
    for (std::size_t k = 0; k < r.components.size(); ++k) {
        const auto &cr = r.components[k];
        for (std::size_t i = 0; i < n; ++i)
            rows.push_back({b[i], k + 1, cr.result.abs_error[i], cr.bound[i], bool(cr.within[i])});
        est.push_back(cr.result.estimate);
        bounds.push_back(cr.bound);
        errors.push_back(cr.result.abs_error);
    }
    io::write_report(path_in(c, "report.csv"), rows);
    io::write_estimates(path_in(c, "estimates.csv"), b, est);
    io::write_curve(path_in(c, "abs_error.csv"), b, errors);
    io::write_curve(path_in(c, "recovery_bound.csv"), b, bounds);
    if (!r.if_bound.empty()) io::write_curve(path_in(c, p.variant == SqueezeVariant::T1 ? "bd.csv" : "Bd_p.csv"), b, r.if_bound);
    if (!r.aux_bound.empty()) io::write_curve(path_in(c, "Bd_pp.csv"), b, r.aux_bound);
    bool all = true;
    for (std::size_t k = 0; k < r.components.size(); ++k) {
        const auto &cr = r.components[k];
        out << "recover: k=" << k + 1 << " max interior abs error " << io::fmt(cr.max_interior_error)
            << ", interior within bound: " << (cr.interior_ok ? "yes" : "no") << '\n';
        all = all && cr.interior_ok;
    }
    return all;
}

inline int guarded(std::ostream &err, const std::function<int()> &body) {
    try {
        return body();
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    } catch (const AdmissibilityError &e) {
        err << "error: " << e.what() << '\n';
        return inadmissible;
    } catch (const MissingTruth &e) {
        err << "error: " << e.what() << '\n';
        return missing_truth;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
}

} // namespace detail

// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout,
                   std::ostream &err = std::cerr) {
    using namespace detail;
    CLI::App app{"Adaptive synchrosqueezing: synthesis, analysis, recovery and error bounds"};
    app.require_subcommand(1);
    Options o;
    auto *synth = app.add_subcommand("synth", "Write signal.csv for the configured signal");
    auto *analyze_cmd = app.add_subcommand("analyze", "Adaptive CWT, phase and squeezing artifacts");
    auto *recover_cmd = app.add_subcommand("recover", "Component recovery with error bounds (report.csv)");
    auto *demo = app.add_subcommand("demo", "Run a preset end to end");
    std::string demo_name;
    demo->add_option("name", demo_name, "example1 or example2")->required()->check(CLI::IsMember({"example1", "example2"}));
    for (auto *sc : {synth, analyze_cmd, recover_cmd, demo}) add_options(*sc, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    return guarded(err, [&]() -> int {
        if (*demo) {
            if (o.preset.empty() && o.config_path.empty()) o.preset = demo_name;
            const RunConfig cfg = build_config(o, "out/" + demo_name);
            const Prepared p = prepare(cfg);
            do_synth(p, out);
            const Analysis an = analyze(p);
            write_analysis(p, an, out);
            return write_recovery(p, recover_all(p, an), out) ? ok : failure;
        }
        const RunConfig cfg = build_config(o);
        const Prepared p = prepare(cfg);
        if (*synth) {
            do_synth(p, out);
            return ok;
        }
        const Analysis an = analyze(p);
        if (*analyze_cmd) {
            write_analysis(p, an, out);
            return ok;
        }
        if (!p.truth) throw MissingTruth("recover needs component descriptors; a signal file has none");
        write_analysis(p, an, out);
        write_recovery(p, recover_all(p, an), out);
        return ok;
    });
}

} // namespace assq::cli
