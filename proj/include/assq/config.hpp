#pragma once

#include "assq/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace assq {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Polynomial coefficients in increasing degree; phase in cycles.
struct ComponentDesc {
    std::vector<double> amp;
    std::vector<double> phase;
};

struct RunConfig {
    struct Signal {
        std::string preset = "example1"; // example1 example2 tone chirp empty custom file
        std::vector<ComponentDesc> components;
        double fs = 0.0;     // 0: preset value
        std::size_t n = 0;   // 0: preset value
        double t0 = 0.0;
        int real = -1;       // -1: preset value
        bool silent = false; // keep descriptors, zero the samples
        std::string file;
    } signal;
    struct Window {
        double tau0 = 1.0 / 20.0;
        double mu = 1.0;
    } window;
    struct Sigma {
        std::string mode = "auto"; // auto constant sigma1 sigma2 table
        double value = 1.0;
        std::string table;
    } sigma;
    struct Grid {
        int voices = 32;
        std::size_t xi_bins = 0; // 0: n/2 + 1
        double a_min = 0.0;      // 0: from zones
        double a_max = 0.0;
        double pad = 1.5;
    } grid;
    struct Thresholds {
        double gamma1 = 0.01;
        double gamma2 = NAN; // NaN: auto
        double eps3 = NAN;   // NaN: auto
    } thresholds;
    struct Squeeze {
        std::string variant = "auto"; // auto T1 T2 S2
        std::string kernel = "dirac"; // dirac triangle gauss
        double lambda = 0.0;
    } squeeze;
    struct Output {
        std::string dir = "out";
        bool pgm = true;
        bool stack = false;
    } output;
};

namespace detail {

inline std::string trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return std::string(s);
}

inline double to_num(const std::string &v, const std::string &where) {
    try {
        return io::parse_double(v);
    } catch (const io::IoError &) {
        throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
}

inline double to_num_or_auto(const std::string &v, const std::string &where) {
    return v == "auto" ? NAN : to_num(v, where);
}

inline bool to_bool(const std::string &v, const std::string &where) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError(where + ": expected true/false, got '" + v + "'");
}

inline std::size_t to_count(const std::string &v, const std::string &where) {
    double d = to_num(v, where);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e9)
        throw ConfigError(where + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(d);
}

inline std::vector<double> to_list(const std::string &v, const std::string &where) {
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_num(tok, where));
    if (out.empty()) throw ConfigError(where + ": empty coefficient list");
    return out;
}

inline std::string one_of(const std::string &v, std::initializer_list<const char *> opts,
                          const std::string &where) {
    for (const char *o : opts)
        if (v == o) return v;
    std::string msg = where + ": '" + v + "' is not one of";
    for (const char *o : opts) msg += std::string(" ") + o;
    throw ConfigError(msg);
}

} // namespace detail

// Assigns one key. where is a location prefix used in error messages.
inline void config_set(RunConfig &c, const std::string &section, const std::string &key,
                       const std::string &value, const std::string &where) {
    using namespace detail;
    const std::string id = section + "." + key;
    auto bad_key = [&] { throw ConfigError(where + ": unknown key '" + id + "'"); };
    if (section == "signal") {
        if (key == "preset")
            c.signal.preset = one_of(value, {"example1", "example2", "tone", "chirp", "empty", "custom", "file"}, where);
        else if (key == "component") {
            auto bar = value.find('|');
            if (bar == std::string::npos)
                throw ConfigError(where + ": component needs 'amp coeffs | phase coeffs'");
            c.signal.components.push_back({to_list(value.substr(0, bar), where), to_list(value.substr(bar + 1), where)});
        } else if (key == "fs")
            c.signal.fs = to_num(value, where);
        else if (key == "n")
            c.signal.n = to_count(value, where);
        else if (key == "t0")
            c.signal.t0 = to_num(value, where);
        else if (key == "real")
            c.signal.real = to_bool(value, where) ? 1 : 0;
        else if (key == "silent")
            c.signal.silent = to_bool(value, where);
        else if (key == "file")
            c.signal.file = value;
        else
            bad_key();
    } else if (section == "window") {
        if (key == "tau0")
            c.window.tau0 = to_num(value, where);
        else if (key == "mu")
            c.window.mu = to_num(value, where);
        else
            bad_key();
    } else if (section == "sigma") {
        if (key == "mode")
            c.sigma.mode = one_of(value, {"auto", "constant", "sigma1", "sigma2", "table"}, where);
        else if (key == "value")
            c.sigma.value = to_num(value, where);
        else if (key == "table")
            c.sigma.table = value;
        else
            bad_key();
    } else if (section == "grid") {
        if (key == "voices")
            c.grid.voices = static_cast<int>(to_count(value, where));
        else if (key == "xi_bins")
            c.grid.xi_bins = to_count(value, where);
        else if (key == "a_min")
            c.grid.a_min = to_num(value, where);
        else if (key == "a_max")
            c.grid.a_max = to_num(value, where);
        else if (key == "pad")
            c.grid.pad = to_num(value, where);
        else
            bad_key();
    } else if (section == "thresholds") {
        if (key == "gamma1")
            c.thresholds.gamma1 = to_num(value, where);
        else if (key == "gamma2")
            c.thresholds.gamma2 = to_num_or_auto(value, where);
        else if (key == "eps3")
            c.thresholds.eps3 = to_num_or_auto(value, where);
        else
            bad_key();
    } else if (section == "squeeze") {
        if (key == "variant")
            c.squeeze.variant = one_of(value, {"auto", "T1", "T2", "S2"}, where);
        else if (key == "kernel")
            c.squeeze.kernel = one_of(value, {"dirac", "triangle", "gauss"}, where);
        else if (key == "lambda")
            c.squeeze.lambda = to_num(value, where);
        else
            bad_key();
    } else if (section == "output") {
        if (key == "dir")
            c.output.dir = value;
        else if (key == "pgm")
            c.output.pgm = to_bool(value, where);
        else if (key == "stack")
            c.output.stack = to_bool(value, where);
        else
            bad_key();
    } else {
        throw ConfigError(where + ": unknown section '" + section + "'");
    }
}

// "section.key=value", as given on the command line.
inline void config_override(RunConfig &c, const std::string &assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("--set " + assignment + ": expected section.key=value");
    config_set(c, detail::trim(assignment.substr(0, dot)),
               detail::trim(assignment.substr(dot + 1, eq - dot - 1)),
               detail::trim(assignment.substr(eq + 1)), "--set " + assignment);
}

inline void check_config(const RunConfig &c) {
    auto fail = [](const std::string &m) { throw ConfigError("config: " + m); };
    if (!(c.window.tau0 > 0.0 && c.window.tau0 < 1.0)) fail("window.tau0 must lie in (0,1)");
    if (!(c.window.mu > 0.0)) fail("window.mu must be positive");
    if (!(c.thresholds.gamma1 > 0.0)) fail("thresholds.gamma1 must be positive");
    if (!std::isnan(c.thresholds.gamma2) && !(c.thresholds.gamma2 > 0.0))
        fail("thresholds.gamma2 must be positive or auto");
    if (!std::isnan(c.thresholds.eps3) && !(c.thresholds.eps3 > 0.0))
        fail("thresholds.eps3 must be positive or auto");
    if (c.grid.voices <= 0) fail("grid.voices must be positive");
    if (!(c.grid.pad >= 1.0)) fail("grid.pad must be at least 1");
    if ((c.grid.a_min > 0.0) != (c.grid.a_max > 0.0) || (c.grid.a_min > 0.0 && !(c.grid.a_max > c.grid.a_min)))
        fail("grid.a_min and grid.a_max must be given together with a_min < a_max");
    if (c.grid.xi_bins == 1) fail("grid.xi_bins must be at least 2");
    if (c.sigma.mode == "constant" && !(c.sigma.value > 0.0)) fail("sigma.value must be positive");
    if (c.sigma.mode == "table" && c.sigma.table.empty()) fail("sigma.mode = table needs sigma.table");
    if (c.squeeze.lambda < 0.0) fail("squeeze.lambda must be non-negative");
    if (c.signal.fs < 0.0) fail("signal.fs must be positive");
    if (c.signal.preset == "custom" && c.signal.components.empty())
        fail("signal.preset = custom needs at least one component");
    if (c.signal.preset != "custom" && !c.signal.components.empty())
        fail("signal.component is only allowed with preset = custom");
    if (c.signal.preset == "file" && c.signal.file.empty()) fail("signal.preset = file needs signal.file");
}

inline RunConfig parse_config(std::istream &in, const std::string &source) {
    RunConfig c;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (section.empty()) throw ConfigError(where + ": key outside of any section");
        config_set(c, section, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)), where);
    }
    return c;
}

inline RunConfig parse_config_text(const std::string &text, const std::string &source = "config") {
    std::istringstream ss(text);
    return parse_config(ss, source);
}

inline RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    return parse_config(in, path);
}

} // namespace assq
