#pragma once

#include "assq/adaptive_cwt.hpp"
#include "assq/phase_sst.hpp"
#include "assq/separation.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace assq::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest form that still carries 17 significant digits; locale independent.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) throw IoError("number formatting failed");
    return {buf, p};
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw IoError("not a number: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string &path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
    }

    CsvWriter &header(std::initializer_list<std::string_view> cols) {
        bool first = true;
        for (auto c : cols) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
        return *this;
    }

    template <class... Ts>
    void row(const Ts &...vs) {
        bool first = true;
        ((emit(vs, first)), ...);
        out_ << '\n';
        if (!out_) throw IoError("write failed on " + path_);
    }

private:
    void emit(double v, bool &first) { sep(first), out_ << fmt(v); }
    void emit(std::size_t v, bool &first) { sep(first), out_ << v; }
    void emit(int v, bool &first) { sep(first), out_ << v; }
    void emit(bool v, bool &first) { sep(first), out_ << (v ? "true" : "false"); }
    void sep(bool &first) {
        if (!first) out_ << ',';
        first = false;
    }

    std::string path_;
    std::ofstream out_;
};

// ---------------------------------------------------------------- signals

inline void write_signal(const std::string &path, const SampledSignal &x) {
    CsvWriter w(path);
    w.header({"t", "re", "im"});
    for (std::size_t i = 0; i < x.size(); ++i)
        w.row(x.time(i), x.samples[i].real(), x.samples[i].imag());
}

// Three columns with an optional header line (t,re,im for signals, b,sigma,dsigma
// for sigma tables). fs is recovered from the first column; real_mode must be supplied since an
// analytic signal with zero imaginary part cannot be told apart.
inline SampledSignal read_signal(const std::string &path, bool real_mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::vector<double> t;
    SampledSignal x;
    x.real_mode = real_mode;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1 && std::isalpha(static_cast<unsigned char>(line[0])) && line.rfind("nan", 0) != 0 &&
            line.rfind("inf", 0) != 0)
            continue; // header
        auto f = split(line, ',');
        if (f.size() != 3) throw IoError(path + ":" + std::to_string(lineno) + ": expected t,re,im");
        try {
            t.push_back(parse_double(f[0]));
            x.samples.emplace_back(parse_double(f[1]), parse_double(f[2]));
        } catch (const IoError &e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (t.size() < 2) throw IoError(path + ": need at least two samples");
    x.t0 = t.front();
    const double dt = (t.back() - t.front()) / double(t.size() - 1);
    if (!(dt > 0.0)) throw IoError(path + ": time column must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-6 * dt)
            throw IoError(path + ": samples are not uniformly spaced");
    x.fs = 1.0 / dt;
    return x;
}

// ---------------------------------------------------------------- planes

inline void write_tf(const std::string &path, const TfPlane &tf, const std::vector<double> &b) {
    CsvWriter w(path);
    w.header({"xi", "b", "re", "im", "abs"});
    for (Eigen::Index i = 0; i < tf.values.cols(); ++i)
        for (Eigen::Index m = 0; m < tf.values.rows(); ++m) {
            const cplx v = tf.values(m, i);
            w.row(tf.config.xi(std::size_t(m)), b[std::size_t(i)], v.real(), v.imag(), std::abs(v));
        }
}

// 8-bit heat map of |T|: row m is bin m, column i is time i, gray = 255 |T| / max.
// The max is recorded in a header comment. Returns it.
inline double write_tf_pgm(const std::string &path, const TfPlane &tf) {
    const Eigen::ArrayXXd mag = tf.values.array().abs();
    const double mx = mag.size() ? mag.maxCoeff() : 0.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n# max " << fmt(mx) << '\n' << mag.cols() << ' ' << mag.rows() << "\n255\n";
    for (Eigen::Index m = 0; m < mag.rows(); ++m)
        for (Eigen::Index i = 0; i < mag.cols(); ++i) {
            double g = mx > 0.0 ? 255.0 * mag(m, i) / mx : 0.0;
            out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(g))));
        }
    if (!out) throw IoError("write failed on " + path);
    return mx;
}

inline void write_omega(const std::string &path, const PhasePlane &p, const CwtStack &st) {
    CsvWriter w(path);
    w.header({"a", "b", "omega"});
    for (Eigen::Index i = 0; i < p.omega.cols(); ++i)
        for (Eigen::Index j = 0; j < p.omega.rows(); ++j)
            w.row(st.grid.a[std::size_t(j)], st.sp.b[std::size_t(i)], p.omega(j, i));
}

inline void write_stack(const std::string &path, const CMat &w_, const CwtStack &st) {
    CsvWriter w(path);
    w.header({"a", "b", "re", "im"});
    for (Eigen::Index i = 0; i < w_.cols(); ++i)
        for (Eigen::Index j = 0; j < w_.rows(); ++j)
            w.row(st.grid.a[std::size_t(j)], st.sp.b[std::size_t(i)], w_(j, i).real(), w_(j, i).imag());
}

inline void write_meta(const std::string &path, const CwtStack &st) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "mu " << fmt(st.wm.mu()) << '\n'
        << "tau0 " << fmt(st.wm.tau0()) << '\n'
        << "alpha " << fmt(st.wm.alpha()) << '\n'
        << "a_min " << fmt(st.grid.a_min()) << '\n'
        << "a_max " << fmt(st.grid.a_max()) << '\n'
        << "scales " << st.grid.size() << '\n'
        << "dlog " << fmt(st.grid.dlog) << '\n'
        << "fs " << fmt(st.fs) << '\n'
        << "samples " << st.cols() << '\n'
        << "real_mode " << (st.real_mode ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------- zones and sigma

inline void write_sigma(const std::string &path, const SigmaProfile &sp) {
    CsvWriter w(path);
    w.header({"b", "sigma", "dsigma"});
    for (std::size_t i = 0; i < sp.size(); ++i) w.row(sp.b[i], sp.sigma[i], sp.dsigma[i]);
}

// Components are numbered from 1 in the output.
inline void write_zones(const std::string &path, const ZoneSet &z) {
    CsvWriter w(path);
    w.header({"b", "k", "lower", "upper", "separated"});
    for (std::size_t i = 0; i < z.b.size(); ++i)
        for (std::size_t k = 0; k < z.components(); ++k)
            w.row(z.b[i], k + 1, z.lower[k][i], z.upper[k][i], bool(z.separation_ok[i]));
}

// ---------------------------------------------------------------- curves and report

inline void write_curve(const std::string &path, const std::vector<double> &b,
                        const std::vector<std::vector<double>> &per_k) {
    CsvWriter w(path);
    w.header({"b", "k", "value"});
    for (std::size_t k = 0; k < per_k.size(); ++k)
        for (std::size_t i = 0; i < b.size(); ++i) w.row(b[i], k + 1, per_k[k][i]);
}

struct ReportRow {
    double b;
    std::size_t k; // 1-based
    double abs_error;
    double bound;
    bool within_bound;
};

inline void write_report(const std::string &path, const std::vector<ReportRow> &rows) {
    CsvWriter w(path);
    w.header({"b", "k", "abs_error", "bound", "within_bound"});
    for (const auto &r : rows) w.row(r.b, r.k, r.abs_error, r.bound, r.within_bound);
}

inline void write_estimates(const std::string &path, const std::vector<double> &b,
                            const std::vector<std::vector<cplx>> &per_k) {
    CsvWriter w(path);
    w.header({"b", "k", "re", "im"});
    for (std::size_t k = 0; k < per_k.size(); ++k)
        for (std::size_t i = 0; i < b.size(); ++i) w.row(b[i], k + 1, per_k[k][i].real(), per_k[k][i].imag());
}

inline std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace assq::io
