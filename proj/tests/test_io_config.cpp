#include "assq/pipeline.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace assq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "assq_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

void put(const fs::path &p, const std::string &text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::string config_error(const std::string &text) {
    try {
        parse_config_text(text, "in.cfg");
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Format, RoundTripsEveryDouble) {
    oracle::Rng rng(21);
    for (int trial = 0; trial < 2000; ++trial) {
        const double v = std::ldexp(rng.uniform(-1, 1), rng.integer(-300, 300));
        EXPECT_EQ(io::parse_double(io::fmt(v)), v);
    }
    EXPECT_EQ(io::fmt(0.5), "0.5");
    EXPECT_EQ(io::fmt(std::nan("")), "nan");
    EXPECT_EQ(io::fmt(-INFINITY), "-inf");
    EXPECT_TRUE(std::isnan(io::parse_double("nan")));
    EXPECT_EQ(io::parse_double(" +2.5\r"), 2.5);
    EXPECT_THROW(io::parse_double("2.5x"), io::IoError);
    EXPECT_THROW(io::parse_double(""), io::IoError);
}

TEST(Csv, SignalRoundTrip) {
    auto spec = example2_spec();
    spec.t0 = 0.25;
    const auto x = synthesize(spec);
    const auto p = scratch("signal.csv");
    io::write_signal(p.string(), x);
    const auto text = io::slurp(p.string());
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,re,im");
    const auto y = io::read_signal(p.string(), true);
    ASSERT_EQ(y.size(), x.size());
    EXPECT_NEAR(y.fs, 256.0, 1e-9);
    EXPECT_EQ(y.t0, 0.25);
    EXPECT_TRUE(y.real_mode);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.samples[i], x.samples[i]);
}

TEST(Csv, ReadSignalRejectsBadInput) {
    const auto p = scratch("bad.csv");
    put(p, "t,re,im\n0,1,0\n0.1,2\n");
    EXPECT_THROW(io::read_signal(p.string(), false), io::IoError);
    put(p, "t,re,im\n0,1,0\n0.1,2,0\n0.3,1,1\n");
    EXPECT_THROW(io::read_signal(p.string(), false), io::IoError);
    put(p, "t,re,im\n0,1,0\n");
    EXPECT_THROW(io::read_signal(p.string(), false), io::IoError);
    put(p, "t,re,im\n0,1,0\n0.1,abc,0\n");
    try {
        io::read_signal(p.string(), false);
        FAIL();
    } catch (const io::IoError &e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(io::read_signal(scratch("missing.csv").string(), false), io::IoError);
}

TEST(Csv, ReportColumns) {
    const auto p = scratch("report.csv");
    io::write_report(p.string(), {{0.5, 1, 0.01, 0.02, true}, {0.5, 2, 0.03, 0.02, false}});
    EXPECT_EQ(io::slurp(p.string()), "b,k,abs_error,bound,within_bound\n0.5,1,0.01,0.02,true\n0.5,2,0.029999999999999999,0.02,false\n");
}

TEST(Pgm, HeaderAndScaling) {
    TfPlane tf;
    tf.config = default_squeeze_config(8, 8);
    tf.values = CMat::Zero(Eigen::Index(tf.config.n_xi), 3);
    tf.values(2, 1) = 4.0;
    tf.values(0, 0) = 2.0;
    const auto p = scratch("tf.pgm");
    EXPECT_EQ(io::write_tf_pgm(p.string(), tf), 4.0);
    const auto s = io::slurp(p.string());
    const std::string head = "P5\n# max 4\n3 5\n255\n";
    ASSERT_EQ(s.substr(0, head.size()), head);
    const std::string px = s.substr(head.size());
    ASSERT_EQ(px.size(), 15u);
    EXPECT_EQ(std::uint8_t(px[0]), 128); // row 0, column 0: 255 * 2 / 4 rounded
    EXPECT_EQ(std::uint8_t(px[2 * 3 + 1]), 255);
}

TEST(Config, ParsesEverySection) {
    const auto c = parse_config_text(R"(
# comment
[signal]
preset = custom
component = 1 | 0 12 0.25
component = 1 0.1 | 0 26 0.5
fs = 512
n = 512
real = true
[window]
tau0 = 0.1
[sigma]
mode = constant
value = 1.5
[grid]
voices = 16
[thresholds]
gamma1 = 0.02
gamma2 = auto
eps3 = 4
[squeeze]
variant = T2
kernel = gauss
lambda = 1.5
[output]
dir = results
pgm = false
)");
    ASSERT_EQ(c.signal.components.size(), 2u);
    EXPECT_EQ(c.signal.components[1].amp, (std::vector<double>{1, 0.1}));
    EXPECT_EQ(c.signal.components[0].phase, (std::vector<double>{0, 12, 0.25}));
    EXPECT_EQ(c.signal.fs, 512.0);
    EXPECT_EQ(c.signal.real, 1);
    EXPECT_EQ(c.window.tau0, 0.1);
    EXPECT_EQ(c.sigma.value, 1.5);
    EXPECT_EQ(c.grid.voices, 16);
    EXPECT_TRUE(std::isnan(c.thresholds.gamma2));
    EXPECT_EQ(c.thresholds.eps3, 4.0);
    EXPECT_EQ(c.squeeze.kernel, "gauss");
    EXPECT_EQ(c.output.dir, "results");
    EXPECT_FALSE(c.output.pgm);
    EXPECT_NO_THROW(check_config(c));
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_NE(config_error("[signal]\npreset = bogus\n").find("in.cfg:2"), std::string::npos);
    EXPECT_NE(config_error("[window]\n\ntau0 = x\n").find("in.cfg:3"), std::string::npos);
    EXPECT_NE(config_error("tau0 = 1\n").find("in.cfg:1"), std::string::npos);
    EXPECT_NE(config_error("[nope]\nk = 1\n").find("unknown section"), std::string::npos);
    EXPECT_NE(config_error("[grid]\ncolour = 1\n").find("unknown key 'grid.colour'"), std::string::npos);
    EXPECT_NE(config_error("[grid\n").find("unterminated"), std::string::npos);
    EXPECT_NE(config_error("[signal]\njust words\n").find("expected key = value"), std::string::npos);
    EXPECT_THROW(load_config(scratch("none.cfg").string()), ConfigError);
}

TEST(Config, OverridesAndValidation) {
    RunConfig c;
    config_override(c, "thresholds.gamma1=0.05");
    config_override(c, " sigma.mode = sigma2 ");
    EXPECT_EQ(c.thresholds.gamma1, 0.05);
    EXPECT_EQ(c.sigma.mode, "sigma2");
    EXPECT_THROW(config_override(c, "gamma1=0.05"), ConfigError);
    EXPECT_THROW(config_override(c, "thresholds.gamma1"), ConfigError);

    auto bad = [](auto edit) {
        RunConfig r;
        edit(r);
        EXPECT_THROW(check_config(r), ConfigError);
    };
    bad([](RunConfig &r) { r.window.tau0 = 1.0; });
    bad([](RunConfig &r) { r.thresholds.gamma1 = 0.0; });
    bad([](RunConfig &r) { r.thresholds.gamma2 = -1.0; });
    bad([](RunConfig &r) { r.grid.a_min = 0.1; });
    bad([](RunConfig &r) { r.grid.xi_bins = 1; });
    bad([](RunConfig &r) { r.signal.preset = "custom"; });
    bad([](RunConfig &r) { r.signal.preset = "file"; });
    bad([](RunConfig &r) { r.sigma.mode = "table"; });
    bad([](RunConfig &r) { r.squeeze.lambda = -1; });
}

TEST(Pipeline, CustomComponentsAndFileSignals) {
    RunConfig c = parse_config_text("[signal]\npreset = custom\ncomponent = 1 | 0 12\ncomponent = 1 | 0 30\n");
    const auto p = prepare(c);
    ASSERT_TRUE(p.truth.has_value());
    EXPECT_EQ(p.sigma_mode, "sigma1");
    EXPECT_EQ(p.variant, SqueezeVariant::T1);
    EXPECT_NEAR(p.x.samples[3].real(), std::cos(2 * pi * 12 * 3 / 256.0) + std::cos(2 * pi * 30 * 3 / 256.0), 1e-12);

    const auto f = scratch("sig.csv");
    io::write_signal(f.string(), p.x);
    RunConfig cf;
    cf.signal.preset = "file";
    cf.signal.file = f.string();
    cf.sigma.mode = "constant";
    const auto q = prepare(cf);
    EXPECT_FALSE(q.truth.has_value());
    EXPECT_EQ(q.x.samples, p.x.samples);
    cf.sigma.mode = "sigma1";
    EXPECT_THROW(prepare(cf), MissingTruth);
    cf.signal.file = scratch("absent.csv").string();
    EXPECT_THROW(prepare(cf), ConfigError);
}

TEST(Pipeline, SigmaTable) {
    const auto f = scratch("sigma.csv");
    std::ofstream out(f);
    out.precision(17);
    out << "b,sigma,dsigma\n";
    for (int i = 0; i < 256; ++i) out << i / 256.0 << "," << 1.0 + 0.5 * i / 256.0 << ",0\n";
    out.close();
    RunConfig c;
    c.signal.preset = "tone";
    c.sigma.mode = "table";
    c.sigma.table = f.string();
    const auto p = prepare(c);
    const auto sp = make_profile(p);
    EXPECT_NEAR(sp.sigma[100], 1.0 + 0.5 * 100 / 256.0, 1e-15);
    EXPECT_NEAR(sp.dsigma[100], 0.5, 1e-9);
}
