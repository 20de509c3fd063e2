#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "sdrc/io.hpp"

using namespace sdrc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run sdr(std::vector<std::string> args) {
    args.insert(args.begin(), "sdr-causal");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("sdrc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void write(const std::string& name, const std::string& text) const { io::write_atomic(dir_ / name, text); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(sdr({"--help"}).code, 0);
    EXPECT_EQ(sdr({}).code, 1);
    EXPECT_EQ(sdr({"bogus"}).code, 1);
    const auto r = sdr({"simulate", "--m", "4"});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, SimulateThenInferFindsDirection) {
    const auto sim = sdr({"simulate", "--cause", "ar1:0.9", "--m", "64", "--n", "65536", "--seed", "3", "--out",
                          path("pair.csv"), "--truth", path("truth.json")});
    ASSERT_EQ(sim.code, 0) << sim.err;
    const auto truth = io::read_json(path("truth.json"));
    EXPECT_EQ(truth["m"], 64);
    EXPECT_EQ(truth["filter"]["coeffs"].size(), 64U);
    const auto inf = sdr({"infer", path("pair.csv"), "--out", path("report.json")});
    ASSERT_EQ(inf.code, 0) << inf.err;
    EXPECT_NE(inf.out.find("decision " + truth["decision"].get<std::string>()), std::string::npos) << inf.out;
    const auto rep = io::report_from_json(io::read_json(path("report.json")));
    EXPECT_NEAR(rep.rho_forward, truth["rho_fwd"].get<double>(), 0.1);
}

TEST_F(Cli, InferAcceptsTwoFiles) {
    ASSERT_EQ(sdr({"simulate", "--m", "8", "--n", "8192", "--seed", "1", "--out", path("p.csv")}).code, 0);
    const auto t = io::read_csv(path("p.csv"));
    write("x.csv", io::series_csv(TimeSeries(t.columns[0])));
    write("y.csv", io::series_csv(TimeSeries(t.columns[1]), "y"));
    const auto one = sdr({"infer", path("p.csv")});
    const auto two = sdr({"infer", path("x.csv"), path("y.csv")});
    ASSERT_EQ(two.code, 0) << two.err;
    EXPECT_EQ(one.out, two.out);
}

TEST_F(Cli, IdenticalColumnsTie) {
    std::string text = "x,y\n";
    for (int i = 0; i < 4096; ++i) {
        const auto v = io::format_double(std::sin(0.37 * i) + std::cos(1.9 * i * i));
        text += v + "," + v + "\n";
    }
    write("same.csv", text);
    const auto r = sdr({"infer", path("same.csv")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("decision tie"), std::string::npos) << r.out;
}

TEST_F(Cli, NonNumericCellCitesLine) {
    write("bad.csv", "x,y\n1,2\n3,4\nfive,6\n");
    const auto r = sdr({"infer", path("bad.csv")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bad.csv:4"), std::string::npos) << r.err;
    EXPECT_EQ(sdr({"infer", path("missing.csv")}).code, 1);
}

TEST_F(Cli, ShortSeriesIsNumericalError) {
    write("short.csv", "x,y\n1,2\n3,4\n5,7\n");
    EXPECT_EQ(sdr({"infer", path("short.csv")}).code, 2);
}

TEST_F(Cli, SimulateOneTapIsUnitRatio) {
    ASSERT_EQ(sdr({"simulate", "--m", "1", "--n", "1000", "--seed", "9", "--out", path("p.csv"), "--truth",
                   path("t.json")})
                  .code,
              0);
    const auto t = io::read_json(path("t.json"));
    EXPECT_NEAR(t["rho_fwd"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(t["decision"], "tie");
}

TEST_F(Cli, SimulateIsByteIdentical) {
    for (const char* name : {"a.csv", "b.csv"}) {
        ASSERT_EQ(sdr({"simulate", "--cause", "powerlaw:1.2", "--m", "16", "--n", "3000", "--seed", "77", "--out",
                       path(name)})
                      .code,
                  0);
    }
    EXPECT_EQ(io::read_file(path("a.csv")), io::read_file(path("b.csv")));
    ASSERT_EQ(sdr({"simulate", "--m", "16", "--n", "3000", "--seed", "78", "--out", path("c.csv")}).code, 0);
    EXPECT_NE(io::read_file(path("a.csv")), io::read_file(path("c.csv")));
}

TEST_F(Cli, SimulateWhiteCause) {
    ASSERT_EQ(sdr({"simulate", "--cause", "white:2", "--m", "32", "--n", "2000", "--seed", "4", "--out",
                   path("p.csv"), "--truth", path("t.json")})
                  .code,
              0);
    EXPECT_NEAR(io::read_json(path("t.json"))["rho_fwd"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(sdr({"simulate", "--cause", "ar1:1.5", "--m", "4", "--seed", "1", "--out", path("q.csv")}).code, 2);
    EXPECT_EQ(sdr({"simulate", "--cause", "pink", "--m", "4", "--seed", "1", "--out", path("q.csv")}).code, 1);
}

TEST_F(Cli, ExperimentWritesOutputs) {
    const auto r = sdr({"experiment", "--experiment", "concentration", "--m", "4,16", "--trials", "10", "--seed", "5",
                        "--out-dir", path("run")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = io::read_file(path("run/rows.csv"));
    EXPECT_EQ(rows.substr(0, rows.find('\n') + 1), io::rows_csv_header);
    EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 21);
    const auto summary = io::read_json(path("run/summary.json"));
    EXPECT_EQ(summary["base_seed"], 5);
    EXPECT_EQ(summary["groups"].size(), 2U);
    EXPECT_EQ(summary["config"]["mode"], "analytic");
    EXPECT_NE(r.out.find("concentration m=16 D=1"), std::string::npos) << r.out;
}

TEST_F(Cli, ExperimentIsReproducible) {
    const std::vector<std::string> base{"experiment", "--experiment", "decimation", "--m", "4", "-D", "1,2",
                                        "--trials", "3", "--n", "8192", "--seed", "11", "--threads", "2"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out-dir", path("a")});
    b.insert(b.end(), {"--out-dir", path("b")});
    ASSERT_EQ(sdr(a).code, 0);
    ASSERT_EQ(sdr(b).code, 0);
    EXPECT_EQ(io::read_file(path("a/rows.csv")), io::read_file(path("b/rows.csv")));
}

TEST_F(Cli, ExperimentRejectsBadArguments) {
    EXPECT_EQ(sdr({"experiment", "--m", "0", "--seed", "1", "--out-dir", path("o")}).code, 1);
    EXPECT_EQ(sdr({"experiment", "--m", "16,4", "--seed", "1", "--out-dir", path("o")}).code, 1);
    EXPECT_EQ(sdr({"experiment", "--experiment", "nope", "--seed", "1", "--out-dir", path("o")}).code, 1);
    EXPECT_EQ(sdr({"experiment", "--trials", "2", "--out-dir", path("o")}).code, 1);
    EXPECT_EQ(sdr({"experiment", "--trials", "2", "--seed", "1"}).code, 1);
    EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(Cli, ConfigFileAndPrecedence) {
    write("exp.conf",
          "# small run\n"
          "experiment = identifiability\n"
          "m = [4, 8]\n"
          "trials = 6\n"
          "seed = 40\n"
          "out_dir = \"" + path("cfg") + "\"\n");
    const auto r = sdr({"experiment", "--config", path("exp.conf"), "--trials", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = io::read_json(path("cfg/summary.json"));
    EXPECT_EQ(summary["experiment"], "identifiability");
    EXPECT_EQ(summary["base_seed"], 40);
    EXPECT_EQ(summary["config"]["trials"], 4);
    EXPECT_EQ(summary["config"]["m"], (io::json{4, 8}));
}

TEST_F(Cli, ConfigRejectsUnknownKey) {
    write("bad.conf", "seed = 1\nwibble = 3\n");
    const auto r = sdr({"experiment", "--config", path("bad.conf"), "--out-dir", path("o")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bad.conf:2"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("wibble"), std::string::npos) << r.err;
}

TEST_F(Cli, PsdOfConstantIsZero) {
    write("c.csv", std::string("v\n") + [] {
        std::string s;
        for (int i = 0; i < 2048; ++i) s += "3.5\n";
        return s;
    }());
    const auto r = sdr({"psd", path("c.csv"), "--segment-length", "256", "--out", path("s.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = io::spectrum_from_table(io::read_csv(path("s.csv")));
    EXPECT_EQ(s.size(), 256U);
    for (double v : s.values()) EXPECT_NEAR(v, 0.0, 1e-20);
}

TEST_F(Cli, WhitenFitAndApply) {
    ASSERT_EQ(sdr({"simulate", "--cause", "ar1:0.8", "--m", "4", "--n", "65536", "--seed", "2", "--out",
                   path("p.csv")})
                  .code,
              0);
    ASSERT_EQ(sdr({"whiten", "fit", path("p.csv"), "--segment-length", "256", "--out", path("w.json")}).code, 0);
    ASSERT_EQ(sdr({"psd", path("p.csv"), "--column", "x", "--segment-length", "256", "--out", path("sx.csv")}).code, 0);
    const auto r = sdr({"whiten", "apply", "--whitener", path("w.json"), "--spectrum", path("sx.csv"), "--out",
                        path("wx.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto raw = io::spectrum_from_table(io::read_csv(path("sx.csv")));
    const auto white = io::spectrum_from_table(io::read_csv(path("wx.csv")));
    EXPECT_LT(white.max() / white.min(), raw.max() / raw.min());

    ASSERT_EQ(sdr({"whiten", "apply", "--whitener", path("w.json"), "--series", path("p.csv"), "--column", "y",
                   "--out", path("wy.csv")})
                  .code,
              0);
    EXPECT_EQ(io::read_csv(path("wy.csv")).rows(), 65536U);
}

TEST_F(Cli, WhitenGridMismatchIsNumerical) {
    write("w.json", io::to_json(Whitener::identity(FrequencyGrid(8))).dump());
    write("s.csv", io::spectrum_csv(Spectrum::constant(FrequencyGrid(16), 1.0)));
    const auto r = sdr({"whiten", "apply", "--whitener", path("w.json"), "--spectrum", path("s.csv"), "--out",
                        path("o.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(sdr({"whiten", "apply", "--whitener", path("w.json"), "--out", path("o.csv")}).code, 1);
}

TEST_F(Cli, DecimateLength) {
    std::string text = "v\n";
    for (int i = 0; i < 1000; ++i) text += io::format_double(std::sin(0.01 * i)) + "\n";
    write("s.csv", text);
    const auto r = sdr({"decimate", path("s.csv"), "--factor", "4", "--out", path("d.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_csv(path("d.csv")).rows(), 225U);
    EXPECT_EQ(sdr({"decimate", path("s.csv"), "--factor", "0", "--out", path("d.csv")}).code, 1);
}
