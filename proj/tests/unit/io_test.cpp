#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>

#include "sdrc/io.hpp"

using namespace sdrc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "sdrc_io_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string error_text(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_EQ(io::format_double(1.0), "1");
    EXPECT_EQ(io::format_double(-2.5e-10), "-2.5e-10");
    for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e300, 5e-324}) {
        const auto text = io::format_double(v);
        double back = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        EXPECT_EQ(back, v) << text;
    }
}

TEST(ParseCsv, HeaderAndColumns) {
    const auto t = io::parse_csv("x, y\n1,2\n3 ,4.5\n", "mem");
    ASSERT_EQ(t.header.size(), 2U);
    EXPECT_EQ(t.header[1], "y");
    EXPECT_EQ(t.rows(), 2U);
    EXPECT_EQ(t.columns[1][1], 4.5);
    EXPECT_EQ(t.index_of("y"), 1U);
    EXPECT_THROW((void)t.index_of("z"), Error);
}

TEST(ParseCsv, NoHeaderCommentsAndBlankLines) {
    const auto t = io::parse_csv("# a comment\n\n1\n+2\n  \n-3e1\n# end", "mem");
    EXPECT_TRUE(t.header.empty());
    ASSERT_EQ(t.rows(), 3U);
    EXPECT_EQ(t.columns[0][1], 2.0);
    EXPECT_EQ(t.columns[0][2], -30.0);
}

TEST(ParseCsv, ErrorsCiteLine) {
    const auto bad = error_text([] { (void)io::parse_csv("x,y\n1,2\n3,abc\n", "pair.csv"); });
    EXPECT_NE(bad.find("pair.csv:3"), std::string::npos) << bad;
    EXPECT_NE(bad.find("abc"), std::string::npos) << bad;
    const auto ragged = error_text([] { (void)io::parse_csv("1,2\n3\n", "r.csv"); });
    EXPECT_NE(ragged.find("r.csv:2"), std::string::npos) << ragged;
    const auto nonfinite = error_text([] { (void)io::parse_csv("1\nnan\n", "n.csv"); });
    EXPECT_NE(nonfinite.find("n.csv:2"), std::string::npos) << nonfinite;
    EXPECT_THROW((void)io::parse_csv("x,y\n", "empty"), Error);
    try {
        (void)io::parse_csv("", "empty");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_FALSE(e.is_numerical());
    }
}

TEST(Csv, PairRoundTrip) {
    const TimeSeries x({0.1, -1.0 / 3.0, 1e-20}), y({2.0, 3.0, 4.0});
    const auto t = io::parse_csv(io::pair_csv(x, y), "mem");
    EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(t.columns[0], std::vector<double>(x.samples().begin(), x.samples().end()));
    EXPECT_EQ(t.columns[1], std::vector<double>(y.samples().begin(), y.samples().end()));
    EXPECT_THROW((void)io::pair_csv(x, TimeSeries({1.0})), Error);
}

TEST(Csv, SpectrumRoundTrip) {
    const Spectrum s(FrequencyGrid(4), {1.0, 0.5, 0.25, 0.5});
    const auto text = io::spectrum_csv(s);
    EXPECT_EQ(text.substr(0, 9), "nu,value\n");
    const auto back = io::spectrum_from_table(io::parse_csv(text, "mem"));
    EXPECT_EQ(back, s);
    const auto single = io::spectrum_from_table(io::parse_csv("3\n4\n", "mem"));
    EXPECT_EQ(single.size(), 2U);
    EXPECT_EQ(single[1], 4.0);
}

TEST(Csv, RowsHeaderAndFormat) {
    ResultRow r{ExperimentKind::fb_product, "", EvalMode::analytic, 4, 1, 2, 3, 0.5, 1.5, 0.75, 0.1, 0.9, false};
    const auto text = io::rows_csv({r});
    EXPECT_EQ(text, std::string(io::rows_csv_header) + "fb_product,,analytic,4,1,2,3,0.5,1.5,0.75,0.1,0.9,0\n");
    r.bound.reset();
    r.decision_correct = true;
    EXPECT_NE(io::rows_csv({r}).find(",0.1,,1\n"), std::string::npos);
}

TEST(Json, FilterRoundTrip) {
    const FirFilter f({0.6, -0.8}, 2);
    const auto back = io::filter_from_json(io::to_json(f));
    EXPECT_EQ(back, f);
    EXPECT_THROW((void)io::filter_from_json(io::json{{"taps", 1}}), Error);
}

TEST(Json, ReportRoundTrip) {
    SdrReport r;
    r.rho_forward = 0.9;
    r.rho_backward = 1.2;
    r.decision = Direction::YtoX;
    r.cv_response = 0.3;
    r.fb_product = 1.08;
    const auto back = io::report_from_json(io::to_json(r));
    EXPECT_EQ(back.rho_forward, 0.9);
    EXPECT_EQ(back.decision, Direction::YtoX);
    EXPECT_EQ(back.cv_response, 0.3);
    EXPECT_FALSE(back.fb_bound.has_value());
    EXPECT_EQ(io::to_json(r)["fb_bound"], nullptr);
}

TEST(Json, DecompositionRoundTrip) {
    DivergenceDecomposition d{1.0, 0.5, 0.25, 0.25, 1e-17, 1.2};
    const auto back = io::decomposition_from_json(io::to_json(d));
    EXPECT_EQ(io::to_json(back), io::to_json(d));
}

TEST(Json, WhitenerRoundTripAndValidation) {
    const Whitener w(Spectrum(FrequencyGrid(4), {1.0, 2.0, 3.0, 2.0}), 1.5);
    const auto back = io::whitener_from_json(io::to_json(w));
    EXPECT_EQ(back.gain(), w.gain());
    EXPECT_EQ(back.gamma(), 1.5);
    auto j = io::to_json(w);
    j["grid"] = 8;
    EXPECT_THROW((void)io::whitener_from_json(j), Error);
}

TEST(Files, AtomicWriteAndRead) {
    const auto p = scratch("nested/out.csv");
    fs::remove_all(p.parent_path());
    io::write_atomic(p, "1\n2\n");
    EXPECT_EQ(io::read_file(p), "1\n2\n");
    io::write_atomic(p, "3\n");
    EXPECT_EQ(io::read_csv(p).columns[0], std::vector<double>{3.0});
    auto tmp = p;
    tmp += ".tmp";
    EXPECT_FALSE(fs::exists(tmp));
    try {
        (void)io::read_file(scratch("missing.csv"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(Files, ReadJsonReportsParseErrors) {
    const auto p = scratch("bad.json");
    io::write_atomic(p, "{\"a\": ");
    try {
        (void)io::read_json(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
    }
}

TEST(Json, SummaryHasSeedRule) {
    ExperimentConfig cfg;
    cfg.m_values = {4};
    cfg.trials = 3;
    cfg.threads = 1;
    const auto r = run_experiment(cfg);
    const auto j = io::summary_json(r, cfg.base_seed);
    EXPECT_EQ(j["experiment"], "concentration");
    EXPECT_EQ(j["rows"], 3);
    EXPECT_EQ(j["groups"].size(), 1U);
    EXPECT_TRUE(j["groups"][0]["concentration_bound"].is_number());
    EXPECT_TRUE(j["groups"][0]["k_constant"].is_null());
}
