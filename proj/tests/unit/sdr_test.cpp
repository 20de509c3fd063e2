#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/gen_model.hpp"
#include "sdrc/sdr.hpp"

using namespace sdrc;

TEST(SdrFromSpectra, WhiteCauseIsOne) {
    const FrequencyGrid g(256);
    const auto syy = Spectrum::from_function(g, [](double nu) { return oracle::ar1_psd(0.8, nu); });
    EXPECT_NEAR(sdr_from_spectra(Spectrum::constant(g, 3.0), syy), 1.0, 1e-14);
}

TEST(SdrFromSpectra, IdentityMechanismIsOne) {
    const auto s = Spectrum::from_function(FrequencyGrid(256), [](double nu) { return oracle::ar1_psd(0.8, nu); });
    EXPECT_NEAR(sdr_from_spectra(s, s), 1.0, 1e-14);
}

TEST(SdrFromSpectra, TwoBinHandValue) {
    const FrequencyGrid g(2);
    EXPECT_NEAR(sdr_from_spectra(Spectrum(g, {1, 3}), Spectrum(g, {2, 3})), 2.5 / 3.0, 1e-15);
}

TEST(SdrFromSpectra, ZeroPowerIsDegenerate) {
    const FrequencyGrid g(4);
    try {
        (void)sdr_from_spectra(Spectrum::constant(g, 1.0), Spectrum::constant(g, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateSpectrum);
    }
}

TEST(SdrForwardFromFilter, Examples) {
    const FrequencyGrid g(4096);
    const auto ar = Spectrum::from_function(g, [](double nu) { return oracle::ar1_psd(0.9, nu); });
    EXPECT_NEAR(sdr_forward_from_filter(ar, FirFilter::identity()), 1.0, 1e-14);
    EXPECT_NEAR(sdr_forward_from_filter(Spectrum::constant(g, 2.0), sample_fir(50, SphericalSampler{}, 3)), 1.0, 1e-13);
}

TEST(SdrForwardFromFilter, DifferencerOnAr1) {
    const double a = 0.9;
    const FrequencyGrid g(4096);
    const auto sxx = Spectrum::from_function(g, [&](double nu) { return oracle::ar1_psd(a, nu); });
    const std::vector<double> b{1.0, -1.0};
    const double rho = sdr_forward_from_filter(sxx, FirFilter(b));
    // Quadrature oracle: <|h|^2 S> / (<S> |b|^2).
    const std::size_t fine = 1U << 18;
    const double py = oracle::integrate([&](double nu) { return oracle::response_sq(b, nu) * oracle::ar1_psd(a, nu); }, fine);
    const double px = oracle::integrate([&](double nu) { return oracle::ar1_psd(a, nu); }, fine);
    EXPECT_NEAR(rho, py / (px * 2.0), 1e-8);
    // Closed form: 2 (C(0) - C(1)) / (2 C(0)) = 1 - a. The differencer boosts
    // the band where S_xx is small, so the output power falls short of the
    // white-noise prediction.
    EXPECT_NEAR(rho, 1.0 - a, 1e-8);
    EXPECT_LT(rho, 1.0);
}

TEST(SdrForwardFromFilter, AgreesWithSpectraPath) {
    const auto sxx = analytic_psd(cause::Ar2{1.2, -0.5, 1.0}, FrequencyGrid(2048));
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const FirFilter f = sample_fir(1 + s * 6, SphericalSampler{}, s);
        const auto syy = multiply(squared_frequency_response(f, sxx.grid()), sxx);
        EXPECT_NEAR(sdr_forward_from_filter(sxx, f), sdr_from_spectra(sxx, syy), 1e-10);
    }
}

TEST(SdrForwardFromFilter, GridTooSmall) {
    EXPECT_THROW((void)sdr_forward_from_filter(Spectrum::constant(FrequencyGrid(4), 1.0), FirFilter({1, 1, 1, 1, 1})), Error);
}

TEST(Decide, RuleAndTie) {
    EXPECT_EQ(decide(1.2, 0.5), Direction::XtoY);
    EXPECT_EQ(decide(0.5, 1.2), Direction::YtoX);
    EXPECT_EQ(decide(1.0, 1.0), Direction::tie);
    EXPECT_EQ(decide(1.0, 1.0 + 1e-12), Direction::tie);
    EXPECT_EQ(decide(1.0, 1.0 + 1e-6), Direction::YtoX);
}

TEST(ForwardBackwardBound, UnitImpulseIsEqualityCase) {
    const auto fb = forward_backward_bound(FirFilter::identity(), FrequencyGrid(64));
    EXPECT_DOUBLE_EQ(fb.cv, 0.0);
    EXPECT_DOUBLE_EQ(fb.product, 1.0);
    EXPECT_DOUBLE_EQ(fb.bound, 1.0);
}

TEST(ForwardBackwardBound, TwoTapWithZeroIsBelowOne) {
    const auto fb = forward_backward_bound(FirFilter({M_SQRT1_2, M_SQRT1_2}), FrequencyGrid(1024));
    EXPECT_LT(fb.product, 1.0);
    EXPECT_LE(fb.alpha, 0.0 + 1e-12);  // max |h|^2 = 2 <h|^2>, so alpha = 0
    EXPECT_NEAR(fb.bound, 1.0, 1e-12);
}

TEST(ForwardBackwardBound, TwoOneFilterAgainstQuadrature) {
    const std::vector<double> b{2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0)};
    const auto fb = forward_backward_bound(FirFilter(b), FrequencyGrid(4096));
    EXPECT_NEAR(fb.alpha, 0.2, 1e-12);
    const std::size_t fine = 1U << 18;
    const double mean = oracle::integrate([&](double nu) { return oracle::response_sq(b, nu); }, fine);
    const double inv = oracle::integrate([&](double nu) { return 1.0 / oracle::response_sq(b, nu); }, fine);
    const double sq = oracle::integrate([&](double nu) { return std::pow(oracle::response_sq(b, nu) - mean, 2); }, fine);
    const double cv = std::sqrt(sq) / mean;
    EXPECT_NEAR(fb.product, 1.0 / (mean * inv), 1e-9);
    EXPECT_NEAR(fb.cv, cv, 1e-9);
    EXPECT_NEAR(fb.bound, 1.0 / (1.0 + 0.2 * cv * cv), 1e-9);
    EXPECT_LE(fb.product, fb.bound);
}

TEST(ForwardBackwardBound, ProductEqualsSdrProductForAnyCause) {
    const auto sxx = analytic_psd(cause::Ar1{0.7, 1.0}, FrequencyGrid(2048));
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const FirFilter f = sample_fir(16, SphericalSampler{}, s);
        const auto h2 = squared_frequency_response(f, sxx.grid());
        const auto syy = multiply(h2, sxx);
        const double prod = sdr_from_spectra(sxx, syy) * sdr_from_spectra(syy, sxx);
        EXPECT_NEAR(prod, forward_backward_bound(h2).product, 1e-10);
    }
}

TEST(ForwardBackwardBound, PropertyOverRandomFilters) {
    int checked = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const std::size_t m = 2 + s % 255;
        const FirFilter f = sample_fir(m, SphericalSampler{}, 1000 + s);
        const FrequencyGrid g(std::bit_ceil(16 * m));
        const auto h2 = squared_frequency_response(f, g);
        if (h2.min() <= default_floor_rel * h2.max()) continue;  // floor binding
        const auto fb = forward_backward_bound(h2);
        ASSERT_LT(fb.product, 1.0) << s;
        if (fb.alpha > 0.0) ASSERT_LE(fb.product, fb.bound + 1e-10) << s;
        ++checked;
    }
    EXPECT_GT(checked, 900);
}

TEST(SdrReport, FieldsAndInvariants) {
    const auto sxx = analytic_psd(cause::Ar1{0.5, 1.0}, FrequencyGrid(512));
    const auto syy = multiply(squared_frequency_response(FirFilter({1.0, 0.4, -0.2}), sxx.grid()), sxx);
    const auto r = sdr_report(sxx, syy);
    EXPECT_NEAR(r.fb_product, r.rho_forward * r.rho_backward, 1e-12);
    EXPECT_EQ(r.decision, r.rho_forward > r.rho_backward ? Direction::XtoY : Direction::YtoX);
    ASSERT_TRUE(r.cv_response.has_value());
    ASSERT_TRUE(r.alpha_margin.has_value());
    EXPECT_NEAR(*r.cv_response, cv_squared_response(FirFilter({1.0, 0.4, -0.2}), sxx.grid()), 1e-12);
}

TEST(SdrReport, ScaleInvariance) {
    const auto sxx = analytic_psd(cause::Ar1{0.6, 1.0}, FrequencyGrid(512));
    const auto syy = multiply(squared_frequency_response(sample_fir(8, SphericalSampler{}, 2), sxx.grid()), sxx);
    const auto r = sdr_report(sxx, syy);
    const auto s = sdr_report(sxx.scaled(4.0), syy.scaled(0.01));
    EXPECT_NEAR(s.rho_forward, r.rho_forward, 1e-10 * r.rho_forward);
    EXPECT_NEAR(s.rho_backward, r.rho_backward, 1e-10 * r.rho_backward);
}

TEST(InferDirection, WhiteCauseRandomFilter) {
    int correct = 0, in_band = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        const auto pair = generate_pair(cause::White{1.0}, 64, SphericalSampler{}, 1U << 16, 500 + s);
        const auto r = infer_direction(pair.x, pair.y);
        correct += r.decision == Direction::XtoY ? 1 : 0;
        in_band += (r.rho_forward >= 0.9 && r.rho_forward <= 1.1) ? 1 : 0;
    }
    EXPECT_GE(correct, 190);
    EXPECT_GE(in_band, 190);
}

TEST(InferDirection, AntisymmetricUnderSwap) {
    for (int s = 0; s < 10; ++s) {
        const auto pair = generate_pair(cause::Ar1{0.5, 1.0}, 16, SphericalSampler{}, 1U << 14, 40 + s);
        const auto fwd = infer_direction(pair.x, pair.y);
        const auto bwd = infer_direction(pair.y, pair.x);
        EXPECT_EQ(fwd.rho_forward, bwd.rho_backward);
        EXPECT_EQ(fwd.rho_backward, bwd.rho_forward);
        if (fwd.decision == Direction::XtoY) EXPECT_EQ(bwd.decision, Direction::YtoX);
        if (fwd.decision == Direction::YtoX) EXPECT_EQ(bwd.decision, Direction::XtoY);
    }
}

TEST(InferDirection, IdenticalSeriesTie) {
    const TimeSeries x(oracle::white_noise(8192, 6));
    const auto r = infer_direction(x, x);
    EXPECT_DOUBLE_EQ(r.rho_forward, 1.0);
    EXPECT_DOUBLE_EQ(r.rho_backward, 1.0);
    EXPECT_EQ(r.decision, Direction::tie);
}

TEST(InferDirection, ScaleInvariance) {
    const auto pair = generate_pair(cause::Ar1{0.8, 1.0}, 8, SphericalSampler{}, 1U << 14, 3);
    std::vector<double> xs(pair.x.samples().begin(), pair.x.samples().end());
    std::vector<double> ys(pair.y.samples().begin(), pair.y.samples().end());
    for (auto& v : xs) v *= -3.0;
    for (auto& v : ys) v *= 0.25;
    const auto a = infer_direction(pair.x, pair.y);
    const auto b = infer_direction(TimeSeries(xs), TimeSeries(ys));
    EXPECT_NEAR(a.rho_forward, b.rho_forward, 1e-10 * a.rho_forward);
    EXPECT_NEAR(a.rho_backward, b.rho_backward, 1e-10 * a.rho_backward);
}

TEST(InferDirection, TooShort) {
    try {
        (void)infer_direction(TimeSeries(std::vector<double>(10, 1.0)), TimeSeries(std::vector<double>(10, 1.0)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SeriesTooShort);
    }
}
