#pragma once

// Cause processes and the forward generative model: a cause with a known
// PSD is convolved with a randomly drawn FIR mechanism.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/fft.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/random.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

namespace cause {

struct White {
    double power = 1.0;
};

/// x_t = a x_{t-1} + e_t.
struct Ar1 {
    double a = 0.5;
    double power = 1.0;
};

/// x_t = a1 x_{t-1} + a2 x_{t-2} + e_t.
struct Ar2 {
    double a1 = 0.5;
    double a2 = -0.25;
    double power = 1.0;
};

/// S(nu) proportional to (|nu| + floor)^-exponent.
struct PowerLaw {
    double exponent = 1.0;
    double floor = 0.01;
    double power = 1.0;
};

/// Arbitrary tabulated PSD; interpolated when sampled on other grids.
struct Table {
    Spectrum psd;
};

}  // namespace cause

using CauseSpec = std::variant<cause::White, cause::Ar1, cause::Ar2, cause::PowerLaw, cause::Table>;

namespace detail {

inline bool ar2_stationary(double a1, double a2) {
    return std::abs(a2) < 1.0 && a2 + a1 < 1.0 && a2 - a1 < 1.0;
}

inline void validate(const CauseSpec& spec) {
    std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, cause::Table>) {
                require(spectral_mean(c.psd) > 0.0, ErrorKind::InvalidArgument,
                        "tabulated cause PSD has zero power");
            } else {
                require(c.power > 0.0 && std::isfinite(c.power), ErrorKind::InvalidArgument,
                        "cause power must be positive");
                if constexpr (std::is_same_v<T, cause::Ar1>) {
                    require(std::abs(c.a) < 1.0, ErrorKind::UnstableProcess,
                            "AR(1) coefficient must satisfy |a| < 1");
                } else if constexpr (std::is_same_v<T, cause::Ar2>) {
                    require(ar2_stationary(c.a1, c.a2), ErrorKind::UnstableProcess,
                            "AR(2) coefficients lie outside the stationarity triangle");
                } else if constexpr (std::is_same_v<T, cause::PowerLaw>) {
                    require(c.floor > 0.0, ErrorKind::InvalidArgument,
                            "power-law floor must be positive");
                    require(c.exponent >= 0.0, ErrorKind::InvalidArgument,
                            "power-law exponent must be nonnegative");
                }
            }
        },
        spec);
}

/// Unnormalized PSD shape at centered frequency nu.
inline double psd_shape(const CauseSpec& spec, double nu) {
    const double w = 2.0 * std::numbers::pi * nu;
    return std::visit(
        [&](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, cause::White>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, cause::Ar1>) {
                return 1.0 / (1.0 + c.a * c.a - 2.0 * c.a * std::cos(w));
            } else if constexpr (std::is_same_v<T, cause::Ar2>) {
                const std::complex<double> z = std::polar(1.0, -w);
                return 1.0 / std::norm(1.0 - c.a1 * z - c.a2 * z * z);
            } else if constexpr (std::is_same_v<T, cause::PowerLaw>) {
                return std::pow(std::abs(nu) + c.floor, -c.exponent);
            } else {
                return interpolate(c.psd, nu);
            }
        },
        spec);
}

inline double target_power(const CauseSpec& spec) {
    return std::visit(
        [](const auto& c) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, cause::Table>) {
                return spectral_mean(c.psd);
            } else {
                return c.power;
            }
        },
        spec);
}

}  // namespace detail

/// Closed-form PSD on the grid, scaled so its grid mean equals the power.
[[nodiscard]] inline Spectrum analytic_psd(const CauseSpec& spec, FrequencyGrid grid) {
    detail::validate(spec);
    const Spectrum shape =
        Spectrum::from_function(grid, [&](double nu) { return detail::psd_shape(spec, nu); });
    return shape.scaled(detail::target_power(spec) / spectral_mean(shape));
}

namespace detail {

/// Shapes unit white noise in the frequency domain: multiply the transform by
/// sqrt(S) and invert. The result is circularly stationary with PSD S.
inline std::vector<double> spectral_shaping(const CauseSpec& spec, std::size_t n, Rng& rng) {
    std::vector<fft::complex> buf(n);
    for (auto& v : buf) v = rng.normal();
    fft::forward(buf);
    if (n >= 2) {
        const Spectrum psd = analytic_psd(spec, FrequencyGrid(n));
        for (std::size_t k = 0; k < n; ++k) buf[k] *= std::sqrt(psd[k]);
    } else {
        buf[0] *= std::sqrt(target_power(spec));
    }
    return fft::inverse_real(std::move(buf));
}

inline std::size_t burn_in(double correlation_length) {
    const double len = 10.0 * correlation_length;
    return std::max<std::size_t>(1024, static_cast<std::size_t>(std::ceil(len)));
}

}  // namespace detail

/// One realization of length n. White and AR causes are generated by
/// recursion on Gaussian innovations after a burn-in; power-law and tabulated
/// causes by spectral shaping. Deterministic in seed.
[[nodiscard]] inline TimeSeries sample_cause(const CauseSpec& spec, std::size_t n,
                                             std::uint64_t seed) {
    detail::require(n >= 1, ErrorKind::InvalidArgument, "series length must be >= 1");
    detail::validate(spec);
    Rng rng(seed, Stream::Cause);
    std::vector<double> x(n);

    if (const auto* w = std::get_if<cause::White>(&spec)) {
        const double sd = std::sqrt(w->power);
        for (auto& v : x) v = sd * rng.normal();
    } else if (const auto* ar = std::get_if<cause::Ar1>(&spec)) {
        const double sd = std::sqrt(ar->power * (1.0 - ar->a * ar->a));
        const double corr = ar->a == 0.0 ? 1.0 : -1.0 / std::log(std::abs(ar->a));
        const std::size_t warm = detail::burn_in(corr);
        double prev = 0.0;
        for (std::size_t t = 0; t < warm + n; ++t) {
            prev = ar->a * prev + sd * rng.normal();
            if (t >= warm) x[t - warm] = prev;
        }
    } else if (const auto* ar2 = std::get_if<cause::Ar2>(&spec)) {
        const double a1 = ar2->a1, a2 = ar2->a2;
        // gamma0 = sigma^2 (1 - a2) / ((1 + a2)((1 - a2)^2 - a1^2))
        const double gain = (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
        const double sd = std::sqrt(ar2->power / gain);
        // Slowest root modulus sets the correlation length.
        const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 + 4.0 * a2));
        const double r = std::max(std::abs((a1 + disc) / 2.0), std::abs((a1 - disc) / 2.0));
        const double corr = r <= 0.0 ? 1.0 : -1.0 / std::log(r);
        const std::size_t warm = detail::burn_in(corr);
        double p1 = 0.0, p2 = 0.0;
        for (std::size_t t = 0; t < warm + n; ++t) {
            const double v = a1 * p1 + a2 * p2 + sd * rng.normal();
            p2 = p1;
            p1 = v;
            if (t >= warm) x[t - warm] = v;
        }
    } else {
        x = detail::spectral_shaping(spec, n, rng);
    }
    return TimeSeries(std::move(x));
}

/// Grid on which ground-truth spectra are evaluated for an m-tap mechanism:
/// at least 4096 bins and at least 16 m.
[[nodiscard]] inline FrequencyGrid analytic_grid_for(std::size_t m) {
    return FrequencyGrid(std::max<std::size_t>(4096, std::bit_ceil(16 * std::max<std::size_t>(m, 1))));
}

struct GeneratedPair {
    TimeSeries x;
    TimeSeries y;
    FirFilter true_filter;
    Spectrum true_sxx;
    std::uint64_t seed;
};

/// Samples a cause of length n + m - 1, draws the mechanism, and returns the
/// aligned pair (both of length n): y[t] = sum_i b_i x[t - i].
[[nodiscard]] inline GeneratedPair generate_pair(const CauseSpec& spec, std::size_t m,
                                                 const CoefficientSampler& sampler, std::size_t n,
                                                 std::uint64_t seed) {
    detail::require(n > m, ErrorKind::InvalidArgument,
                    "pair length " + std::to_string(n) + " must exceed filter length " +
                        std::to_string(m));
    const TimeSeries raw = sample_cause(spec, n + m - 1, seed);
    FirFilter filter = sample_fir(m, sampler, seed);
    TimeSeries y = apply_filter(filter, raw);
    const auto xs = raw.samples();
    TimeSeries x(std::vector<double>(xs.begin() + static_cast<std::ptrdiff_t>(m - 1), xs.end()), "x");
    Spectrum sxx = analytic_psd(spec, analytic_grid_for(m));
    return {std::move(x), TimeSeries(std::vector<double>(y.samples().begin(), y.samples().end()), "y"),
            std::move(filter), std::move(sxx), seed};
}

}  // namespace sdrc
