#pragma once

// Whitening against a dataset-average PSD, and the frequency-translation
// view of spectral independence (expected generic contrast).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/fft.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

/// Squared-magnitude gain |w^|^2 (gamma already folded in) plus the scale
/// gamma, so that the regular PSDs it defines are gamma / |w^|^2.
class Whitener {
public:
    Whitener(Spectrum gain, double gamma) : gain_(std::move(gain)), gamma_(gamma) {
        detail::require(gamma_ > 0.0 && std::isfinite(gamma_), ErrorKind::InvalidArgument,
                        "whitener scale must be positive");
        detail::require(gain_.min() > 0.0, ErrorKind::InvalidArgument,
                        "whitener gain must be strictly positive");
    }

    static Whitener identity(FrequencyGrid grid) { return Whitener(Spectrum::constant(grid, 1.0), 1.0); }

    [[nodiscard]] const Spectrum& gain() const noexcept { return gain_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] const FrequencyGrid& grid() const noexcept { return gain_.grid(); }

    /// Whitener with reciprocal gain; undoes this one wherever it was unfloored.
    [[nodiscard]] Whitener inverse() const {
        std::vector<double> v(gain_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 / gain_[k];
        return Whitener(Spectrum(gain_.grid(), std::move(v)), 1.0 / gamma_);
    }

private:
    Spectrum gain_;
    double gamma_;
};

/// gain = gamma / mean_spectrum (floored), gamma chosen so the whitened mean
/// spectrum keeps the power of the mean spectrum.
[[nodiscard]] inline Whitener fit_whitener(std::span<const Spectrum> spectra,
                                           double floor_rel = default_floor_rel) {
    detail::require(!spectra.empty(), ErrorKind::EmptyCollection, "no spectra to fit a whitener on");
    const FrequencyGrid grid = spectra.front().grid();
    std::vector<double> mean(grid.size(), 0.0);
    for (const auto& s : spectra) {
        require_same_grid(spectra.front(), s);
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += s[k];
    }
    for (auto& v : mean) v /= static_cast<double>(spectra.size());
    const Spectrum avg(grid, std::move(mean));
    const double fl = floor_value(avg, floor_rel);

    std::vector<double> inv(grid.size());
    double whitened_mean = 0.0;
    for (std::size_t k = 0; k < inv.size(); ++k) {
        inv[k] = 1.0 / std::max(avg[k], fl);
        whitened_mean += avg[k] * inv[k];
    }
    whitened_mean /= static_cast<double>(grid.size());
    const double gamma = spectral_mean(avg) / whitened_mean;
    for (auto& v : inv) v *= gamma;
    return Whitener(Spectrum(grid, std::move(inv)), gamma);
}

[[nodiscard]] inline Spectrum apply_whitener(const Whitener& wh, const Spectrum& s) {
    return multiply(wh.gain(), s);
}

/// Time-domain whitening: multiply the series transform by sqrt(gain),
/// interpolating the gain to the series' own frequency grid.
[[nodiscard]] inline TimeSeries whiten_series(const Whitener& wh, const TimeSeries& x) {
    const std::size_t n = x.size();
    auto spec = fft::forward_real(x.samples(), n);
    for (std::size_t k = 0; k < n; ++k) {
        const double nu = static_cast<double>(k) / static_cast<double>(n);
        spec[k] *= std::sqrt(interpolate(wh.gain(), nu));
    }
    return TimeSeries(fft::inverse_real(std::move(spec)), x.name());
}

namespace detail {

/// One-sided values on the circle [0, 1/2) with nu = 0 and nu = 1/2 glued
/// together, as translations modulo 1/2 require. Mirrored bins are averaged,
/// so the circle's mean equals the full-grid mean for any spectrum.
inline std::vector<double> half_circle(const Spectrum& s) {
    const std::size_t m = s.size();
    const std::size_t h = m / 2;
    std::vector<double> t(h);
    t[0] = 0.5 * (s[0] + s[h]);
    for (std::size_t j = 1; j < h; ++j) t[j] = 0.5 * (s[j] + s[m - j]);
    return t;
}

/// Even spectrum on the full grid whose positive side is the circle shifted by g.
inline std::vector<double> translated(const std::vector<double>& circle, std::size_t g, std::size_t m) {
    const std::size_t h = circle.size();
    std::vector<double> out(m);
    auto at = [&](std::size_t j) { return circle[(j + h - g % h) % h]; };
    out[0] = at(0);
    out[h] = at(0);
    for (std::size_t j = 1; j < h; ++j) out[j] = out[m - j] = at(j);
    return out;
}

}  // namespace detail

/// Output power <|h|^2 (g S)> averaged over all M/2 translations g of the
/// one-sided PSD modulo 1/2. On this discrete group the average equals
/// <S> <|h|^2> exactly.
[[nodiscard]] inline double expected_generic_contrast(const Spectrum& sxx, const FirFilter& f) {
    const std::size_t m = sxx.size();
    detail::require(m % 2 == 0 && m >= 4, ErrorKind::GridMismatch,
                    "translation group needs an even grid of at least 4 bins");
    const Spectrum h2 = squared_frequency_response(f, sxx.grid());
    const auto circle = detail::half_circle(sxx);
    double total = 0.0;
    for (std::size_t g = 0; g < circle.size(); ++g) {
        const auto shifted = detail::translated(circle, g, m);
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += h2[k] * shifted[k];
        total += acc / static_cast<double>(m);
    }
    return total / static_cast<double>(circle.size());
}

/// Actual output power over its expected generic value.
[[nodiscard]] inline double genericity_ratio(const Spectrum& sxx, const FirFilter& f) {
    const Spectrum h2 = squared_frequency_response(f, sxx.grid());
    return spectral_mean(multiply(h2, sxx)) / expected_generic_contrast(sxx, f);
}

}  // namespace sdrc
