#pragma once

// Decimation: ideal brick-wall anti-aliasing followed by keeping one sample in D.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/fft.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/gen_model.hpp"
#include "sdrc/sdr.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

/// Zeroes every DFT bin of the whole series with |nu| >= 1/(2D) and
/// transforms back. Circular: the series is treated as one period.
[[nodiscard]] inline TimeSeries ideal_lowpass(const TimeSeries& x, std::size_t factor) {
    detail::require(factor >= 1, ErrorKind::InvalidArgument, "decimation factor must be >= 1");
    const std::size_t n = x.size();
    detail::require(n >= 2 * factor, ErrorKind::SeriesTooShort,
                    "low-pass needs at least 2D samples, got " + std::to_string(n));
    auto spec = fft::forward_real(x.samples(), n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t dist = std::min(k, n - k);
        // |nu| = dist / n >= 1 / (2D)  <=>  2 D dist >= n
        if (2 * factor * dist >= n) spec[k] = 0.0;
    }
    return TimeSeries(fft::inverse_real(std::move(spec)), x.name());
}

/// output[k] = x[k D], length floor(N / D).
[[nodiscard]] inline TimeSeries decimate(const TimeSeries& x, std::size_t factor) {
    detail::require(factor >= 1, ErrorKind::InvalidArgument, "decimation factor must be >= 1");
    const std::size_t len = x.size() / factor;
    detail::require(len >= 1, ErrorKind::SeriesTooShort, "series shorter than decimation factor");
    std::vector<double> out(len);
    for (std::size_t k = 0; k < len; ++k) out[k] = x[k * factor];
    return TimeSeries(std::move(out), x.name());
}

/// Predicted PSD after ideal low-pass and decimation, S'(nu) = S(nu / D) / D.
/// The input lives on a grid of size L (a multiple of D); the prediction is
/// exact on the grid of size L / D, whose bin j maps to input bin j (or its
/// negative-frequency counterpart).
[[nodiscard]] inline Spectrum decimated_psd_prediction(const Spectrum& s, std::size_t factor) {
    detail::require(factor >= 1, ErrorKind::InvalidArgument, "decimation factor must be >= 1");
    const std::size_t in = s.size();
    detail::require(in % factor == 0, ErrorKind::GridMismatch,
                    "grid of " + std::to_string(in) + " bins is not divisible by D = " +
                        std::to_string(factor));
    const std::size_t out = in / factor;
    const FrequencyGrid grid(out);
    std::vector<double> v(out);
    const double scale = 1.0 / static_cast<double>(factor);
    for (std::size_t j = 0; j < out; ++j) {
        const std::size_t src = 2 * j < out ? j : in - out + j;
        v[j] = scale * s[src];
    }
    return Spectrum(grid, std::move(v));
}

/// K = max_{|nu| < 1/2D} S(nu) / int_0^{1/2D} S(nu) dnu, from a spectrum on a
/// fine grid (rectangle rule for the integral).
[[nodiscard]] inline double decimation_constant(const Spectrum& s, std::size_t factor) {
    const std::size_t m = s.size();
    double peak = 0.0;
    double integral = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t dist = std::min(k, m - k);
        if (2 * factor * dist >= m) continue;
        peak = std::max(peak, s[k]);
        if (k == dist) integral += s[k] / static_cast<double>(m);
    }
    detail::require(integral > 0.0, ErrorKind::DegenerateSpectrum, "no power in the pass band");
    return peak / integral;
}

/// CV of the squared response seen between decimated streams, |h(nu / D)|^2
/// on |nu| <= 1/2, evaluated on a grid of the given size.
[[nodiscard]] inline double decimated_response_cv(const FirFilter& f, std::size_t factor,
                                                  FrequencyGrid grid) {
    const Spectrum fine = squared_frequency_response(f, FrequencyGrid(grid.size() * factor));
    return coefficient_of_variation(decimated_psd_prediction(fine, factor));
}

struct DecimationConfig {
    std::size_t factor = 2;
    /// Fraction of samples discarded at each end after low-pass filtering.
    double edge_trim = 0.05;
};

/// Low-pass, trim edges, then decimate. D = 1 leaves the series untouched.
[[nodiscard]] inline TimeSeries lowpass_and_decimate(const TimeSeries& x, const DecimationConfig& cfg) {
    detail::require(cfg.edge_trim >= 0.0 && cfg.edge_trim < 0.5, ErrorKind::InvalidArgument,
                    "edge trim must lie in [0, 0.5)");
    if (cfg.factor == 1) return x;
    const TimeSeries filtered = ideal_lowpass(x, cfg.factor);
    const auto cut = static_cast<std::size_t>(std::floor(cfg.edge_trim * static_cast<double>(x.size())));
    const auto s = filtered.samples();
    TimeSeries trimmed(std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(cut),
                                           s.end() - static_cast<std::ptrdiff_t>(cut)),
                       x.name());
    return decimate(trimmed, cfg.factor);
}

struct DecimatedSdrResult {
    SdrReport report;
    /// Constant K of the decimated concentration bound, from the analytic cause PSD.
    double k_constant = 0.0;
    /// Analytic CV of the decimated squared response.
    double response_cv = 0.0;
};

/// Generates a cause of length n, filters it with f, decimates both streams
/// and infers the direction on the decimated pair.
[[nodiscard]] inline DecimatedSdrResult decimated_sdr_experiment(
    const CauseSpec& spec, const FirFilter& f, const DecimationConfig& dec, std::size_t n,
    std::uint64_t seed, const WelchConfig& welch = {}, double floor_rel = default_floor_rel) {
    const std::size_t m = f.length();
    detail::require(n > m, ErrorKind::InvalidArgument, "series length must exceed filter length");
    const TimeSeries raw = sample_cause(spec, n + m - 1, seed);
    const TimeSeries y = apply_filter(f, raw);
    const auto xs = raw.samples();
    const TimeSeries x(std::vector<double>(xs.begin() + static_cast<std::ptrdiff_t>(m - 1), xs.end()));

    DecimatedSdrResult out;
    out.report = infer_direction(lowpass_and_decimate(x, dec), lowpass_and_decimate(y, dec), welch,
                                 floor_rel);
    const FrequencyGrid grid = analytic_grid_for(m * dec.factor);
    out.k_constant = decimation_constant(analytic_psd(spec, grid), dec.factor);
    out.response_cv = decimated_response_cv(f, dec.factor, analytic_grid_for(m));
    return out;
}

}  // namespace sdrc
