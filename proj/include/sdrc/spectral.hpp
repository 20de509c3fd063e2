#pragma once

// Frequency-grid conventions, spectra, and the spectral averaging operator.
//
// A FrequencyGrid of size M samples one period of normalized frequency at
// nu_k = k / M, k = 0..M-1. Bins above M/2 are the negative frequencies, so an
// even spectrum satisfies values[k] == values[(M - k) % M]. The average of a
// function over one period is the plain mean over the M bins.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/fft.hpp"

namespace sdrc {

/// Real-valued, finite sample sequence.
class TimeSeries {
public:
    TimeSeries() = default;

    explicit TimeSeries(std::vector<double> samples, std::string name = {})
        : samples_(std::move(samples)), name_(std::move(name)) {
        detail::require(!samples_.empty(), ErrorKind::InvalidArgument,
                        "time series must have at least one sample");
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            detail::require(std::isfinite(samples_[i]), ErrorKind::InvalidArgument,
                            "non-finite sample at index " + std::to_string(i));
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] double operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// Mean of x_t^2 (not centered).
    [[nodiscard]] double power() const {
        double acc = 0.0;
        for (double v : samples_) acc += v * v;
        return acc / static_cast<double>(samples_.size());
    }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> samples_;
    std::string name_;
};

class FrequencyGrid {
public:
    explicit FrequencyGrid(std::size_t size) : size_(size) {
        detail::require(size >= 2, ErrorKind::InvalidArgument,
                        "frequency grid needs at least 2 bins, got " + std::to_string(size));
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }

    /// Normalized frequency of bin k on [0, 1).
    [[nodiscard]] double nu(std::size_t k) const noexcept {
        return static_cast<double>(k) / static_cast<double>(size_);
    }

    /// Frequency of bin k mapped to [-1/2, 1/2).
    [[nodiscard]] double centered_nu(std::size_t k) const noexcept {
        return 2 * k < size_ ? nu(k) : nu(k) - 1.0;
    }

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

private:
    std::size_t size_;
};

/// Nonnegative function sampled on a FrequencyGrid (PSD or squared response).
class Spectrum {
public:
    Spectrum(FrequencyGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        detail::require(values_.size() == grid_.size(), ErrorKind::InvalidArgument,
                        "spectrum has " + std::to_string(values_.size()) +
                            " values for a grid of " + std::to_string(grid_.size()));
        for (std::size_t k = 0; k < values_.size(); ++k) {
            detail::require(std::isfinite(values_[k]) && values_[k] >= 0.0,
                            ErrorKind::InvalidArgument,
                            "spectrum value at bin " + std::to_string(k) +
                                " must be finite and nonnegative");
        }
    }

    static Spectrum constant(FrequencyGrid grid, double value) {
        return Spectrum(grid, std::vector<double>(grid.size(), value));
    }

    /// Samples f(nu_k) with nu_k in [-1/2, 1/2).
    template <typename F>
    static Spectrum from_function(FrequencyGrid grid, F&& f) {
        std::vector<double> values(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) values[k] = f(grid.centered_nu(k));
        return Spectrum(grid, std::move(values));
    }

    [[nodiscard]] const FrequencyGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t k) const { return values_[k]; }

    [[nodiscard]] double max() const { return *std::max_element(values_.begin(), values_.end()); }
    [[nodiscard]] double min() const { return *std::min_element(values_.begin(), values_.end()); }

    [[nodiscard]] Spectrum scaled(double factor) const {
        auto v = values_;
        for (auto& x : v) x *= factor;
        return Spectrum(grid_, std::move(v));
    }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    FrequencyGrid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Spectrum& a, const Spectrum& b) {
    detail::require(a.grid() == b.grid(), ErrorKind::GridMismatch,
                    "spectra live on grids of size " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
}

[[nodiscard]] inline bool is_even_symmetric(const Spectrum& s, double rel_tol = 1e-12) {
    const std::size_t m = s.size();
    const double scale = std::max(s.max(), std::numeric_limits<double>::min());
    for (std::size_t k = 1; k < m; ++k) {
        if (std::abs(s[k] - s[m - k]) > rel_tol * scale) return false;
    }
    return true;
}

/// Pointwise product on a common grid.
[[nodiscard]] inline Spectrum multiply(const Spectrum& a, const Spectrum& b) {
    require_same_grid(a, b);
    std::vector<double> v(a.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] * b[k];
    return Spectrum(a.grid(), std::move(v));
}

/// Plain mean over the grid: the discrete average over one period. For a
/// PSD this is the process power.
[[nodiscard]] inline double spectral_mean(const Spectrum& s) {
    return std::accumulate(s.values().begin(), s.values().end(), 0.0) /
           static_cast<double>(s.size());
}

/// Relative denominator floor used throughout unless a caller overrides it.
inline constexpr double default_floor_rel = 1e-8;

/// Periodic linear interpolation of a spectrum at normalized frequency nu.
[[nodiscard]] inline double interpolate(const Spectrum& s, double nu) {
    const double m = static_cast<double>(s.size());
    double pos = (nu - std::floor(nu)) * m;
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= s.size()) lo = s.size() - 1;
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * s[lo] + frac * s[(lo + 1) % s.size()];
}

/// Denominator value after applying the relative floor.
[[nodiscard]] inline double floor_value(const Spectrum& den, double floor_rel) {
    const double peak = den.max();
    detail::require(peak > 0.0, ErrorKind::DegenerateSpectrum, "spectrum is identically zero");
    return floor_rel * peak;
}

/// Mean of num / den with the denominator floored at floor_rel * max(den).
[[nodiscard]] inline double spectral_ratio_mean(const Spectrum& num, const Spectrum& den,
                                                double floor_rel) {
    require_same_grid(num, den);
    detail::require(floor_rel >= 0.0, ErrorKind::InvalidArgument, "floor_rel must be >= 0");
    const double fl = floor_value(den, floor_rel);
    double acc = 0.0;
    for (std::size_t k = 0; k < num.size(); ++k) {
        const double d = std::max(den[k], fl);
        detail::require(d > 0.0, ErrorKind::DegenerateSpectrum,
                        "zero denominator at bin " + std::to_string(k) + " with no floor");
        acc += num[k] / d;
    }
    return acc / static_cast<double>(num.size());
}

enum class Window { hann, rectangular };

struct WelchConfig {
    std::size_t segment_length = 1024;
    double overlap_fraction = 0.5;
    Window window = Window::hann;
    /// Remove each segment's mean before transforming.
    bool detrend = true;

    [[nodiscard]] FrequencyGrid grid() const { return FrequencyGrid(segment_length); }

    void validate() const {
        detail::require(segment_length >= 2 && std::has_single_bit(segment_length),
                        ErrorKind::InvalidArgument,
                        "Welch segment length must be a power of two >= 2, got " +
                            std::to_string(segment_length));
        detail::require(overlap_fraction >= 0.0 && overlap_fraction < 1.0,
                        ErrorKind::InvalidArgument, "Welch overlap must lie in [0, 1)");
    }
};

[[nodiscard]] inline std::vector<double> make_window(Window kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (kind == Window::hann) {
        // Periodic Hann, the usual choice for spectral estimation.
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(n));
        }
    }
    return w;
}

/// Welch averaged modified periodogram on the full-period grid of size
/// segment_length. Normalized so that spectral_mean(result) estimates the mean
/// of x_t^2 over the (detrended) segments.
[[nodiscard]] inline Spectrum estimate_psd_welch(const TimeSeries& ts, const WelchConfig& cfg) {
    cfg.validate();
    const std::size_t n = ts.size();
    const std::size_t len = cfg.segment_length;
    detail::require(n >= len, ErrorKind::SeriesTooShort,
                    "series of length " + std::to_string(n) + " is shorter than the Welch segment " +
                        std::to_string(len));
    const auto step = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - cfg.overlap_fraction))));
    const auto window = make_window(cfg.window, len);
    const double window_energy = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

    const auto x = ts.samples();
    std::vector<double> acc(len, 0.0);
    std::vector<fft::complex> buf(len);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + len <= n; start += step) {
        double mean = 0.0;
        if (cfg.detrend) {
            for (std::size_t i = 0; i < len; ++i) mean += x[start + i];
            mean /= static_cast<double>(len);
        }
        for (std::size_t i = 0; i < len; ++i) buf[i] = (x[start + i] - mean) * window[i];
        fft::forward(buf);
        for (std::size_t k = 0; k < len; ++k) acc[k] += std::norm(buf[k]);
        ++segments;
    }

    const double scale = 1.0 / (static_cast<double>(segments) * window_energy);
    std::vector<double> values(len);
    for (std::size_t k = 0; k < len; ++k) {
        // Average mirrored bins so the estimate is exactly even.
        values[k] = 0.5 * (acc[k] + acc[(len - k) % len]) * scale;
    }
    return Spectrum(FrequencyGrid(len), std::move(values));
}

/// Biased autocovariance C(tau) = (1/N) sum_t (x_t - mean)(x_{t+tau} - mean).
[[nodiscard]] inline std::vector<double> autocovariance(const TimeSeries& ts, std::size_t max_lag) {
    const std::size_t n = ts.size();
    detail::require(max_lag < n, ErrorKind::LagTooLarge,
                    "max lag " + std::to_string(max_lag) + " must be below series length " +
                        std::to_string(n));
    const auto x = ts.samples();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::vector<double> c(max_lag + 1, 0.0);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        double acc = 0.0;
        for (std::size_t t = 0; t + tau < n; ++t) acc += (x[t] - mean) * (x[t + tau] - mean);
        c[tau] = acc / static_cast<double>(n);
    }
    return c;
}

}  // namespace sdrc
