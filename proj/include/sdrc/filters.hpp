#pragma once

// FIR mechanisms: representation, convolution, squared frequency response,
// and the random coefficient model (spherically symmetric or iid taps).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/fft.hpp"
#include "sdrc/random.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

/// Impulse response h with h[i + delay] = coeffs[i], zero elsewhere.
class FirFilter {
public:
    explicit FirFilter(std::vector<double> coeffs, int delay = 0)
        : coeffs_(std::move(coeffs)), delay_(delay) {
        detail::require(!coeffs_.empty(), ErrorKind::InvalidArgument,
                        "FIR filter needs at least one coefficient");
        bool nonzero = false;
        for (double b : coeffs_) {
            detail::require(std::isfinite(b), ErrorKind::InvalidArgument,
                            "FIR coefficient is not finite");
            nonzero = nonzero || b != 0.0;
        }
        detail::require(nonzero, ErrorKind::InvalidArgument, "FIR coefficients are all zero");
    }

    static FirFilter identity() { return FirFilter({1.0}); }

    [[nodiscard]] std::size_t length() const noexcept { return coeffs_.size(); }
    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] int delay() const noexcept { return delay_; }

    [[nodiscard]] FirFilter scaled(double c) const {
        auto b = coeffs_;
        for (auto& v : b) v *= c;
        return FirFilter(std::move(b), delay_);
    }

    friend bool operator==(const FirFilter&, const FirFilter&) = default;

private:
    std::vector<double> coeffs_;
    int delay_;
};

/// Valid-region convolution: y[j] = sum_i b_i x[j + m - 1 - i], length N - m + 1.
/// Output sample j sits at input time j + m - 1 + delay; the delay only moves
/// the time axis, it never changes the values.
[[nodiscard]] inline TimeSeries apply_filter(const FirFilter& f, const TimeSeries& x) {
    const std::size_t m = f.length();
    const std::size_t n = x.size();
    detail::require(n >= m, ErrorKind::SeriesTooShort,
                    "series of length " + std::to_string(n) + " is shorter than the filter (" +
                        std::to_string(m) + " taps)");
    const auto& b = f.coeffs();
    const auto xs = x.samples();
    std::vector<double> y(n - m + 1, 0.0);
    for (std::size_t j = 0; j < y.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += b[i] * xs[j + m - 1 - i];
        y[j] = acc;
    }
    return TimeSeries(std::move(y));
}

/// |h^(k/M)|^2 on the grid. When M < m the taps are folded modulo M, which is
/// still the exact DTFT sampled at the grid points.
[[nodiscard]] inline Spectrum squared_frequency_response(const FirFilter& f, FrequencyGrid grid) {
    const std::size_t mgrid = grid.size();
    std::vector<fft::complex> buf(mgrid);
    const auto& b = f.coeffs();
    for (std::size_t i = 0; i < b.size(); ++i) buf[i % mgrid] += b[i];
    fft::forward(buf);
    std::vector<double> values(mgrid);
    for (std::size_t k = 0; k < mgrid; ++k) values[k] = std::norm(buf[k]);
    // Real taps give an even modulus; remove rounding asymmetry.
    for (std::size_t k = 1; 2 * k < mgrid; ++k) {
        const double avg = 0.5 * (values[k] + values[mgrid - k]);
        values[k] = values[mgrid - k] = avg;
    }
    return Spectrum(grid, std::move(values));
}

/// Sum of squared coefficients.
[[nodiscard]] inline double filter_energy(const FirFilter& f) {
    double acc = 0.0;
    for (double b : f.coeffs()) acc += b * b;
    return acc;
}

/// Coefficient of variation (population std over mean) of the values of s.
[[nodiscard]] inline double coefficient_of_variation(const Spectrum& s) {
    const double mean = spectral_mean(s);
    detail::require(mean > 0.0, ErrorKind::DegenerateSpectrum, "CV of a zero spectrum");
    double acc = 0.0;
    for (double v : s.values()) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(s.size())) / mean;
}

[[nodiscard]] inline double cv_squared_response(const FirFilter& f, FrequencyGrid grid) {
    return coefficient_of_variation(squared_frequency_response(f, grid));
}

/// Pointwise reciprocal with the denominator floored at floor_rel * max.
/// Represents the squared modulus of the backward (inverse) mechanism.
[[nodiscard]] inline Spectrum invert_response(const Spectrum& response, double floor_rel) {
    const double fl = floor_value(response, floor_rel);
    std::vector<double> v(response.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double d = std::max(response[k], fl);
        detail::require(d > 0.0, ErrorKind::DegenerateSpectrum,
                        "cannot invert a zero response without a floor");
        v[k] = 1.0 / d;
    }
    return Spectrum(response.grid(), std::move(v));
}

// ---------------------------------------------------------------------------
// Random coefficient model

struct ConstantRadius {
    double r = 1.0;
};

/// Radius distributed as the norm of m iid standard normals.
struct ChiRadius {};

using RadiusDistribution = std::variant<ConstantRadius, ChiRadius>;

enum class IidDistribution { standard_normal, rademacher, uniform_pm_sqrt3 };

/// b = R U with U uniform on the unit sphere.
struct SphericalSampler {
    RadiusDistribution radius = ConstantRadius{};
};

/// b_i iid with mean 0 and variance 1, scaled by 1/sqrt(m).
struct IidSampler {
    IidDistribution dist = IidDistribution::standard_normal;
};

using CoefficientSampler = std::variant<SphericalSampler, IidSampler>;

namespace detail {

inline double draw_iid(Rng& rng, IidDistribution dist) {
    switch (dist) {
        case IidDistribution::standard_normal: return rng.normal();
        case IidDistribution::rademacher: return rng.rademacher();
        case IidDistribution::uniform_pm_sqrt3: return rng.uniform(-std::sqrt(3.0), std::sqrt(3.0));
    }
    return 0.0;
}

inline double draw_radius(const RadiusDistribution& radius, std::size_t m, std::uint64_t seed) {
    if (const auto* c = std::get_if<ConstantRadius>(&radius)) {
        detail::require(c->r > 0.0, ErrorKind::InvalidArgument, "radius must be positive");
        return c->r;
    }
    Rng rng(seed, Stream::Radius);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double z = rng.normal();
        acc += z * z;
    }
    return std::sqrt(acc);
}

}  // namespace detail

/// Draws an m-tap filter (delay 0). Deterministic in seed.
[[nodiscard]] inline FirFilter sample_fir(std::size_t m, const CoefficientSampler& sampler,
                                          std::uint64_t seed) {
    detail::require(m >= 1, ErrorKind::InvalidArgument, "filter length must be >= 1");
    Rng rng(seed, Stream::Filter);
    std::vector<double> b(m);

    if (const auto* iid = std::get_if<IidSampler>(&sampler)) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(m));
        bool nonzero = false;
        for (int attempt = 0; attempt < 16 && !nonzero; ++attempt) {
            for (auto& v : b) {
                v = detail::draw_iid(rng, iid->dist) * scale;
                nonzero = nonzero || v != 0.0;
            }
        }
        detail::require(nonzero, ErrorKind::DegenerateDraw, "iid draw produced an all-zero filter");
        return FirFilter(std::move(b));
    }

    const auto& spherical = std::get<SphericalSampler>(sampler);
    // Normalizing a standard normal vector gives a uniform point on the sphere.
    for (int attempt = 0; attempt < 16; ++attempt) {
        double norm2 = 0.0;
        for (auto& v : b) {
            v = rng.normal();
            norm2 += v * v;
        }
        if (norm2 > 1e-200) {
            const double radius = detail::draw_radius(spherical.radius, m, seed);
            const double scale = radius / std::sqrt(norm2);
            for (auto& v : b) v *= scale;
            return FirFilter(std::move(b));
        }
    }
    throw Error(ErrorKind::DegenerateDraw, "normal vector was numerically zero in 16 draws");
}

}  // namespace sdrc
