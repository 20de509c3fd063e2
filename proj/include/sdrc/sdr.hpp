#pragma once

// Spectral dependency ratios and the direction decision built on them.

#include <algorithm>
#include <cmath>
#include <optional>

#include "sdrc/error.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

enum class Direction { XtoY, YtoX, tie };

constexpr std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::XtoY: return "XtoY";
        case Direction::YtoX: return "YtoX";
        case Direction::tie: return "tie";
    }
    return "tie";
}

inline constexpr double default_tie_tolerance = 1e-9;

struct SdrReport {
    double rho_forward = 1.0;
    double rho_backward = 1.0;
    Direction decision = Direction::tie;
    std::optional<double> cv_response;
    double fb_product = 1.0;
    std::optional<double> fb_bound;
    std::optional<double> alpha_margin;
};

/// rho_{X->Y} = <S_yy> / (<S_xx> <S_yy / S_xx>).
[[nodiscard]] inline double sdr_from_spectra(const Spectrum& sxx, const Spectrum& syy,
                                             double floor_rel = default_floor_rel) {
    require_same_grid(sxx, syy);
    const double px = spectral_mean(sxx);
    const double py = spectral_mean(syy);
    detail::require(px > 0.0 && py > 0.0, ErrorKind::DegenerateSpectrum,
                    "SDR needs spectra with positive power");
    return py / (px * spectral_ratio_mean(syy, sxx, floor_rel));
}

/// Same ratio written with signal powers and filter energy:
/// rho = P(Y) / (P(X) ||h||^2), with S_yy = |h^|^2 S_xx on the grid of S_xx.
[[nodiscard]] inline double sdr_forward_from_filter(const Spectrum& sxx, const FirFilter& f) {
    detail::require(sxx.size() >= f.length(), ErrorKind::InvalidArgument,
                    "grid must have at least as many bins as filter taps");
    const Spectrum syy = multiply(squared_frequency_response(f, sxx.grid()), sxx);
    const double px = spectral_mean(sxx);
    detail::require(px > 0.0, ErrorKind::DegenerateSpectrum, "cause spectrum has zero power");
    return spectral_mean(syy) / (px * filter_energy(f));
}

[[nodiscard]] inline Direction decide(double rho_forward, double rho_backward,
                                      double tie_tolerance = default_tie_tolerance) {
    const double scale = std::max(std::abs(rho_forward), std::abs(rho_backward));
    if (std::abs(rho_forward - rho_backward) <= tie_tolerance * scale) return Direction::tie;
    return rho_forward > rho_backward ? Direction::XtoY : Direction::YtoX;
}

struct ForwardBackwardBound {
    /// rho_fwd * rho_bwd = 1 / (<|h|^2> <1/|h|^2>).
    double product = 1.0;
    /// [1 + alpha CV^2]^-1 when alpha > 0, otherwise 1.
    double bound = 1.0;
    /// 2 - max|h|^2 / mean|h|^2, computed on the grid.
    double alpha = 1.0;
    double cv = 0.0;
};

/// Product bound from a squared response (or an estimated ratio S_yy / S_xx).
[[nodiscard]] inline ForwardBackwardBound forward_backward_bound(
    const Spectrum& response, double floor_rel = default_floor_rel) {
    ForwardBackwardBound out;
    const double mean = spectral_mean(response);
    detail::require(mean > 0.0, ErrorKind::DegenerateSpectrum, "response is identically zero");
    const Spectrum ones = Spectrum::constant(response.grid(), 1.0);
    out.product = 1.0 / (mean * spectral_ratio_mean(ones, response, floor_rel));
    out.cv = coefficient_of_variation(response);
    out.alpha = 2.0 - response.max() / mean;
    out.bound = out.alpha > 0.0 ? 1.0 / (1.0 + out.alpha * out.cv * out.cv) : 1.0;
    return out;
}

[[nodiscard]] inline ForwardBackwardBound forward_backward_bound(
    const FirFilter& f, FrequencyGrid grid, double floor_rel = default_floor_rel) {
    return forward_backward_bound(squared_frequency_response(f, grid), floor_rel);
}

/// Builds a report from the two spectra of a pair; the backward ratio swaps
/// their roles. Diagnostics use the empirical response S_yy / S_xx.
[[nodiscard]] inline SdrReport sdr_report(const Spectrum& sxx, const Spectrum& syy,
                                          double floor_rel = default_floor_rel,
                                          double tie_tolerance = default_tie_tolerance) {
    SdrReport report;
    report.rho_forward = sdr_from_spectra(sxx, syy, floor_rel);
    report.rho_backward = sdr_from_spectra(syy, sxx, floor_rel);
    report.decision = decide(report.rho_forward, report.rho_backward, tie_tolerance);
    report.fb_product = report.rho_forward * report.rho_backward;

    const double fl = floor_value(sxx, floor_rel);
    std::vector<double> ratio(sxx.size());
    for (std::size_t k = 0; k < ratio.size(); ++k) ratio[k] = syy[k] / std::max(sxx[k], fl);
    const Spectrum response(sxx.grid(), std::move(ratio));
    if (spectral_mean(response) > 0.0) {
        const auto fb = forward_backward_bound(response, floor_rel);
        report.cv_response = fb.cv;
        report.alpha_margin = fb.alpha;
        if (fb.alpha > 0.0) report.fb_bound = fb.bound;
    }
    return report;
}

/// Estimates both PSDs with Welch and decides the causal direction: X -> Y
/// when rho_{X->Y} exceeds rho_{Y->X}, with an explicit tie band.
[[nodiscard]] inline SdrReport infer_direction(const TimeSeries& x, const TimeSeries& y,
                                               const WelchConfig& welch = {},
                                               double floor_rel = default_floor_rel,
                                               double tie_tolerance = default_tie_tolerance) {
    const Spectrum sxx = estimate_psd_welch(x, welch);
    const Spectrum syy = estimate_psd_welch(y, welch);
    return sdr_report(sxx, syy, floor_rel, tie_tolerance);
}

}  // namespace sdrc
