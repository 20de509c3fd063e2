#pragma once

// Relative entropy rates between stationary Gaussian processes, expressed
// through their PSDs, and the decomposition of the effect's irregularity into
// cause irregularity, mechanism irregularity and a spectral-dependence term.
//
// All quantities are per-sample rates in nats. They are KL rates only under a
// Gaussian model; nothing here checks Gaussianity.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/sdr.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

/// Mean over the grid of (r - 1 - ln r) / 2 with r = S1 / max(S2, floor).
[[nodiscard]] inline double relative_entropy_rate(const Spectrum& s1, const Spectrum& s2,
                                                  double floor_rel = default_floor_rel) {
    require_same_grid(s1, s2);
    const double fl = floor_value(s2, floor_rel);
    const double fl1 = floor_value(s1, floor_rel);
    double acc = 0.0;
    for (std::size_t k = 0; k < s1.size(); ++k) {
        const double den = std::max(s2[k], fl);
        detail::require(den > 0.0, ErrorKind::DegenerateSpectrum, "zero reference spectrum");
        const double r = std::max(s1[k], fl1) / den;
        acc += 0.5 * (r - 1.0 - std::log(r));
    }
    return acc / static_cast<double>(s1.size());
}

struct WhiteProjection {
    /// Divergence rate to the closest white Gaussian noise.
    double divergence = 0.0;
    /// Power of that white noise, equal to the mean of the spectrum.
    double projection_power = 0.0;
};

/// -(1/2) <ln(S / P)> with P = <S>: divergence to the manifold of white noises.
[[nodiscard]] inline WhiteProjection divergence_to_white_manifold(
    const Spectrum& s, double floor_rel = default_floor_rel) {
    const double fl = floor_value(s, floor_rel);
    const double power = spectral_mean(s);
    double acc = 0.0;
    for (double v : s.values()) acc += std::log(std::max(v, fl) / power);
    return {-0.5 * acc / static_cast<double>(s.size()), power};
}

struct DivergenceDecomposition {
    double d_y_to_manifold = 0.0;
    double d_x_to_manifold = 0.0;
    /// Divergence from the white-fed output (PSD P(X)|h|^2) to the white
    /// noise with the effect's power.
    double d_arrow_py_to_uy = 0.0;
    /// (1 - 1 / rho_{X->Y}) / 2; zero exactly when spectral independence holds.
    double residual_term = 0.0;
    double identity_gap = 0.0;
    double rho_forward = 1.0;
};

namespace detail {

inline Spectrum floored(const Spectrum& s, double floor_rel) {
    const double fl = floor_value(s, floor_rel);
    std::vector<double> v(s.values().begin(), s.values().end());
    for (auto& x : v) x = std::max(x, fl);
    return Spectrum(s.grid(), std::move(v));
}

}  // namespace detail

/// d_y = d_x + d_arrow + residual holds exactly; identity_gap is what is left
/// over after rounding. The floor is applied once, to S_xx and |h|^2; every
/// derived spectrum is built from the floored pair and not floored again, so
/// deep nulls of the response cannot break the identity.
[[nodiscard]] inline DivergenceDecomposition igci_decomposition(
    const Spectrum& sxx, const FirFilter& f, double floor_rel = default_floor_rel) {
    detail::require(sxx.size() >= f.length(), ErrorKind::InvalidArgument,
                    "grid must have at least as many bins as filter taps");
    const Spectrum sx = detail::floored(sxx, floor_rel);
    const Spectrum h2 = detail::floored(squared_frequency_response(f, sxx.grid()), floor_rel);
    const Spectrum syy = multiply(h2, sx);
    const double px = spectral_mean(sx);
    const double py = spectral_mean(syy);

    DivergenceDecomposition out;
    out.d_x_to_manifold = divergence_to_white_manifold(sx, 0.0).divergence;
    out.d_y_to_manifold = divergence_to_white_manifold(syy, 0.0).divergence;
    out.d_arrow_py_to_uy = relative_entropy_rate(h2.scaled(px), Spectrum::constant(sxx.grid(), py), 0.0);
    out.rho_forward = py / (px * spectral_mean(h2));
    out.residual_term = 0.5 * (1.0 - 1.0 / out.rho_forward);
    out.identity_gap =
        out.d_y_to_manifold - out.d_x_to_manifold - out.d_arrow_py_to_uy - out.residual_term;
    return out;
}

}  // namespace sdrc
