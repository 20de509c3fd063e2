#pragma once

// Monte Carlo experiment suites. Every trial is a pure function of
// (config, m, D, trial index); trial i uses seed base_seed + i, so any row can
// be reproduced on its own and results never depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "sdrc/error.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/gen_model.hpp"
#include "sdrc/invariance.hpp"
#include "sdrc/resampling.hpp"
#include "sdrc/sdr.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc {

enum class ExperimentKind { concentration, identifiability, fb_product, decimation, whitening };
enum class EvalMode { analytic, estimated };

constexpr std::string_view to_string(ExperimentKind k) noexcept {
    switch (k) {
        case ExperimentKind::concentration: return "concentration";
        case ExperimentKind::identifiability: return "identifiability";
        case ExperimentKind::fb_product: return "fb_product";
        case ExperimentKind::decimation: return "decimation";
        case ExperimentKind::whitening: return "whitening";
    }
    return "concentration";
}

constexpr std::string_view to_string(EvalMode m) noexcept {
    return m == EvalMode::analytic ? "analytic" : "estimated";
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::concentration;
    std::vector<std::size_t> m_values{4, 16, 64, 256};
    std::size_t trials = 200;
    CauseSpec cause = cause::Ar1{0.9, 1.0};
    CoefficientSampler sampler = SphericalSampler{};
    std::size_t n = 1U << 16;
    std::vector<std::size_t> d_values{1};
    std::uint64_t base_seed = 1;
    WelchConfig welch{};
    double floor_rel = default_floor_rel;
    /// Concentration and identifiability default to analytic spectra;
    /// decimation and whitening always estimate from samples.
    EvalMode mode = EvalMode::analytic;
    double edge_trim = 0.05;
    /// Exponent range of the power-law family used by the whitening suite.
    double exponent_min = 0.5;
    double exponent_max = 1.5;
    /// 0 = use SDR_CAUSAL_THREADS, or all hardware threads when unset/0.
    unsigned threads = 0;

    void validate() const {
        detail::require(trials >= 1, ErrorKind::InvalidArgument, "trials must be >= 1");
        detail::require(!m_values.empty(), ErrorKind::InvalidArgument, "m_values must be nonempty");
        for (std::size_t i = 0; i < m_values.size(); ++i) {
            detail::require(m_values[i] >= 1, ErrorKind::InvalidArgument, "every m must be >= 1");
            detail::require(i == 0 || m_values[i] > m_values[i - 1], ErrorKind::InvalidArgument,
                            "m_values must be strictly ascending");
        }
        detail::require(!d_values.empty(), ErrorKind::InvalidArgument, "D values must be nonempty");
        for (auto d : d_values) detail::require(d >= 1, ErrorKind::InvalidArgument, "every D must be >= 1");
        detail::require(floor_rel >= 0.0, ErrorKind::InvalidArgument, "floor_rel must be >= 0");
        detail::require(exponent_min <= exponent_max, ErrorKind::InvalidArgument,
                        "exponent range is empty");
        welch.validate();
        detail::validate(cause);
        const bool sampled = mode == EvalMode::estimated || experiment == ExperimentKind::decimation ||
                             experiment == ExperimentKind::whitening;
        if (sampled) {
            detail::require(n > m_values.back(), ErrorKind::InvalidArgument,
                            "series length must exceed the largest m");
            const std::size_t dmax = experiment == ExperimentKind::decimation
                                         ? *std::max_element(d_values.begin(), d_values.end())
                                         : 1;
            detail::require(static_cast<double>(n) * (1.0 - 2.0 * edge_trim) / static_cast<double>(dmax) >=
                                static_cast<double>(welch.segment_length),
                            ErrorKind::InvalidArgument,
                            "series too short for the Welch segment after decimation");
        }
    }
};

struct ResultRow {
    ExperimentKind experiment;
    /// "raw" / "whitened" for the whitening suite, empty otherwise.
    std::string variant;
    EvalMode mode;
    std::size_t m;
    std::size_t d;
    std::size_t trial;
    std::uint64_t seed;
    double rho_fwd;
    double rho_bwd;
    double product;
    double cv;
    /// Forward-backward bound for fb_product rows.
    std::optional<double> bound;
    bool decision_correct;
};

struct SummaryRow {
    std::size_t m = 0;
    std::size_t d = 1;
    std::string variant;
    std::size_t count = 0;
    double accuracy = 0.0;
    double median_abs_dev = 0.0;  // median |rho_fwd - 1|
    double q95_abs_dev = 0.0;
    double median_rho_fwd = 0.0;
    double iqr_rho_fwd = 0.0;
    double median_product = 0.0;
    double median_cv = 0.0;
    /// Concentration bound at the 95%-probability epsilon (concentration suite).
    std::optional<double> concentration_bound;
    /// Decimation constant K (decimation suite).
    std::optional<double> k_constant;
    /// Fraction of rows whose product respects its bound (fb_product suite).
    std::optional<double> bound_satisfied;
};

struct ExperimentResult {
    ExperimentKind experiment;
    std::vector<ResultRow> rows;
    std::vector<SummaryRow> summary;

    [[nodiscard]] const SummaryRow& at(std::size_t m, std::size_t d = 1, std::string_view variant = {}) const {
        for (const auto& s : summary) {
            if (s.m == m && s.d == d && s.variant == variant) return s;
        }
        throw Error(ErrorKind::InvalidArgument, "no summary for m=" + std::to_string(m));
    }
};

// ---------------------------------------------------------------------------
// statistics helpers

/// Linear-interpolation quantile (the common "type 7" definition).
[[nodiscard]] inline double quantile(std::vector<double> v, double q) {
    detail::require(!v.empty(), ErrorKind::EmptyCollection, "quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

[[nodiscard]] inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

/// |rho - 1| bound for spherically drawn m-tap filters:
/// 8 eps max S / <S>, with eps solving 2 exp(-m^3 eps^2) = 1 - probability.
[[nodiscard]] inline double concentration_bound(const Spectrum& sxx, std::size_t m,
                                                double probability = 0.95) {
    const double md = static_cast<double>(m);
    const double eps = std::sqrt(std::log(2.0 / (1.0 - probability)) / (md * md * md));
    return 8.0 * eps * sxx.max() / spectral_mean(sxx);
}

[[nodiscard]] inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SDR_CAUSAL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count); fn writes into its own slot.
template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& fn) {
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

namespace detail {

struct TrialOutcome {
    double rho_fwd;
    double rho_bwd;
    double cv;
};

inline TrialOutcome analytic_trial(const Spectrum& sxx, const FirFilter& f, double floor_rel) {
    const Spectrum h2 = squared_frequency_response(f, sxx.grid());
    const Spectrum syy = multiply(h2, sxx);
    return {sdr_from_spectra(sxx, syy, floor_rel), sdr_from_spectra(syy, sxx, floor_rel),
            coefficient_of_variation(h2)};
}

inline ResultRow make_row(const ExperimentConfig& cfg, std::string variant, EvalMode mode,
                          std::size_t m, std::size_t d, std::size_t trial, double rho_fwd,
                          double rho_bwd, double cv) {
    return {cfg.experiment, std::move(variant), mode,  m,  d, trial, cfg.base_seed + trial,
            rho_fwd,        rho_bwd,            rho_fwd * rho_bwd, cv, std::nullopt,
            decide(rho_fwd, rho_bwd) == Direction::XtoY};
}

inline std::vector<SummaryRow> summarize_rows(const ExperimentConfig& cfg,
                                              const std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::size_t, std::size_t, std::string>, std::vector<const ResultRow*>> groups;
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> order;
    for (const auto& r : rows) {
        auto key = std::make_tuple(r.m, r.d, r.variant);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }

    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& group = groups.at(key);
        SummaryRow s;
        std::tie(s.m, s.d, s.variant) = key;
        s.count = group.size();
        std::vector<double> dev, fwd, prod, cv;
        std::size_t correct = 0, satisfied = 0;
        for (const auto* r : group) {
            dev.push_back(std::abs(r->rho_fwd - 1.0));
            fwd.push_back(r->rho_fwd);
            prod.push_back(r->product);
            cv.push_back(r->cv);
            correct += r->decision_correct ? 1 : 0;
            if (r->bound && r->product <= *r->bound + 1e-10) ++satisfied;
        }
        s.accuracy = static_cast<double>(correct) / static_cast<double>(s.count);
        s.median_abs_dev = median(dev);
        s.q95_abs_dev = quantile(dev, 0.95);
        s.median_rho_fwd = median(fwd);
        s.iqr_rho_fwd = quantile(fwd, 0.75) - quantile(fwd, 0.25);
        s.median_product = median(prod);
        s.median_cv = median(cv);
        if (cfg.experiment == ExperimentKind::concentration) {
            s.concentration_bound = concentration_bound(analytic_psd(cfg.cause, analytic_grid_for(s.m)), s.m);
        }
        if (cfg.experiment == ExperimentKind::decimation) {
            s.k_constant = decimation_constant(analytic_psd(cfg.cause, analytic_grid_for(s.m * s.d)), s.d);
        }
        if (cfg.experiment == ExperimentKind::fb_product) {
            s.bound_satisfied = static_cast<double>(satisfied) / static_cast<double>(s.count);
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// Shared body of the concentration and identifiability suites.
inline std::vector<ResultRow> sdr_rows(const ExperimentConfig& cfg) {
    const unsigned threads = resolve_threads(cfg.threads);
    std::vector<ResultRow> rows;
    for (std::size_t m : cfg.m_values) {
        std::vector<std::optional<ResultRow>> slots(cfg.trials);
        const Spectrum sxx = analytic_psd(cfg.cause, analytic_grid_for(m));
        parallel_for(cfg.trials, threads, [&](std::size_t i) {
            const std::uint64_t seed = cfg.base_seed + i;
            if (cfg.mode == EvalMode::analytic) {
                const auto t = analytic_trial(sxx, sample_fir(m, cfg.sampler, seed), cfg.floor_rel);
                slots[i] = make_row(cfg, "", cfg.mode, m, 1, i, t.rho_fwd, t.rho_bwd, t.cv);
            } else {
                const auto pair = generate_pair(cfg.cause, m, cfg.sampler, cfg.n, seed);
                const auto rep = infer_direction(pair.x, pair.y, cfg.welch, cfg.floor_rel);
                slots[i] = make_row(cfg, "", cfg.mode, m, 1, i, rep.rho_forward, rep.rho_backward,
                                    rep.cv_response.value_or(0.0));
            }
        });
        for (auto& s : slots) rows.push_back(std::move(*s));
    }
    return rows;
}

}  // namespace detail

[[nodiscard]] inline ExperimentResult make_result(const ExperimentConfig& cfg, std::vector<ResultRow> rows) {
    ExperimentResult res{cfg.experiment, std::move(rows), {}};
    res.summary = detail::summarize_rows(cfg, res.rows);
    return res;
}

/// Distribution of |rho_fwd - 1| per m, with the concentration bound.
[[nodiscard]] inline ExperimentResult run_concentration(ExperimentConfig cfg) {
    cfg.experiment = ExperimentKind::concentration;
    cfg.validate();
    return make_result(cfg, detail::sdr_rows(cfg));
}

/// Accuracy of the direction rule and the forward-backward product per m.
[[nodiscard]] inline ExperimentResult run_identifiability(ExperimentConfig cfg) {
    cfg.experiment = ExperimentKind::identifiability;
    cfg.validate();
    return make_result(cfg, detail::sdr_rows(cfg));
}

/// Product of the two SDRs against its CV-based bound, per random filter.
[[nodiscard]] inline ExperimentResult run_fb_product(ExperimentConfig cfg) {
    cfg.experiment = ExperimentKind::fb_product;
    cfg.validate();
    const unsigned threads = resolve_threads(cfg.threads);
    std::vector<ResultRow> rows;
    for (std::size_t m : cfg.m_values) {
        const Spectrum sxx = analytic_psd(cfg.cause, analytic_grid_for(m));
        std::vector<std::optional<ResultRow>> slots(cfg.trials);
        parallel_for(cfg.trials, threads, [&](std::size_t i) {
            const FirFilter f = sample_fir(m, cfg.sampler, cfg.base_seed + i);
            const auto t = detail::analytic_trial(sxx, f, cfg.floor_rel);
            auto row = detail::make_row(cfg, "", EvalMode::analytic, m, 1, i, t.rho_fwd, t.rho_bwd, t.cv);
            row.bound = forward_backward_bound(f, sxx.grid(), cfg.floor_rel).bound;
            slots[i] = std::move(row);
        });
        for (auto& s : slots) rows.push_back(std::move(*s));
    }
    return make_result(cfg, std::move(rows));
}

/// Full estimated pipeline on decimated pairs, for every (m, D).
[[nodiscard]] inline ExperimentResult run_decimation(ExperimentConfig cfg) {
    cfg.experiment = ExperimentKind::decimation;
    cfg.mode = EvalMode::estimated;
    cfg.validate();
    const unsigned threads = resolve_threads(cfg.threads);
    std::vector<ResultRow> rows;
    for (std::size_t m : cfg.m_values) {
        for (std::size_t d : cfg.d_values) {
            std::vector<std::optional<ResultRow>> slots(cfg.trials);
            parallel_for(cfg.trials, threads, [&](std::size_t i) {
                const std::uint64_t seed = cfg.base_seed + i;
                const FirFilter f = sample_fir(m, cfg.sampler, seed);
                const auto res = decimated_sdr_experiment(cfg.cause, f, {d, cfg.edge_trim}, cfg.n, seed,
                                                          cfg.welch, cfg.floor_rel);
                slots[i] = detail::make_row(cfg, "", EvalMode::estimated, m, d, i, res.report.rho_forward,
                                            res.report.rho_backward, res.response_cv);
            });
            for (auto& s : slots) rows.push_back(std::move(*s));
        }
    }
    return make_result(cfg, std::move(rows));
}

/// Cause family with a per-trial exponent drawn uniformly in the configured
/// range (power-law causes), or the configured cause itself otherwise.
[[nodiscard]] inline CauseSpec whitening_trial_cause(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (const auto* pl = std::get_if<cause::PowerLaw>(&cfg.cause)) {
        Rng rng(seed, Stream::Exponent);
        const double exponent = cfg.exponent_min == cfg.exponent_max
                                    ? cfg.exponent_min
                                    : rng.uniform(cfg.exponent_min, cfg.exponent_max);
        return cause::PowerLaw{exponent, pl->floor, pl->power};
    }
    return cfg.cause;
}

/// Paired comparison of inference on raw and whitened spectra. One whitener
/// is fitted per m on every estimated PSD of the dataset (causes and effects)
/// and applied to both members of each pair.
[[nodiscard]] inline ExperimentResult run_whitening(ExperimentConfig cfg) {
    cfg.experiment = ExperimentKind::whitening;
    cfg.mode = EvalMode::estimated;
    cfg.validate();
    const unsigned threads = resolve_threads(cfg.threads);
    std::vector<ResultRow> rows;
    for (std::size_t m : cfg.m_values) {
        std::vector<std::optional<Spectrum>> sx(cfg.trials), sy(cfg.trials);
        parallel_for(cfg.trials, threads, [&](std::size_t i) {
            const std::uint64_t seed = cfg.base_seed + i;
            const auto pair = generate_pair(whitening_trial_cause(cfg, seed), m, cfg.sampler, cfg.n, seed);
            sx[i] = estimate_psd_welch(pair.x, cfg.welch);
            sy[i] = estimate_psd_welch(pair.y, cfg.welch);
        });
        std::vector<Spectrum> all;
        all.reserve(2 * cfg.trials);
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            all.push_back(*sx[i]);
            all.push_back(*sy[i]);
        }
        const Whitener wh = fit_whitener(all, cfg.floor_rel);

        for (const char* variant : {"raw", "whitened"}) {
            const bool white = std::string_view(variant) == "whitened";
            for (std::size_t i = 0; i < cfg.trials; ++i) {
                const Spectrum a = white ? apply_whitener(wh, *sx[i]) : *sx[i];
                const Spectrum b = white ? apply_whitener(wh, *sy[i]) : *sy[i];
                const auto rep = sdr_report(a, b, cfg.floor_rel);
                rows.push_back(detail::make_row(cfg, variant, EvalMode::estimated, m, 1, i, rep.rho_forward,
                                                rep.rho_backward, rep.cv_response.value_or(0.0)));
            }
        }
    }
    return make_result(cfg, std::move(rows));
}

[[nodiscard]] inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::concentration: return run_concentration(cfg);
        case ExperimentKind::identifiability: return run_identifiability(cfg);
        case ExperimentKind::fb_product: return run_fb_product(cfg);
        case ExperimentKind::decimation: return run_decimation(cfg);
        case ExperimentKind::whitening: return run_whitening(cfg);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown experiment");
}

}  // namespace sdrc
