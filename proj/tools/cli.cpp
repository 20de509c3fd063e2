#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "sdrc/sdrc.hpp"

namespace sdrc::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(io::detail::trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double number(std::string_view s, std::string_view what) {
    const auto v = io::detail::parse_number(s);
    if (!v || !std::isfinite(*v)) {
        throw Error(ErrorKind::InvalidArgument, "bad number '" + std::string(s) + "' in " + std::string(what));
    }
    return *v;
}

}  // namespace

CauseSpec parse_cause(std::string_view text) {
    const auto parts = split(text, ':');
    const std::string& kind = parts[0];
    auto arg = [&](std::size_t i, double fallback) {
        return i < parts.size() ? number(parts[i], "cause '" + std::string(text) + "'") : fallback;
    };
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() < lo + 1 || parts.size() > hi + 1) {
            throw Error(ErrorKind::InvalidArgument, "wrong number of parameters in cause '" + std::string(text) + "'");
        }
    };
    CauseSpec spec;
    if (kind == "white") {
        arity(0, 1);
        spec = cause::White{arg(1, 1.0)};
    } else if (kind == "ar1") {
        arity(1, 2);
        spec = cause::Ar1{arg(1, 0.0), arg(2, 1.0)};
    } else if (kind == "ar2") {
        arity(2, 3);
        spec = cause::Ar2{arg(1, 0.0), arg(2, 0.0), arg(3, 1.0)};
    } else if (kind == "powerlaw") {
        arity(1, 3);
        spec = cause::PowerLaw{arg(1, 1.0), arg(2, 0.01), arg(3, 1.0)};
    } else if (kind == "table") {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos || colon + 1 == text.size()) {
            throw Error(ErrorKind::InvalidArgument, "table cause needs a spectrum file: table:<path>");
        }
        spec = cause::Table{io::spectrum_from_table(io::read_csv(std::string(text.substr(colon + 1))))};
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown cause kind '" + kind + "'");
    }
    detail::validate(spec);
    return spec;
}

CoefficientSampler parse_sampler(std::string_view text) {
    if (text == "spherical") return SphericalSampler{ConstantRadius{1.0}};
    if (text == "spherical-chi") return SphericalSampler{ChiRadius{}};
    if (text == "normal") return IidSampler{IidDistribution::standard_normal};
    if (text == "rademacher") return IidSampler{IidDistribution::rademacher};
    if (text == "uniform") return IidSampler{IidDistribution::uniform_pm_sqrt3};
    throw Error(ErrorKind::InvalidArgument, "unknown sampler '" + std::string(text) + "'");
}

namespace {

// ---------------------------------------------------------------------------
// config files: "key = value" lines whose keys are the long flag names

void merge_config(CLI::App& cmd, const std::string& path) {
    const std::string text = io::read_file(path);
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = io::detail::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const auto where = path + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorKind::Parse, where + ": expected key = value");
        std::string key(io::detail::trim(line.substr(0, eq)));
        std::string value(io::detail::trim(line.substr(eq + 1)));
        std::replace(key.begin(), key.end(), '_', '-');
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);

        CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
        if (opt == nullptr) throw Error(ErrorKind::Parse, where + ": unknown key '" + key + "'");
        if (opt->count() > 0) continue;  // given on the command line
        opt->clear();
        if (opt->get_expected_min() == 0) {
            if (value != "true" && value != "false") {
                throw Error(ErrorKind::Parse, where + ": '" + key + "' expects true or false");
            }
            opt->add_result(value);
        } else if (opt->get_items_expected_max() > 1) {
            for (const auto& item : split(value, ',')) opt->add_result(item);
        } else {
            opt->add_result(value);
        }
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw Error(ErrorKind::Parse, where + ": " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// shared option groups

struct WelchFlags {
    std::size_t segment_length = WelchConfig{}.segment_length;
    double overlap = WelchConfig{}.overlap_fraction;
    std::string window = "hann";
    bool no_detrend = false;

    void add(CLI::App* app) {
        app->add_option("--segment-length", segment_length, "Welch segment length")->check(CLI::PositiveNumber);
        app->add_option("--overlap", overlap, "Welch overlap fraction")->check(CLI::Range(0.0, 0.95));
        app->add_option("--window", window, "hann or rectangular")->check(CLI::IsMember({"hann", "rectangular"}));
        app->add_flag("--no-detrend", no_detrend, "Keep each segment's mean");
    }

    [[nodiscard]] WelchConfig config() const {
        WelchConfig c;
        c.segment_length = segment_length;
        c.overlap_fraction = overlap;
        c.window = window == "hann" ? Window::hann : Window::rectangular;
        c.detrend = !no_detrend;
        c.validate();
        return c;
    }
};

TimeSeries column_series(const io::CsvTable& t, const std::string& column, const std::string& source) {
    std::size_t idx = 0;
    if (!column.empty()) {
        const auto as_index = io::detail::parse_number(column);
        if (as_index && *as_index >= 0 && *as_index == std::floor(*as_index)) {
            idx = static_cast<std::size_t>(*as_index);
        } else {
            idx = t.index_of(column);
        }
    }
    if (idx >= t.columns.size()) {
        throw Error(ErrorKind::Parse, source + ": no column " + std::to_string(idx));
    }
    return TimeSeries(t.columns[idx], t.header.empty() ? std::string{} : t.header[idx]);
}

void print_report(std::ostream& out, const SdrReport& r) {
    out << "decision " << to_string(r.decision) << '\n'
        << "rho_forward " << io::format_double(r.rho_forward) << '\n'
        << "rho_backward " << io::format_double(r.rho_backward) << '\n';
}

// ---------------------------------------------------------------------------
// commands

struct InferArgs {
    std::vector<std::string> inputs;
    WelchFlags welch;
    double floor_rel = default_floor_rel;
    double tie_tol = default_tie_tolerance;
    std::string whiten;
    std::string out;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
    TimeSeries x, y;
    if (a.inputs.size() == 1) {
        const auto t = io::read_csv(a.inputs[0]);
        if (t.columns.size() < 2) throw Error(ErrorKind::Parse, a.inputs[0] + ": need two columns (x, y)");
        const bool named = std::find(t.header.begin(), t.header.end(), "x") != t.header.end() &&
                           std::find(t.header.begin(), t.header.end(), "y") != t.header.end();
        x = column_series(t, named ? "x" : "0", a.inputs[0]);
        y = column_series(t, named ? "y" : "1", a.inputs[0]);
    } else {
        x = column_series(io::read_csv(a.inputs[0]), "0", a.inputs[0]);
        y = column_series(io::read_csv(a.inputs[1]), "0", a.inputs[1]);
    }
    const WelchConfig welch = a.welch.config();
    Spectrum sxx = estimate_psd_welch(x, welch);
    Spectrum syy = estimate_psd_welch(y, welch);
    if (!a.whiten.empty()) {
        const std::vector<Spectrum> both{sxx, syy};
        const Whitener wh = a.whiten == "fit" ? fit_whitener(both, a.floor_rel)
                                              : io::whitener_from_json(io::read_json(a.whiten));
        sxx = apply_whitener(wh, sxx);
        syy = apply_whitener(wh, syy);
    }
    const SdrReport report = sdr_report(sxx, syy, a.floor_rel, a.tie_tol);
    print_report(out, report);
    if (!a.out.empty()) io::write_atomic(a.out, io::to_json(report).dump(2) + "\n");
    return ok;
}

struct SimulateArgs {
    std::string cause = "ar1:0.9";
    std::size_t m = 0;
    std::string sampler = "spherical";
    std::size_t n = 4096;
    std::uint64_t seed = 0;
    std::string out;
    std::string truth;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const CauseSpec spec = parse_cause(a.cause);
    const auto pair = generate_pair(spec, a.m, parse_sampler(a.sampler), a.n, a.seed);
    io::write_atomic(a.out, io::pair_csv(pair.x, pair.y));

    const Spectrum h2 = squared_frequency_response(pair.true_filter, pair.true_sxx.grid());
    const Spectrum syy = multiply(h2, pair.true_sxx);
    const SdrReport report = sdr_report(pair.true_sxx, syy);
    if (!a.truth.empty()) {
        const json truth{{"seed", a.seed},
                         {"cause", a.cause},
                         {"sampler", a.sampler},
                         {"m", a.m},
                         {"n", a.n},
                         {"grid", pair.true_sxx.size()},
                         {"filter", io::to_json(pair.true_filter)},
                         {"rho_fwd", report.rho_forward},
                         {"rho_bwd", report.rho_backward},
                         {"decision", std::string(to_string(report.decision))}};
        io::write_atomic(a.truth, truth.dump(2) + "\n");
    }
    out << "wrote " << a.n << " samples to " << a.out << '\n';
    print_report(out, report);
    return ok;
}

struct ExperimentArgs {
    std::string experiment = "concentration";
    std::vector<std::size_t> m_values{4, 16, 64, 256};
    std::size_t trials = 200;
    std::string cause = "ar1:0.9";
    std::string sampler = "spherical";
    std::size_t n = 1U << 16;
    std::vector<std::size_t> factors{1};
    std::uint64_t seed = 0;
    std::string mode = "auto";
    WelchFlags welch;
    double floor_rel = default_floor_rel;
    double edge_trim = 0.05;
    double exponent_min = 0.5;
    double exponent_max = 1.5;
    unsigned threads = 0;
    std::string out_dir;
};

ExperimentKind parse_experiment(const std::string& s) {
    for (auto k : {ExperimentKind::concentration, ExperimentKind::identifiability, ExperimentKind::fb_product,
                   ExperimentKind::decimation, ExperimentKind::whitening}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + s + "'");
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
    ExperimentConfig cfg;
    cfg.experiment = parse_experiment(a.experiment);
    cfg.m_values = a.m_values;
    cfg.trials = a.trials;
    cfg.cause = parse_cause(a.cause);
    cfg.sampler = parse_sampler(a.sampler);
    cfg.n = a.n;
    cfg.d_values = a.factors;
    cfg.base_seed = a.seed;
    cfg.welch = a.welch.config();
    cfg.floor_rel = a.floor_rel;
    cfg.edge_trim = a.edge_trim;
    cfg.exponent_min = a.exponent_min;
    cfg.exponent_max = a.exponent_max;
    cfg.threads = a.threads;
    if (a.mode == "auto") {
        const bool pipeline =
            cfg.experiment == ExperimentKind::decimation || cfg.experiment == ExperimentKind::whitening;
        cfg.mode = pipeline ? EvalMode::estimated : EvalMode::analytic;
    } else {
        cfg.mode = a.mode == "analytic" ? EvalMode::analytic : EvalMode::estimated;
    }
    cfg.validate();

    const ExperimentResult result = run_experiment(cfg);
    json summary = io::summary_json(result, cfg.base_seed);
    summary["config"] = json{{"m", cfg.m_values},         {"trials", cfg.trials},
                             {"cause", a.cause},          {"sampler", a.sampler},
                             {"n", cfg.n},                {"D", cfg.d_values},
                             {"mode", to_string(cfg.mode)}, {"segment_length", cfg.welch.segment_length},
                             {"overlap", cfg.welch.overlap_fraction}, {"window", a.welch.window},
                             {"detrend", cfg.welch.detrend}, {"floor_rel", cfg.floor_rel}};
    const fs::path dir(a.out_dir);
    io::write_atomic(dir / "rows.csv", io::rows_csv(result.rows));
    io::write_atomic(dir / "summary.json", summary.dump(2) + "\n");

    for (const auto& s : result.summary) {
        out << to_string(result.experiment) << " m=" << s.m << " D=" << s.d;
        if (!s.variant.empty()) out << ' ' << s.variant;
        out << std::setprecision(6) << " trials=" << s.count << " accuracy=" << s.accuracy
            << " median|rho-1|=" << s.median_abs_dev << " q95|rho-1|=" << s.q95_abs_dev
            << " median_product=" << s.median_product << " iqr_rho=" << s.iqr_rho_fwd;
        if (s.concentration_bound) out << " bound=" << *s.concentration_bound;
        if (s.k_constant) out << " K=" << *s.k_constant;
        if (s.bound_satisfied) out << " bound_satisfied=" << *s.bound_satisfied;
        out << '\n';
    }
    return ok;
}

struct PsdArgs {
    std::string input;
    std::string column;
    WelchFlags welch;
    std::string out;
};

int cmd_psd(const PsdArgs& a, std::ostream& out) {
    const TimeSeries x = column_series(io::read_csv(a.input), a.column, a.input);
    const Spectrum s = estimate_psd_welch(x, a.welch.config());
    io::write_atomic(a.out, io::spectrum_csv(s));
    out << "wrote " << s.size() << " bins to " << a.out << '\n';
    return ok;
}

struct WhitenFitArgs {
    std::vector<std::string> inputs;
    WelchFlags welch;
    double floor_rel = default_floor_rel;
    std::string out;
};

int cmd_whiten_fit(const WhitenFitArgs& a, std::ostream& out) {
    const WelchConfig welch = a.welch.config();
    std::vector<Spectrum> spectra;
    for (const auto& path : a.inputs) {
        const auto t = io::read_csv(path);
        for (const auto& col : t.columns) spectra.push_back(estimate_psd_welch(TimeSeries(col), welch));
    }
    const Whitener wh = fit_whitener(spectra, a.floor_rel);
    io::write_atomic(a.out, io::to_json(wh).dump(2) + "\n");
    out << "fitted whitener on " << spectra.size() << " series, gamma " << io::format_double(wh.gamma()) << '\n';
    return ok;
}

struct WhitenApplyArgs {
    std::string whitener;
    std::string spectrum;
    std::string series;
    std::string column;
    std::string out;
};

int cmd_whiten_apply(const WhitenApplyArgs& a, std::ostream& out) {
    const Whitener wh = io::whitener_from_json(io::read_json(a.whitener));
    if (!a.spectrum.empty()) {
        const Spectrum s = io::spectrum_from_table(io::read_csv(a.spectrum));
        io::write_atomic(a.out, io::spectrum_csv(apply_whitener(wh, s)));
    } else {
        const TimeSeries x = column_series(io::read_csv(a.series), a.column, a.series);
        io::write_atomic(a.out, io::series_csv(whiten_series(wh, x), x.name().empty() ? "x" : x.name()));
    }
    out << "wrote " << a.out << '\n';
    return ok;
}

struct DecimateArgs {
    std::string input;
    std::string column;
    std::size_t factor = 2;
    double edge_trim = 0.05;
    std::string out;
};

int cmd_decimate(const DecimateArgs& a, std::ostream& out) {
    const TimeSeries x = column_series(io::read_csv(a.input), a.column, a.input);
    const TimeSeries d = lowpass_and_decimate(x, {a.factor, a.edge_trim});
    io::write_atomic(a.out, io::series_csv(d, x.name().empty() ? "x" : x.name()));
    out << "wrote " << d.size() << " samples to " << a.out << '\n';
    return ok;
}

CLI::Option* add_config_option(CLI::App* app, std::string& path) {
    return app->add_option("--config", path, "key = value file; command-line flags take precedence")
        ->check(CLI::ExistingFile);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral independence causal inference for time series", "sdr-causal"};
    app.require_subcommand(1);

    InferArgs infer;
    SimulateArgs simulate;
    ExperimentArgs experiment;
    PsdArgs psd;
    WhitenFitArgs whiten_fit;
    WhitenApplyArgs whiten_apply;
    DecimateArgs decimate;
    std::string config_path;

    auto* c_infer = app.add_subcommand("infer", "Infer the causal direction between two series");
    c_infer->add_option("inputs", infer.inputs, "Two-column CSV (x, y) or two one-column CSVs")
        ->required()
        ->expected(1, 2);
    infer.welch.add(c_infer);
    c_infer->add_option("--floor-rel", infer.floor_rel, "Relative floor for spectral denominators")
        ->check(CLI::NonNegativeNumber);
    c_infer->add_option("--tie-tol", infer.tie_tol, "Relative tolerance for a tie")->check(CLI::NonNegativeNumber);
    c_infer->add_option("--whiten", infer.whiten, "Whitener JSON file, or 'fit' to fit one on this pair");
    c_infer->add_option("--out", infer.out, "Write the full report as JSON");

    auto* c_sim = app.add_subcommand("simulate", "Generate a cause/effect pair with known ground truth");
    c_sim->add_option("--cause", simulate.cause, "Cause process spec");
    c_sim->add_option("--m", simulate.m, "Filter length")->required()->check(CLI::PositiveNumber);
    c_sim->add_option("--sampler", simulate.sampler, "Filter coefficient sampler");
    c_sim->add_option("--n", simulate.n, "Series length")->check(CLI::PositiveNumber);
    c_sim->add_option("--seed", simulate.seed, "Random seed")->required();
    c_sim->add_option("--out", simulate.out, "Pair CSV")->required();
    c_sim->add_option("--truth", simulate.truth, "Ground-truth JSON");

    auto* c_exp = app.add_subcommand("experiment", "Run a Monte Carlo suite");
    add_config_option(c_exp, config_path);
    c_exp->add_option("--experiment", experiment.experiment, "Suite name")
        ->check(CLI::IsMember({"concentration", "identifiability", "fb_product", "decimation", "whitening"}));
    c_exp->add_option("--m", experiment.m_values, "Filter lengths, ascending")->delimiter(',');
    c_exp->add_option("--trials", experiment.trials, "Trials per (m, D)")->check(CLI::PositiveNumber);
    c_exp->add_option("--cause", experiment.cause, "Cause process spec");
    c_exp->add_option("--sampler", experiment.sampler, "Filter coefficient sampler");
    c_exp->add_option("--n", experiment.n, "Series length for estimated suites")->check(CLI::PositiveNumber);
    c_exp->add_option("-D,--factors", experiment.factors, "Decimation factors")->delimiter(',');
    c_exp->add_option("--seed", experiment.seed, "Base seed; trial i uses seed + i");
    c_exp->add_option("--mode", experiment.mode, "auto, analytic or estimated")
        ->check(CLI::IsMember({"auto", "analytic", "estimated"}));
    experiment.welch.add(c_exp);
    c_exp->add_option("--floor-rel", experiment.floor_rel)->check(CLI::NonNegativeNumber);
    c_exp->add_option("--edge-trim", experiment.edge_trim)->check(CLI::Range(0.0, 0.49));
    c_exp->add_option("--exponent-min", experiment.exponent_min)->check(CLI::NonNegativeNumber);
    c_exp->add_option("--exponent-max", experiment.exponent_max)->check(CLI::NonNegativeNumber);
    c_exp->add_option("--threads", experiment.threads, "0 = SDR_CAUSAL_THREADS or all cores");
    c_exp->add_option("--out-dir", experiment.out_dir, "Directory for rows.csv and summary.json");

    auto* c_psd = app.add_subcommand("psd", "Welch PSD estimate of one column");
    c_psd->add_option("input", psd.input)->required();
    c_psd->add_option("--column", psd.column, "Column name or index (default 0)");
    psd.welch.add(c_psd);
    c_psd->add_option("--out", psd.out, "Spectrum CSV (nu, value)")->required();

    auto* c_whiten = app.add_subcommand("whiten", "Fit or apply a dataset whitener");
    c_whiten->require_subcommand(1);
    auto* c_wfit = c_whiten->add_subcommand("fit", "Fit a whitener on every column of the inputs");
    c_wfit->add_option("inputs", whiten_fit.inputs)->required();
    whiten_fit.welch.add(c_wfit);
    c_wfit->add_option("--floor-rel", whiten_fit.floor_rel)->check(CLI::NonNegativeNumber);
    c_wfit->add_option("--out", whiten_fit.out, "Whitener JSON")->required();
    auto* c_wapply = c_whiten->add_subcommand("apply", "Apply a whitener to a spectrum or a series");
    c_wapply->add_option("--whitener", whiten_apply.whitener)->required();
    auto* g_spec = c_wapply->add_option("--spectrum", whiten_apply.spectrum, "Spectrum CSV");
    auto* g_series = c_wapply->add_option("--series", whiten_apply.series, "Series CSV");
    g_spec->excludes(g_series);
    c_wapply->add_option("--column", whiten_apply.column, "Column of the series file");
    c_wapply->add_option("--out", whiten_apply.out)->required();

    auto* c_dec = app.add_subcommand("decimate", "Ideal low-pass and keep one sample in D");
    c_dec->add_option("input", decimate.input)->required();
    c_dec->add_option("--column", decimate.column, "Column name or index (default 0)");
    c_dec->add_option("--factor", decimate.factor)->required()->check(CLI::PositiveNumber);
    c_dec->add_option("--edge-trim", decimate.edge_trim)->check(CLI::Range(0.0, 0.49));
    c_dec->add_option("--out", decimate.out)->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_or_io;
    }

    try {
        if (c_infer->parsed()) return cmd_infer(infer, out);
        if (c_sim->parsed()) return cmd_simulate(simulate, out);
        if (c_exp->parsed()) {
            if (!config_path.empty()) merge_config(*c_exp, config_path);
            if (c_exp->get_option("--seed")->count() == 0) {
                throw Error(ErrorKind::InvalidArgument, "--seed is required (flag or config key 'seed')");
            }
            if (experiment.out_dir.empty()) {
                throw Error(ErrorKind::InvalidArgument, "--out-dir is required (flag or config key 'out-dir')");
            }
            return cmd_experiment(experiment, out);
        }
        if (c_psd->parsed()) return cmd_psd(psd, out);
        if (c_wfit->parsed()) return cmd_whiten_fit(whiten_fit, out);
        if (c_wapply->parsed()) {
            if (whiten_apply.spectrum.empty() && whiten_apply.series.empty()) {
                throw Error(ErrorKind::InvalidArgument, "whiten apply needs --spectrum or --series");
            }
            return cmd_whiten_apply(whiten_apply, out);
        }
        if (c_dec->parsed()) return cmd_decimate(decimate, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_numerical() ? numerical : usage_or_io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage_or_io;
    }
    return usage_or_io;
}

}  // namespace sdrc::cli
