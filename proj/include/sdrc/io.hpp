#pragma once

// CSV and JSON formats. CSV: comma separated, '#' starts a comment line, an
// optional header is detected by the first data line failing to parse as
// numbers. Numbers are written in shortest round-trip form so output bytes
// depend only on the values.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sdrc/error.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/harness.hpp"
#include "sdrc/info_geometry.hpp"
#include "sdrc/invariance.hpp"
#include "sdrc/sdr.hpp"
#include "sdrc/spectral.hpp"

namespace sdrc::io {

using json = nlohmann::ordered_json;

[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace detail

struct CsvTable {
    std::vector<std::string> header;
    /// Column-major numeric data.
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    /// Column index by header name, or by position if the table has no header.
    [[nodiscard]] std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw Error(ErrorKind::Parse, "no column named '" + std::string(name) + "'");
    }
};

/// Parses CSV text; `source` names the input in error messages.
[[nodiscard]] inline CsvTable parse_csv(std::string_view text, const std::string& source) {
    CsvTable table;
    std::size_t width = 0;
    std::size_t line_no = 0;
    bool seen_data = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto cells = detail::split(line);
        const auto where = source + ":" + std::to_string(line_no);

        std::vector<double> values;
        std::optional<std::size_t> bad;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto v = detail::parse_number(cells[i]);
            if (!v) {
                bad = i;
                break;
            }
            values.push_back(*v);
        }

        if (!seen_data) {
            seen_data = true;
            width = cells.size();
            table.columns.resize(width);
            if (bad) {
                for (auto c : cells) table.header.emplace_back(c);
                continue;
            }
        }
        if (cells.size() != width) {
            throw Error(ErrorKind::Parse, where + ": expected " + std::to_string(width) + " columns, found " +
                                              std::to_string(cells.size()));
        }
        if (bad) {
            throw Error(ErrorKind::Parse, where + ": column " + std::to_string(*bad + 1) +
                                              " is not a number: '" + std::string(cells[*bad]) + "'");
        }
        for (std::size_t i = 0; i < width; ++i) {
            if (!std::isfinite(values[i])) {
                throw Error(ErrorKind::Parse, where + ": column " + std::to_string(i + 1) + " is not finite");
            }
            table.columns[i].push_back(values[i]);
        }
    }
    if (table.rows() == 0) throw Error(ErrorKind::Parse, source + ": no data rows");
    return table;
}

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[nodiscard]] inline CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path), path.string());
}

/// Writes to a temporary sibling and renames it over the target.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot move output into place at " + path.string());
    }
}

// ---------------------------------------------------------------------------
// CSV writers

[[nodiscard]] inline std::string pair_csv(const TimeSeries& x, const TimeSeries& y) {
    sdrc::detail::require(x.size() == y.size(), ErrorKind::InvalidArgument, "pair columns differ in length");
    std::string out = "x,y\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += format_double(x[i]);
        out += ',';
        out += format_double(y[i]);
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::string series_csv(const TimeSeries& x, std::string_view column = "x") {
    std::string out(column);
    out += '\n';
    for (double v : x.samples()) {
        out += format_double(v);
        out += '\n';
    }
    return out;
}

/// Columns nu, value with nu = k / M.
[[nodiscard]] inline std::string spectrum_csv(const Spectrum& s) {
    std::string out = "nu,value\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += format_double(s.grid().nu(k));
        out += ',';
        out += format_double(s[k]);
        out += '\n';
    }
    return out;
}

/// Inverse of spectrum_csv; the grid size is the number of rows.
[[nodiscard]] inline Spectrum spectrum_from_table(const CsvTable& t) {
    const std::size_t col = t.columns.size() >= 2 ? (t.header.empty() ? 1 : t.index_of("value")) : 0;
    return Spectrum(FrequencyGrid(t.rows()), t.columns[col]);
}

inline const char* rows_csv_header =
    "experiment,variant,mode,m,D,trial,seed,rho_fwd,rho_bwd,product,cv,bound,decision_correct\n";

[[nodiscard]] inline std::string rows_csv(const std::vector<ResultRow>& rows) {
    std::string out = rows_csv_header;
    for (const auto& r : rows) {
        out += to_string(r.experiment);
        out += ',';
        out += r.variant;
        out += ',';
        out += to_string(r.mode);
        out += ',' + std::to_string(r.m) + ',' + std::to_string(r.d) + ',' + std::to_string(r.trial) + ',' +
               std::to_string(r.seed) + ',';
        out += format_double(r.rho_fwd) + ',' + format_double(r.rho_bwd) + ',' + format_double(r.product) +
               ',' + format_double(r.cv) + ',';
        if (r.bound) out += format_double(*r.bound);
        out += r.decision_correct ? ",1\n" : ",0\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> read_optional(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

template <typename F>
auto guarded(std::string_view what, F&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, "invalid " + std::string(what) + " JSON: " + e.what());
    }
}

inline Direction direction_from_string(const std::string& s) {
    if (s == "XtoY") return Direction::XtoY;
    if (s == "YtoX") return Direction::YtoX;
    if (s == "tie") return Direction::tie;
    throw Error(ErrorKind::Parse, "unknown decision '" + s + "'");
}

}  // namespace detail

[[nodiscard]] inline json to_json(const FirFilter& f) {
    return json{{"coeffs", f.coeffs()}, {"delay", f.delay()}};
}

[[nodiscard]] inline FirFilter filter_from_json(const json& j) {
    return detail::guarded("filter", [&] {
        return FirFilter(j.at("coeffs").get<std::vector<double>>(), j.value("delay", 0));
    });
}

[[nodiscard]] inline json to_json(const SdrReport& r) {
    return json{{"rho_forward", r.rho_forward},
                {"rho_backward", r.rho_backward},
                {"decision", std::string(to_string(r.decision))},
                {"cv_response", detail::optional_number(r.cv_response)},
                {"fb_product", r.fb_product},
                {"fb_bound", detail::optional_number(r.fb_bound)},
                {"alpha_margin", detail::optional_number(r.alpha_margin)}};
}

[[nodiscard]] inline SdrReport report_from_json(const json& j) {
    return detail::guarded("report", [&] {
        SdrReport r;
        r.rho_forward = j.at("rho_forward").get<double>();
        r.rho_backward = j.at("rho_backward").get<double>();
        r.decision = detail::direction_from_string(j.at("decision").get<std::string>());
        r.cv_response = detail::read_optional(j, "cv_response");
        r.fb_product = j.at("fb_product").get<double>();
        r.fb_bound = detail::read_optional(j, "fb_bound");
        r.alpha_margin = detail::read_optional(j, "alpha_margin");
        return r;
    });
}

[[nodiscard]] inline json to_json(const DivergenceDecomposition& d) {
    return json{{"d_y_to_manifold", d.d_y_to_manifold},   {"d_x_to_manifold", d.d_x_to_manifold},
                {"d_arrow_py_to_uy", d.d_arrow_py_to_uy}, {"residual_term", d.residual_term},
                {"identity_gap", d.identity_gap},         {"rho_forward", d.rho_forward}};
}

[[nodiscard]] inline DivergenceDecomposition decomposition_from_json(const json& j) {
    return detail::guarded("decomposition", [&] {
        DivergenceDecomposition d;
        d.d_y_to_manifold = j.at("d_y_to_manifold").get<double>();
        d.d_x_to_manifold = j.at("d_x_to_manifold").get<double>();
        d.d_arrow_py_to_uy = j.at("d_arrow_py_to_uy").get<double>();
        d.residual_term = j.at("residual_term").get<double>();
        d.identity_gap = j.at("identity_gap").get<double>();
        d.rho_forward = j.at("rho_forward").get<double>();
        return d;
    });
}

[[nodiscard]] inline json to_json(const Whitener& w) {
    return json{{"gain", w.gain().values()}, {"gamma", w.gamma()}, {"grid", w.grid().size()}};
}

[[nodiscard]] inline Whitener whitener_from_json(const json& j) {
    return detail::guarded("whitener", [&] {
        auto gain = j.at("gain").get<std::vector<double>>();
        const auto m = j.at("grid").get<std::size_t>();
        if (gain.size() != m) {
            throw Error(ErrorKind::Parse, "whitener gain has " + std::to_string(gain.size()) +
                                              " bins but grid says " + std::to_string(m));
        }
        return Whitener(Spectrum(FrequencyGrid(m), std::move(gain)), j.at("gamma").get<double>());
    });
}

[[nodiscard]] inline json to_json(const SummaryRow& s) {
    return json{{"m", s.m},
                {"D", s.d},
                {"variant", s.variant},
                {"count", s.count},
                {"accuracy", s.accuracy},
                {"median_abs_dev", s.median_abs_dev},
                {"q95_abs_dev", s.q95_abs_dev},
                {"median_rho_fwd", s.median_rho_fwd},
                {"iqr_rho_fwd", s.iqr_rho_fwd},
                {"median_product", s.median_product},
                {"median_cv", s.median_cv},
                {"concentration_bound", detail::optional_number(s.concentration_bound)},
                {"k_constant", detail::optional_number(s.k_constant)},
                {"bound_satisfied", detail::optional_number(s.bound_satisfied)}};
}

[[nodiscard]] inline json summary_json(const ExperimentResult& r, std::uint64_t base_seed) {
    json groups = json::array();
    for (const auto& s : r.summary) groups.push_back(to_json(s));
    return json{{"experiment", std::string(to_string(r.experiment))},
                {"base_seed", base_seed},
                {"seed_rule", "seed_i = base_seed + i"},
                {"rows", r.rows.size()},
                {"groups", std::move(groups)}};
}

[[nodiscard]] inline json read_json(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

}  // namespace sdrc::io
