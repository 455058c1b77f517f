#pragma once
// CSV persistence for spectra and detuning maps.
//
// File shape (spectrum):
//   # power_w = <%.17g>
//   # delta_hz = <%.17g>
//   # temperature_c = <%.17g>
//   # seed = <uint64>
//   # timestamp = <int64>
//   # model_version = 1
//   omega_hz,reflectivity,sigma
//   <%.17g>,<%.17g>,<%.17g>
//   ...
// Maps drop the delta_hz header key and prepend a delta_hz column; rows are
// grouped by detuning (row-major).  %.17g round-trips IEEE doubles exactly,
// so read(write(s)) == s bit for bit.  Writes go to "<path>.tmp" first and
// are renamed into place, so a crash never leaves a half-written file.

#include <cerrno>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthesis.hpp"

namespace omspec {

inline constexpr int csv_model_version = 1;

/// Filesystem-level failure (cannot open, write, or rename).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed file content; message carries "<path>:<line>".
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot open for writing: " + tmp);
        out << content;
        out.flush();
        if (!out)
            throw io_error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw io_error("cannot rename into place: " + path);
    }
}

struct csv_header {
    SpectrumMeta meta;
    bool has_delta = false; // spectrum files carry delta_hz as a header key
    int version = 0;
};

[[noreturn]] inline void fail_parse(const std::string& path, std::size_t line,
                                    const std::string& what) {
    throw parse_error(path + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double_field(const std::string& text, const std::string& path,
                                 std::size_t line) {
    const char* s = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        fail_parse(path, line, "expected a number, got '" + text + "'");
    return v;
}

} // namespace detail

/// Serialize a spectrum to CSV text (see the format note at the top).
inline std::string to_csv(const Spectrum& s) {
    std::string out;
    out += "# power_w = " + detail::fmt_double(s.meta.power_w) + "\n";
    out += "# delta_hz = " + detail::fmt_double(s.meta.delta_hz) + "\n";
    out += "# temperature_c = " + detail::fmt_double(s.meta.temperature_c) + "\n";
    out += "# seed = " + std::to_string(s.meta.seed) + "\n";
    out += "# timestamp = " + std::to_string(s.meta.timestamp) + "\n";
    out += "# model_version = " + std::to_string(csv_model_version) + "\n";
    out += "omega_hz,reflectivity,sigma\n";
    for (std::size_t i = 0; i < s.omega.size(); ++i) {
        out += detail::fmt_double(s.omega[i]);
        out += ',';
        out += detail::fmt_double(s.r[i]);
        out += ',';
        out += detail::fmt_double(s.sigma[i]);
        out += '\n';
    }
    return out;
}

/// Serialize a detuning map to CSV text.
inline std::string to_csv(const DetuningMap& m) {
    std::string out;
    out += "# power_w = " + detail::fmt_double(m.meta.power_w) + "\n";
    out += "# temperature_c = " + detail::fmt_double(m.meta.temperature_c) + "\n";
    out += "# seed = " + std::to_string(m.meta.seed) + "\n";
    out += "# timestamp = " + std::to_string(m.meta.timestamp) + "\n";
    out += "# model_version = " + std::to_string(csv_model_version) + "\n";
    out += "delta_hz,omega_hz,reflectivity,sigma\n";
    const std::string sig = detail::fmt_double(m.sigma);
    for (std::size_t k = 0; k < m.delta_grid.size(); ++k) {
        const std::string dk = detail::fmt_double(m.delta_grid[k]);
        for (std::size_t j = 0; j < m.omega_grid.size(); ++j) {
            out += dk;
            out += ',';
            out += detail::fmt_double(m.omega_grid[j]);
            out += ',';
            out += detail::fmt_double(m.r[k][j]);
            out += ',';
            out += sig;
            out += '\n';
        }
    }
    return out;
}

namespace detail {

// Shared header scanner: consumes "# key = value" lines and the column
// header, returns the meta block.  `lines` / `lineno` advance past them.
inline csv_header read_header(std::istream& in, const std::string& path,
                              std::size_t& lineno, std::string& first_data,
                              const char* expected_columns) {
    csv_header h;
    bool saw_version = false;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos)
                fail_parse(path, lineno, "malformed header line '" + line + "'");
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 3);
            if (key == "power_w")
                h.meta.power_w = parse_double_field(val, path, lineno);
            else if (key == "delta_hz") {
                h.meta.delta_hz = parse_double_field(val, path, lineno);
                h.has_delta = true;
            } else if (key == "temperature_c")
                h.meta.temperature_c = parse_double_field(val, path, lineno);
            else if (key == "seed")
                h.meta.seed = static_cast<std::uint64_t>(std::strtoull(val.c_str(), nullptr, 10));
            else if (key == "timestamp")
                h.meta.timestamp = static_cast<std::int64_t>(std::strtoll(val.c_str(), nullptr, 10));
            else if (key == "model_version") {
                h.version = std::atoi(val.c_str());
                saw_version = true;
            } else
                fail_parse(path, lineno, "unknown header key '" + key + "'");
            continue;
        }
        if (line != expected_columns)
            fail_parse(path, lineno, "expected column header '" + std::string(expected_columns) +
                                         "', got '" + line + "'");
        if (!saw_version)
            fail_parse(path, lineno, "missing model_version header");
        if (h.version != csv_model_version)
            fail_parse(path, lineno, "unsupported model_version " + std::to_string(h.version));
        first_data.clear();
        return h;
    }
    fail_parse(path, lineno + 1, "missing column header");
}

inline std::vector<double> split_row(const std::string& line, std::size_t n,
                                     const std::string& path, std::size_t lineno) {
    std::vector<double> out;
    out.reserve(n);
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const std::string field =
            line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back(parse_double_field(field, path, lineno));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    if (out.size() != n)
        fail_parse(path, lineno, "expected " + std::to_string(n) + " columns, got " +
                                     std::to_string(out.size()));
    return out;
}

} // namespace detail

/// Write a spectrum CSV (atomic: temp file + rename).
inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
    detail::write_atomic(path, to_csv(s));
}

/// Write a detuning-map CSV (atomic: temp file + rename).
inline void write_map_csv(const std::string& path, const DetuningMap& m) {
    detail::write_atomic(path, to_csv(m));
}

/// Read a spectrum CSV.  Throws io_error if the file cannot be opened and
/// parse_error (with path:line) on malformed content.
inline Spectrum read_spectrum_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open: " + path);
    std::size_t lineno = 0;
    std::string first_data;
    const auto h = detail::read_header(in, path, lineno, first_data, "omega_hz,reflectivity,sigma");

    Spectrum s;
    s.meta = h.meta;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto row = detail::split_row(line, 3, path, lineno);
        s.omega.push_back(row[0]);
        s.r.push_back(row[1]);
        s.sigma.push_back(row[2]);
    }
    if (s.omega.empty())
        detail::fail_parse(path, lineno, "no data rows");
    return s;
}

/// Read a detuning-map CSV.  Rows must be grouped by detuning and every
/// block must repeat the same omega grid.
inline DetuningMap read_map_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open: " + path);
    std::size_t lineno = 0;
    std::string first_data;
    const auto h =
        detail::read_header(in, path, lineno, first_data, "delta_hz,omega_hz,reflectivity,sigma");

    DetuningMap m;
    m.meta = h.meta;
    std::string line;
    std::vector<double> cur_omega;
    std::vector<double> cur_r;
    bool any = false;
    double cur_delta = 0.0;

    auto flush_block = [&]() {
        if (!any)
            return;
        if (m.omega_grid.empty())
            m.omega_grid = cur_omega;
        else if (cur_omega != m.omega_grid)
            detail::fail_parse(path, lineno, "detuning blocks disagree on the omega grid");
        m.delta_grid.push_back(cur_delta);
        m.r.push_back(cur_r);
        cur_omega.clear();
        cur_r.clear();
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto row = detail::split_row(line, 4, path, lineno);
        if (!any || row[0] != cur_delta) {
            flush_block();
            cur_delta = row[0];
            any = true;
        }
        cur_omega.push_back(row[1]);
        cur_r.push_back(row[2]);
        m.sigma = row[3];
    }
    flush_block();
    if (m.delta_grid.empty())
        detail::fail_parse(path, lineno, "no data rows");
    for (std::size_t k = 1; k < m.delta_grid.size(); ++k)
        if (!(m.delta_grid[k] > m.delta_grid[k - 1]))
            detail::fail_parse(path, lineno, "detuning blocks must be strictly increasing");
    return m;
}

} // namespace omspec
