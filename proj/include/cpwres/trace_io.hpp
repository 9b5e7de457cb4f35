#pragma once

// Trace persistence: CSV (frequency_hz,s21_re,s21_im) and Touchstone v1.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cpwres/error.hpp"
#include "cpwres/trace.hpp"
#include "cpwres/units.hpp"

namespace cpwres {

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// "key=value" metadata inside a comment; power_dbm lands in the trace field.
inline void absorb_metadata(std::string_view comment, S21Trace& t, const std::string& source, std::size_t line) {
    comment = trim(comment);
    const auto eq = comment.find('=');
    if (eq == std::string_view::npos) return;
    const std::string key(trim(comment.substr(0, eq)));
    const std::string value(trim(comment.substr(eq + 1)));
    if (key.empty() || key.find(' ') != std::string::npos) return;
    if (key == "power_dbm") {
        double p = 0.0;
        if (!parse_double(value, p)) throw ParseError(source, line, "invalid power_dbm value '" + value + "'");
        t.incident_power_dbm = p;
    } else {
        t.metadata[key] = value;
    }
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    return os;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    return is;
}

}  // namespace detail

inline void write_csv_trace(const S21Trace& t, std::ostream& os) {
    t.validate();
    if (t.incident_power_dbm) os << "# power_dbm=" << detail::fmt17(*t.incident_power_dbm) << '\n';
    os << "frequency_hz,s21_re,s21_im\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        os << detail::fmt17(t.frequencies[i]) << ',' << detail::fmt17(t.s21[i].real()) << ','
           << detail::fmt17(t.s21[i].imag()) << '\n';
}

inline void write_csv_trace(const S21Trace& t, const std::filesystem::path& path) {
    auto os = detail::open_for_write(path);
    write_csv_trace(t, os);
    if (!os) throw IoError("write failed: " + path.string());
}

inline S21Trace read_csv_trace(std::istream& is, const std::string& source = "<csv>") {
    S21Trace t;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string_view s = detail::trim(line);
        if (s.empty()) continue;
        if (s.front() == '#') {
            detail::absorb_metadata(s.substr(1), t, source, lineno);
            continue;
        }
        if (!header_seen) {
            if (std::string(s).find("frequency_hz") != 0)
                throw ParseError(source, lineno, "expected header 'frequency_hz,s21_re,s21_im'");
            header_seen = true;
            continue;
        }
        double v[3];
        std::size_t start = 0;
        for (int k = 0; k < 3; ++k) {
            const std::size_t comma = s.find(',', start);
            const bool last = k == 2;
            if (last != (comma == std::string_view::npos)) throw ParseError(source, lineno, "expected 3 columns");
            const auto field = s.substr(start, last ? std::string_view::npos : comma - start);
            if (!detail::parse_double(field, v[k])) throw ParseError(source, lineno, "invalid number '" + std::string(field) + "'");
            start = comma + 1;
        }
        if (!t.frequencies.empty() && !(v[0] > t.frequencies.back()))
            throw ParseError(source, lineno, "frequencies must be strictly increasing");
        t.frequencies.push_back(v[0]);
        t.s21.emplace_back(v[1], v[2]);
    }
    if (!header_seen) throw ParseError(source, lineno, "missing header");
    return t;
}

inline S21Trace read_csv_trace(const std::filesystem::path& path) {
    auto is = detail::open_for_read(path);
    return read_csv_trace(is, path.string());
}

/// Two-port Touchstone v1, RI format, Hz. Unknown S11/S22 are written as 0
/// and S12 = S21.
inline void write_touchstone(const S21Trace& t, std::ostream& os) {
    if (t.empty()) throw DomainError("write_touchstone: empty trace");
    t.validate();
    os << "! cpwres two-port S-parameters\n";
    if (t.incident_power_dbm) os << "! power_dbm=" << detail::fmt17(*t.incident_power_dbm) << '\n';
    os << "# Hz S RI R 50\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const cplx s11 = t.s11.empty() ? cplx{} : t.s11[i];
        const cplx s22 = t.s22.empty() ? cplx{} : t.s22[i];
        const cplx s21 = t.s21[i];
        os << detail::fmt17(t.frequencies[i]);
        for (const cplx& z : {s11, s21, s21, s22}) os << ' ' << detail::fmt17(z.real()) << ' ' << detail::fmt17(z.imag());
        os << '\n';
    }
}

inline void write_touchstone(const S21Trace& t, const std::filesystem::path& path) {
    if (t.empty()) throw DomainError("write_touchstone: empty trace");
    auto os = detail::open_for_write(path);
    write_touchstone(t, os);
    if (!os) throw IoError("write failed: " + path.string());
}

/// Touchstone v1 reader. `ports` is 1 or 2; the transmission trace is S21 for
/// two-port files and the single parameter for one-port files. RI, MA and DB
/// formats and Hz/kHz/MHz/GHz units are recognised.
inline S21Trace read_touchstone(std::istream& is, int ports, const std::string& source = "<touchstone>") {
    if (ports != 1 && ports != 2) throw DomainError("read_touchstone: only 1- and 2-port files are supported");
    const std::size_t per_record = ports == 1 ? 3 : 9;
    double unit = 1e9;
    std::string format = "ma";
    bool option_seen = false;

    S21Trace t;
    std::vector<double> record;
    std::size_t record_line = 0;
    std::string line;
    std::size_t lineno = 0;

    auto flush = [&] {
        const double f = record[0] * unit;
        auto value = [&](std::size_t k) {
            const double x = record[k], y = record[k + 1];
            if (format == "ri") return cplx(x, y);
            const double mag = format == "db" ? std::pow(10.0, x / 20.0) : x;
            return std::polar(mag, y * kPi / 180.0);
        };
        if (!t.frequencies.empty() && !(f > t.frequencies.back()))
            throw ParseError(source, record_line, "frequencies must be strictly increasing");
        t.frequencies.push_back(f);
        if (ports == 1) {
            t.s21.push_back(value(1));
        } else {
            t.s11.push_back(value(1));
            t.s21.push_back(value(3));
            t.s22.push_back(value(7));
        }
        record.clear();
    };

    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view s = line;
        if (const auto bang = s.find('!'); bang != std::string_view::npos) {
            detail::absorb_metadata(s.substr(bang + 1), t, source, lineno);
            s = s.substr(0, bang);
        }
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '#') {
            if (option_seen) throw ParseError(source, lineno, "duplicate option line");
            option_seen = true;
            std::istringstream opts{std::string(s.substr(1))};
            std::string tok;
            while (opts >> tok) {
                tok = detail::lower(tok);
                if (tok == "hz") unit = 1.0;
                else if (tok == "khz") unit = 1e3;
                else if (tok == "mhz") unit = 1e6;
                else if (tok == "ghz") unit = 1e9;
                else if (tok == "ri" || tok == "ma" || tok == "db") format = tok;
                else if (tok == "s") continue;
                else if (tok == "y" || tok == "z" || tok == "h" || tok == "g")
                    throw ParseError(source, lineno, "only S-parameter files are supported");
                else if (tok == "r") {
                    double r = 0.0;
                    if (!(opts >> r) || !(r > 0.0)) throw ParseError(source, lineno, "invalid reference impedance");
                } else
                    throw ParseError(source, lineno, "unknown option '" + tok + "'");
            }
            continue;
        }
        std::istringstream nums{std::string(s)};
        std::string tok;
        while (nums >> tok) {
            double v = 0.0;
            if (!detail::parse_double(tok, v)) throw ParseError(source, lineno, "invalid number '" + tok + "'");
            if (record.empty()) record_line = lineno;
            record.push_back(v);
            if (record.size() == per_record) flush();
        }
    }
    if (!record.empty()) throw ParseError(source, record_line, "incomplete data record");
    if (t.empty()) throw ParseError(source, lineno, "no data records");
    return t;
}

inline int touchstone_ports(const std::filesystem::path& path) {
    const std::string ext = detail::lower(path.extension().string());
    if (ext == ".s1p") return 1;
    if (ext == ".s2p") return 2;
    throw DomainError("unsupported Touchstone extension '" + ext + "'");
}

inline S21Trace read_touchstone(const std::filesystem::path& path) {
    const int ports = touchstone_ports(path);
    auto is = detail::open_for_read(path);
    return read_touchstone(is, ports, path.string());
}

/// Dispatch on extension: .csv, .s1p, .s2p.
inline S21Trace load_trace(const std::filesystem::path& path) {
    const std::string ext = detail::lower(path.extension().string());
    S21Trace t = ext == ".csv" ? read_csv_trace(path) : read_touchstone(path);
    if (!t.metadata.count("id")) t.metadata["id"] = path.stem().string();
    return t;
}

inline bool is_trace_file(const std::filesystem::path& path) {
    const std::string ext = detail::lower(path.extension().string());
    return ext == ".csv" || ext == ".s1p" || ext == ".s2p";
}

}  // namespace cpwres
