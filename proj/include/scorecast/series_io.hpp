#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "scorecast/trading.hpp"

namespace scorecast {

struct TimeSeries {
    std::vector<std::string> dates;  // ISO yyyy-mm-dd, strictly layout-checked
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

namespace detail {

inline bool iso_date_ok(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline double parse_number(const std::string& field, const std::string& path, std::size_t line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": line " + std::to_string(line) +
                                 ": not a number: '" + field + "'");
    }
    while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
    if (pos != field.size()) {
        throw std::runtime_error(path + ": line " + std::to_string(line) +
                                 ": trailing garbage after number: '" + field + "'");
    }
    if (!std::isfinite(v)) {
        throw std::runtime_error(path + ": line " + std::to_string(line) +
                                 ": non-finite value: '" + field + "'");
    }
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

/// Reads a two-column date,value CSV. Rules: '#' lines are comments, an
/// optional first line "date,value" is skipped, dates must be ISO
/// yyyy-mm-dd and unique, values must parse fully and be finite. Errors
/// carry the 1-based line number.
inline TimeSeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_series: cannot open " + path);
    TimeSeries out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = detail::split_csv(line);
        if (first_content) {
            first_content = false;
            if (fields.size() == 2 && fields[0] == "date" && fields[1] == "value") continue;
        }
        if (fields.size() != 2) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": expected 'date,value'");
        }
        if (!detail::iso_date_ok(fields[0])) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": bad ISO date: '" + fields[0] + "'");
        }
        if (!seen.insert(fields[0]).second) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": duplicate date: '" + fields[0] + "'");
        }
        out.dates.push_back(fields[0]);
        out.values.push_back(detail::parse_number(fields[1], path, lineno));
    }
    if (out.values.empty()) throw std::runtime_error("load_series: no observations in " + path);

    // The series contract is strictly increasing dates; files may arrive in
    // any order. ISO dates sort chronologically as strings.
    std::vector<std::size_t> order(out.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return out.dates[a] < out.dates[b]; });
    TimeSeries sorted;
    sorted.dates.reserve(out.size());
    sorted.values.reserve(out.size());
    for (std::size_t i : order) {
        sorted.dates.push_back(out.dates[i]);
        sorted.values.push_back(out.values[i]);
    }
    return sorted;
}

/// Shortest decimal representation that round-trips a double exactly.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_series(const std::string& path, const TimeSeries& series) {
    if (series.dates.size() != series.values.size()) {
        throw std::invalid_argument("write_series: misaligned series");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_series: cannot open " + path);
    out << "date,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.dates[i] << ',' << fmt_g17(series.values[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write_series: write failed for " + path);
}

/// FNV-1a over the canonical serialized configuration; embedded in every
/// report so outputs are traceable to the exact settings that made them.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Writes a CSV table with a leading "# config=<hash>" comment line. Cells
/// are emitted verbatim; numeric cells should be pre-formatted with
/// fmt_g17 so reruns are byte-identical.
inline void write_table_csv(const std::string& path, std::uint64_t config_hash,
                            const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_table_csv: cannot open " + path);
    out << "# config=" << hash_hex(config_hash) << '\n';
    for (std::size_t j = 0; j < header.size(); ++j) {
        out << header[j] << (j + 1 < header.size() ? ',' : '\n');
    }
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw std::invalid_argument("write_table_csv: row width mismatch");
        }
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << row[j] << (j + 1 < row.size() ? ',' : '\n');
        }
    }
    if (!out) throw std::runtime_error("write_table_csv: write failed for " + path);
}

/// Reads the six-column market data CSV used by the trading subcommands:
/// date,vix,futures_open,futures_close,stock_return,rf_return.
inline MarketData load_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_market: cannot open " + path);
    static const std::vector<std::string> expected = {
        "date", "vix", "futures_open", "futures_close", "stock_return", "rf_return"};
    MarketData out;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = detail::split_csv(line);
        if (!saw_header) {
            if (fields != expected) {
                throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                         ": expected header date,vix,futures_open,futures_close,"
                                         "stock_return,rf_return");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != expected.size()) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": expected 6 fields");
        }
        if (!detail::iso_date_ok(fields[0])) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": bad ISO date: '" + fields[0] + "'");
        }
        if (!seen.insert(fields[0]).second) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": duplicate date: '" + fields[0] + "'");
        }
        out.dates.push_back(fields[0]);
        out.vix.push_back(detail::parse_number(fields[1], path, lineno));
        out.futures_open.push_back(detail::parse_number(fields[2], path, lineno));
        out.futures_close.push_back(detail::parse_number(fields[3], path, lineno));
        out.stock_return.push_back(detail::parse_number(fields[4], path, lineno));
        out.rf_return.push_back(detail::parse_number(fields[5], path, lineno));
    }
    out.validate();
    return out;
}

}  // namespace scorecast
