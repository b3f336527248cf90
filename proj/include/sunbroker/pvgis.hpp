#pragma once

#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sunbroker/errors.hpp"
#include "sunbroker/solar.hpp"
#include "sunbroker/time.hpp"

namespace sunbroker {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& s, std::size_t line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("unparseable ") + what + " '" + s + "'", line_no);
    }
}

} // namespace detail

// Timestamp field of a PVGIS hourly export row: YYYYMMDD:HHMM, UTC.
inline UtcTime parse_pvgis_stamp(const std::string& s, std::size_t line_no) {
    int y;
    unsigned mo, d, h, mi;
    if (s.size() != 13 || s[8] != ':' ||
        std::sscanf(s.c_str(), "%4d%2u%2u:%2u%2u", &y, &mo, &d, &h, &mi) != 5)
        throw FormatError("unparseable PVGIS timestamp '" + s + "'", line_no);
    if (h > 23 || mi > 59) throw FormatError("out-of-range time in '" + s + "'", line_no);
    try {
        return make_utc(y, mo, d, h, mi);
    } catch (const DomainError& e) {
        throw FormatError(e.what(), line_no);
    }
}

// Parses the PVGIS web-tool hourly CSV export: free-form metadata preamble,
// then a header line with `time` and `G(i)` columns, then one row per hour.
// Trailing metadata after the data block is skipped.
inline std::vector<IrradianceSample> parse_pvgis_hourly(std::istream& in) {
    std::vector<IrradianceSample> samples;
    std::string line;
    std::size_t line_no = 0;
    std::size_t time_col = 0, gi_col = 0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = detail::split_csv_line(line);

        if (!header_seen) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (detail::strip(fields[i]) == "time") {
                    header_seen = true;
                    time_col = i;
                    gi_col = fields.size(); // sentinel: not found yet
                    for (std::size_t j = 0; j < fields.size(); ++j)
                        if (detail::strip(fields[j]) == "G(i)") gi_col = j;
                    if (gi_col == fields.size())
                        throw FormatError("header has no G(i) column", line_no);
                    break;
                }
            }
            continue;
        }

        // Data block ends at the first blank or non-timestamp line.
        if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) {
            if (!samples.empty()) break;
            throw FormatError("expected data row after header", line_no);
        }
        if (fields.size() <= std::max(time_col, gi_col))
            throw FormatError("row has too few fields", line_no);

        UtcTime ts = parse_pvgis_stamp(detail::strip(fields[time_col]), line_no);
        double poa = detail::parse_double(detail::strip(fields[gi_col]), line_no, "irradiance");
        if (poa < 0.0) throw FormatError("negative irradiance", line_no);
        if (!samples.empty() && !(samples.back().timestamp < ts))
            throw FormatError("timestamps not strictly increasing", line_no);
        samples.push_back({ts, poa});
    }

    if (samples.empty())
        throw Error("no irradiance data found (preamble only or empty input)");
    return samples;
}

// Truncates sub-hour offsets (PVGIS stamps like :10) to the containing hour.
inline std::vector<IrradianceSample> align_to_hours(std::span<const IrradianceSample> samples) {
    std::vector<IrradianceSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        UtcTime h = truncate_to_hour(s.timestamp);
        if (!out.empty() && !(out.back().timestamp < h))
            throw Error("duplicate hour after alignment at " + format_iso8601(h));
        out.push_back({h, s.poa});
    }
    return out;
}

// Canonical production-trace CSV: the library's interchange format.
inline void write_trace_csv(std::ostream& out, std::span<const IrradianceSample> samples) {
    out << "timestamp,poa_wm2\n";
    char buf[32];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.poa);
        out << format_iso8601(s.timestamp) << ',' << buf << '\n';
    }
}

inline std::vector<IrradianceSample> read_trace_csv(std::istream& in) {
    std::vector<IrradianceSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (detail::strip(line) != "timestamp,poa_wm2")
                throw FormatError("expected header 'timestamp,poa_wm2'", line_no);
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2) throw FormatError("expected 2 fields", line_no);
        UtcTime ts;
        try {
            ts = parse_iso8601(fields[0]);
        } catch (const FormatError& e) {
            throw FormatError(e.what(), line_no);
        }
        double poa = detail::parse_double(fields[1], line_no, "irradiance");
        if (poa < 0.0) throw FormatError("negative irradiance", line_no);
        if (!samples.empty() && !(samples.back().timestamp < ts))
            throw FormatError("timestamps not strictly increasing", line_no);
        samples.push_back({ts, poa});
    }
    if (samples.empty()) throw Error("empty production trace");
    return samples;
}

} // namespace sunbroker
