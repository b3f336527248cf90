#pragma once

#include <istream>
#include <ostream>
#include <vector>

#include "sunbroker/forecast.hpp"
#include "sunbroker/pvgis.hpp"

namespace sunbroker {

inline constexpr const char* kRecordsCsvHeader =
    "target_time,clearsky_kw,obs_cloud_pct,obs_temp_c,obs_wind_ms,obs_uv,obs_text,"
    "fcst_cloud_pct,fcst_temp_c,fcst_wind_ms,fcst_precip_mmh,fcst_humidity_pct,"
    "last_production_kw,production_kw";

// Forecast dataset interchange CSV: one row per supervised example.
inline void write_records_csv(std::ostream& out, std::span<const Record> records) {
    out << kRecordsCsvHeader << '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : records) {
        out << format_iso8601(r.target_time) << ',' << num(r.clearsky) << ','
            << num(r.obs.cloud_cover) << ',' << num(r.obs.temperature) << ','
            << num(r.obs.wind_speed) << ',' << num(r.obs.uv_index) << ',' << r.obs.weather_text
            << ',' << num(r.fcst.cloud_cover) << ',' << num(r.fcst.temperature) << ','
            << num(r.fcst.wind_speed) << ',' << num(r.fcst.precipitation) << ','
            << num(r.fcst.humidity) << ',' << num(r.last_production) << ',' << num(r.production)
            << '\n';
    }
}

inline std::vector<Record> parse_records_csv(std::istream& in) {
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kRecordsCsvHeader)
                throw FormatError("unexpected records header", line_no);
            continue;
        }
        const auto f = detail::split_csv_line(line);
        if (f.size() != 14) throw FormatError("expected 14 fields", line_no);
        auto num = [&](std::size_t i, const char* what) {
            return detail::parse_double(f[i], line_no, what);
        };
        Record r;
        try {
            r.target_time = parse_iso8601(f[0]);
        } catch (const FormatError& e) {
            throw FormatError(e.what(), line_no);
        }
        r.clearsky = num(1, "clearsky_kw");
        r.obs = WeatherObservation{num(2, "obs_cloud_pct"), num(3, "obs_temp_c"),
                                   num(4, "obs_wind_ms"), num(5, "obs_uv"), f[6]};
        r.fcst = WeatherForecast{num(7, "fcst_cloud_pct"), num(8, "fcst_temp_c"),
                                 num(9, "fcst_wind_ms"), num(10, "fcst_precip_mmh"),
                                 num(11, "fcst_humidity_pct")};
        r.last_production = num(12, "last_production_kw");
        r.production = num(13, "production_kw");
        if (!records.empty() && !(records.back().target_time < r.target_time))
            throw FormatError("target_time not strictly increasing", line_no);
        records.push_back(std::move(r));
    }
    if (records.empty()) throw Error("empty records file");
    return records;
}

} // namespace sunbroker
