#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sunbroker/errors.hpp"
#include "sunbroker/time.hpp"

namespace sunbroker {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct GeoLocation {
    double latitude;  // degrees, +north
    double longitude; // degrees, +east

    GeoLocation(double lat, double lon) : latitude(lat), longitude(lon) {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw DomainError("latitude " + std::to_string(lat) + " outside [-90, 90]");
        if (!(lon >= -180.0 && lon <= 180.0))
            throw DomainError("longitude " + std::to_string(lon) + " outside [-180, 180]");
    }
};

struct PlantConfig {
    GeoLocation location;
    double tilt;        // degrees from horizontal, [0, 90]
    double azimuth;     // degrees clockwise from north, 180 = south
    double p_mpp;       // nominal power at STC, kW
    double system_loss; // lumped loss fraction, [0, 1)

    PlantConfig(GeoLocation loc, double tilt_deg, double azimuth_deg, double p_mpp_kw,
                double loss)
        : location(loc), tilt(tilt_deg), azimuth(azimuth_deg), p_mpp(p_mpp_kw), system_loss(loss) {
        if (!(tilt >= 0.0 && tilt <= 90.0))
            throw DomainError("tilt " + std::to_string(tilt) + " outside [0, 90]");
        if (!(azimuth >= 0.0 && azimuth < 360.0))
            throw DomainError("azimuth " + std::to_string(azimuth) + " outside [0, 360)");
        if (!(p_mpp > 0.0))
            throw DomainError("p_mpp must be > 0");
        if (!(system_loss >= 0.0 && system_loss < 1.0))
            throw DomainError("system_loss must be in [0, 1)");
    }

    double eta_sys() const { return 1.0 - system_loss; }
};

struct SolarPosition {
    double elevation; // degrees above horizon, [-90, 90]
    double azimuth;   // degrees clockwise from north, [0, 360)
    double zenith() const { return 90.0 - elevation; }
};

// Sun position from the NOAA low-precision algorithm. Good to roughly a
// hundredth of a degree over 1950-2100, which is plenty for hourly energy
// aggregation.
inline SolarPosition solar_position(const GeoLocation& loc, UtcTime t) {
    CivilTime c = civil(t);
    if (c.year < 1950 || c.year > 2100)
        throw DomainError("timestamp year " + std::to_string(c.year) +
                          " outside supported range 1950-2100");

    const double jd = 2440587.5 + double(t.time_since_epoch().count()) / 86400.0;
    const double T = (jd - 2451545.0) / 36525.0; // Julian centuries from J2000

    double l0 = std::fmod(280.46646 + T * (36000.76983 + 0.0003032 * T), 360.0);
    if (l0 < 0) l0 += 360.0;
    const double m = 357.52911 + T * (35999.05029 - 0.0001537 * T);
    const double ecc = 0.016708634 - T * (0.000042037 + 0.0000001267 * T);
    const double mrad = m * kDegToRad;
    const double center = std::sin(mrad) * (1.914602 - T * (0.004817 + 0.000014 * T)) +
                          std::sin(2 * mrad) * (0.019993 - 0.000101 * T) +
                          std::sin(3 * mrad) * 0.000289;
    const double true_long = l0 + center;
    const double omega = (125.04 - 1934.136 * T) * kDegToRad;
    const double app_long = (true_long - 0.00569 - 0.00478 * std::sin(omega)) * kDegToRad;

    const double eps0 =
        23.0 + (26.0 + (21.448 - T * (46.815 + T * (0.00059 - T * 0.001813))) / 60.0) / 60.0;
    const double eps = (eps0 + 0.00256 * std::cos(omega)) * kDegToRad;

    const double decl = std::asin(std::sin(eps) * std::sin(app_long));

    // Equation of time, minutes.
    const double y = std::tan(eps / 2) * std::tan(eps / 2);
    const double l0rad = l0 * kDegToRad;
    const double eqtime =
        4.0 * kRadToDeg *
        (y * std::sin(2 * l0rad) - 2 * ecc * std::sin(mrad) +
         4 * ecc * y * std::sin(mrad) * std::cos(2 * l0rad) -
         0.5 * y * y * std::sin(4 * l0rad) - 1.25 * ecc * ecc * std::sin(2 * mrad));

    const double minutes_utc = hour_of_day(t) * 60.0;
    double tst = std::fmod(minutes_utc + eqtime + 4.0 * loc.longitude, 1440.0);
    if (tst < 0) tst += 1440.0;
    double ha = tst / 4.0 - 180.0;
    if (ha < -180.0) ha += 360.0;

    const double lat = loc.latitude * kDegToRad;
    const double harad = ha * kDegToRad;
    double cos_zen = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(harad);
    cos_zen = std::clamp(cos_zen, -1.0, 1.0);
    const double zenith = std::acos(cos_zen) * kRadToDeg;

    double azimuth = 180.0; // undefined at the zenith/pole singularity
    const double denom = std::cos(lat) * std::sin(zenith * kDegToRad);
    if (std::abs(denom) > 1e-12) {
        double az_arg = (std::sin(lat) * cos_zen - std::sin(decl)) / denom;
        az_arg = std::clamp(az_arg, -1.0, 1.0);
        const double az = std::acos(az_arg) * kRadToDeg;
        azimuth = ha > 0 ? std::fmod(az + 180.0, 360.0) : std::fmod(540.0 - az, 360.0);
    }

    return SolarPosition{90.0 - zenith, azimuth};
}

// Haurwitz clear-sky global horizontal irradiance, W/m². Zero for sun at or
// below the horizon.
inline double haurwitz_ghi(double zenith_deg) {
    if (zenith_deg >= 90.0) return 0.0;
    const double cos_z = std::cos(zenith_deg * kDegToRad);
    return 1098.0 * cos_z * std::exp(-0.057 / cos_z);
}

// Clear-sky AC power of the plant at instant t, kW in [0, p_mpp].
// Beam-only transposition: the horizontal clear-sky irradiance is mapped to
// the panel plane by the incidence/zenith cosine ratio, floored at zero.
inline double clearsky_poa(const PlantConfig& plant, UtcTime t) {
    const SolarPosition pos = solar_position(plant.location, t);
    if (pos.elevation <= 0.0) return 0.0;

    const double zrad = pos.zenith() * kDegToRad;
    const double cos_z = std::cos(zrad);
    const double ghi = haurwitz_ghi(pos.zenith());

    const double tilt = plant.tilt * kDegToRad;
    const double cos_aoi = cos_z * std::cos(tilt) +
                           std::sin(zrad) * std::sin(tilt) *
                               std::cos((pos.azimuth - plant.azimuth) * kDegToRad);
    const double poa_wm2 = ghi * std::max(0.0, cos_aoi) / cos_z;

    const double kw = poa_wm2 / 1000.0 * plant.p_mpp * (1.0 - plant.system_loss);
    return std::clamp(kw, 0.0, plant.p_mpp);
}

struct IrradianceSample {
    UtcTime timestamp;
    double poa; // plane-of-array irradiance, W/m²
};

inline void validate_series(std::span<const IrradianceSample> samples) {
    if (samples.empty()) throw Error("empty irradiance series");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].poa < 0.0)
            throw DomainError("negative irradiance at " + format_iso8601(samples[i].timestamp));
        if (i > 0 && !(samples[i - 1].timestamp < samples[i].timestamp))
            throw Error("timestamps not strictly increasing at " +
                        format_iso8601(samples[i].timestamp));
    }
}

enum class Period { day, month, year };

inline const char* to_string(Period p) {
    switch (p) {
        case Period::day: return "day";
        case Period::month: return "month";
        case Period::year: return "year";
    }
    return "?";
}

struct PshGroup {
    std::string label; // "2016", "2016-07" or "2016-07-01"
    double psh;
};

struct PshSummary {
    Period period;
    double psh;  // total over the whole series
    double mean; // mean per-period PSH
    double std;  // sample std across periods (0 for a single period)
};

// Equivalent peak-sun hours: accumulated hourly POA divided by 1000 W/m².
// Samples must be hour-spaced; each contributes poa * 1h of insolation.
inline double psh_total(std::span<const IrradianceSample> samples) {
    validate_series(samples);
    double sum = 0.0;
    for (const auto& s : samples) sum += s.poa;
    return sum / 1000.0;
}

inline std::vector<PshGroup> psh_by_period(std::span<const IrradianceSample> samples,
                                           Period period) {
    validate_series(samples);
    std::vector<PshGroup> groups;
    char buf[16];
    for (const auto& s : samples) {
        CivilTime c = civil(s.timestamp);
        switch (period) {
            case Period::year: std::snprintf(buf, sizeof(buf), "%04d", c.year); break;
            case Period::month: std::snprintf(buf, sizeof(buf), "%04d-%02u", c.year, c.month); break;
            case Period::day:
                std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
                break;
        }
        if (groups.empty() || groups.back().label != buf) groups.push_back({buf, 0.0});
        groups.back().psh += s.poa / 1000.0;
    }
    return groups;
}

inline PshSummary psh_summary(std::span<const IrradianceSample> samples, Period period) {
    const auto groups = psh_by_period(samples, period);
    double total = 0.0;
    for (const auto& g : groups) total += g.psh;
    const double mean = total / double(groups.size());
    double var = 0.0;
    if (groups.size() > 1) {
        for (const auto& g : groups) var += (g.psh - mean) * (g.psh - mean);
        var /= double(groups.size() - 1);
    }
    return PshSummary{period, total, mean, std::sqrt(var)};
}

// Annual energy yield of a plant from its site PSH.
inline double annual_energy(double psh, double p_mpp, double eta_sys) {
    if (psh < 0.0) throw DomainError("psh must be >= 0");
    if (!(p_mpp > 0.0)) throw DomainError("p_mpp must be > 0");
    if (!(eta_sys > 0.0 && eta_sys <= 1.0)) throw DomainError("eta_sys must be in (0, 1]");
    return psh * p_mpp * eta_sys;
}

// Inverse of annual_energy: end-to-end system efficiency from observed yield.
inline double derive_eta_sys(double pv_generation, double psh, double p_mpp) {
    if (!(psh > 0.0)) throw DomainError("psh must be > 0 to derive eta_sys");
    if (!(p_mpp > 0.0)) throw DomainError("p_mpp must be > 0");
    return pv_generation / (psh * p_mpp);
}

} // namespace sunbroker
