#pragma once

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sunbroker/errors.hpp"
#include "sunbroker/solar.hpp"
#include "sunbroker/time.hpp"

namespace sunbroker {

// Fixed weather-condition vocabulary, one-hot encoded in feature vectors.
inline const std::vector<std::string>& weather_vocabulary() {
    static const std::vector<std::string> vocab = {"Sunny", "MostlySunny", "PartlyCloudy",
                                                   "Cloudy", "Rain", "Storm"};
    return vocab;
}

inline std::size_t weather_text_index(const std::string& text) {
    const auto& vocab = weather_vocabulary();
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i] == text) return i;
    std::string known;
    for (const auto& v : vocab) known += (known.empty() ? "" : ", ") + v;
    throw VocabularyError("unknown weather text '" + text + "' (known: " + known + ")");
}

struct WeatherObservation {
    double cloud_cover;  // percent, [0, 100]
    double temperature;  // deg C
    double wind_speed;   // m/s
    double uv_index;
    std::string weather_text;

    void validate() const {
        if (!(cloud_cover >= 0.0 && cloud_cover <= 100.0))
            throw DomainError("observation cloud_cover outside [0, 100]");
        if (wind_speed < 0.0) throw DomainError("observation wind_speed must be >= 0");
        if (uv_index < 0.0) throw DomainError("observation uv_index must be >= 0");
        weather_text_index(weather_text);
    }
};

struct WeatherForecast {
    double cloud_cover;   // percent
    double temperature;   // deg C
    double wind_speed;    // m/s
    double precipitation; // mm/h
    double humidity;      // percent

    void validate() const {
        if (!(cloud_cover >= 0.0 && cloud_cover <= 100.0))
            throw DomainError("forecast cloud_cover outside [0, 100]");
        if (wind_speed < 0.0) throw DomainError("forecast wind_speed must be >= 0");
        if (precipitation < 0.0) throw DomainError("forecast precipitation must be >= 0");
        if (!(humidity >= 0.0 && humidity <= 100.0))
            throw DomainError("forecast humidity outside [0, 100]");
    }
};

// Flattened regressor input. Layout (see feature_names()):
//   [0]            clear-sky power for the target hour, kW
//   [1..4]         observation: cloud, temperature, wind, uv
//   [5..5+V)       one-hot weather text (V = vocabulary size)
//   [5+V..9+V]     forecast: cloud, temperature, wind, precipitation, humidity
//   [10+V]         last production, kW
//   [11+V]         historical mean production for (month, hour), kW
struct FeatureVector {
    std::vector<double> values;

    double clearsky() const { return values.at(0); }
    std::size_t dimension() const { return values.size(); }
};

inline std::size_t feature_dimension() { return 12 + weather_vocabulary().size(); }

inline std::vector<std::string> feature_names() {
    std::vector<std::string> names = {"clearsky_kw", "obs_cloud_pct", "obs_temp_c",
                                      "obs_wind_ms", "obs_uv"};
    for (const auto& v : weather_vocabulary()) names.push_back("obs_text_" + v);
    names.insert(names.end(), {"fcst_cloud_pct", "fcst_temp_c", "fcst_wind_ms",
                               "fcst_precip_mmh", "fcst_humidity_pct", "last_production_kw",
                               "historical_hour_mean_kw"});
    return names;
}

// Mean production keyed by (month, hour-of-day), built from training data
// only. Falls back to the hour mean across months, then to the overall mean.
class Climatology {
public:
    void add(UtcTime target_time, double production_kw) {
        CivilTime c = civil(target_time);
        auto& cell = cells_[{c.month, c.hour}];
        cell.first += production_kw;
        cell.second += 1;
        auto& h = by_hour_[c.hour];
        h.first += production_kw;
        h.second += 1;
        total_.first += production_kw;
        total_.second += 1;
    }

    double mean_for(unsigned month, unsigned hour) const {
        if (auto it = cells_.find({month, hour}); it != cells_.end())
            return it->second.first / double(it->second.second);
        if (auto it = by_hour_.find(hour); it != by_hour_.end())
            return it->second.first / double(it->second.second);
        return total_.second > 0 ? total_.first / double(total_.second) : 0.0;
    }

    double mean_for(UtcTime target_time) const {
        CivilTime c = civil(target_time);
        return mean_for(c.month, c.hour);
    }

    bool empty() const { return total_.second == 0; }

private:
    std::map<std::pair<unsigned, unsigned>, std::pair<double, long>> cells_;
    std::map<unsigned, std::pair<double, long>> by_hour_;
    std::pair<double, long> total_{0.0, 0};
};

inline FeatureVector make_feature_vector(double clearsky_kw, const WeatherObservation& obs,
                                         const WeatherForecast& fcst, double last_production,
                                         double historical_hour_mean) {
    obs.validate();
    fcst.validate();
    const auto& vocab = weather_vocabulary();
    FeatureVector x;
    x.values.reserve(feature_dimension());
    x.values = {clearsky_kw, obs.cloud_cover, obs.temperature, obs.wind_speed, obs.uv_index};
    const std::size_t text = weather_text_index(obs.weather_text);
    for (std::size_t i = 0; i < vocab.size(); ++i) x.values.push_back(i == text ? 1.0 : 0.0);
    x.values.insert(x.values.end(), {fcst.cloud_cover, fcst.temperature, fcst.wind_speed,
                                     fcst.precipitation, fcst.humidity, last_production,
                                     historical_hour_mean});
    for (double v : x.values)
        if (!std::isfinite(v)) throw DomainError("non-finite feature value");
    return x;
}

// Assembles the regressor input at time t for the target hour t + 1h.
inline FeatureVector build_features(const PlantConfig& plant, UtcTime t,
                                    const WeatherObservation& obs, const WeatherForecast& fcst,
                                    double last_production, const Climatology& history) {
    const UtcTime target = t + std::chrono::hours{1};
    const double clearsky = clearsky_poa(plant, target);
    return make_feature_vector(clearsky, obs, fcst, last_production, history.mean_for(target));
}

// One supervised example: everything known at time t, labeled with the
// production realized during the target hour t + 1h.
struct Record {
    UtcTime target_time;
    WeatherObservation obs;
    WeatherForecast fcst;
    double last_production; // kW during the hour ending at t
    double clearsky;        // clear-sky power for the target hour, kW
    double production;      // realized production for the target hour, kW (label)
};

struct TrainingSet {
    PlantConfig plant;
    std::vector<Record> records;
};

inline FeatureVector assemble_features(const Record& r, const Climatology& history) {
    return make_feature_vector(r.clearsky, r.obs, r.fcst, r.last_production,
                               history.mean_for(r.target_time));
}

inline Climatology climatology_from(std::span<const Record> records) {
    Climatology c;
    for (const auto& r : records) c.add(r.target_time, r.production);
    return c;
}

inline std::string weather_text_for_cloud(double cloud_cover) {
    if (cloud_cover < 10.0) return "Sunny";
    if (cloud_cover < 30.0) return "MostlySunny";
    if (cloud_cover < 60.0) return "PartlyCloudy";
    if (cloud_cover < 85.0) return "Cloudy";
    if (cloud_cover < 95.0) return "Rain";
    return "Storm";
}

// Pre-noise synthetic production: clear-sky output attenuated by cloud cover
// and derated above 25 degC.
inline double attenuated_production(double clearsky, double cloud_cover, double temperature) {
    return clearsky * (1.0 - 0.75 * cloud_cover / 100.0) *
           (1.0 - 0.004 * std::max(0.0, temperature - 25.0));
}

namespace detail {

// Serially correlated weather state driven by a handful of AR(1) latents.
struct SynthWeatherState {
    double cloud_latent = 0.0;
    double temp_latent = 0.0;
    double wind_latent = 0.0;
    double humid_latent = 0.0;

    double cloud = 45.0, temperature = 15.0, wind = 2.0, humidity = 60.0, precipitation = 0.0;

    void step(UtcTime t, std::mt19937_64& rng) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        constexpr double rho = 0.92;
        const double w = std::sqrt(1.0 - rho * rho);
        cloud_latent = rho * cloud_latent + w * gauss(rng);
        temp_latent = 0.95 * temp_latent + std::sqrt(1.0 - 0.95 * 0.95) * gauss(rng);
        wind_latent = 0.85 * wind_latent + std::sqrt(1.0 - 0.85 * 0.85) * gauss(rng);
        humid_latent = 0.90 * humid_latent + std::sqrt(1.0 - 0.90 * 0.90) * gauss(rng);

        CivilTime c = civil(t);
        const int doy = (int(c.month) - 1) * 30 + int(c.day);
        const double season = -std::cos(2.0 * std::numbers::pi * doy / 365.0);
        const double diurnal = std::sin(2.0 * std::numbers::pi * (hour_of_day(t) - 9.0) / 24.0);

        cloud = std::clamp(45.0 + 30.0 * cloud_latent, 0.0, 100.0);
        temperature = 14.0 + 9.0 * season + 5.0 * diurnal + 2.0 * temp_latent;
        wind = std::abs(2.5 + 1.5 * wind_latent);
        humidity = std::clamp(62.0 + 18.0 * humid_latent + 0.15 * (cloud - 45.0), 0.0, 100.0);
        precipitation = cloud > 85.0 ? (cloud - 85.0) * 0.1 : 0.0;
    }
};

} // namespace detail

// Deterministic synthetic daylight dataset. Production follows the clear-sky
// curve attenuated by cloud cover and high-temperature derating, plus a small
// Gaussian disturbance; weather evolves as a serially correlated process and
// the next-hour "forecast" is the true next-hour state observed with noise.
inline TrainingSet synth_dataset(std::uint64_t seed, std::size_t n, const PlantConfig& plant) {
    if (n < 100) throw DomainError("synthetic dataset needs n >= 100");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TrainingSet set{plant, {}};
    set.records.reserve(n);

    detail::SynthWeatherState wx;
    UtcTime t = make_utc(2021, 1, 1, 0, 0);
    wx.step(t, rng);

    auto production_at = [&](UtcTime when, const detail::SynthWeatherState& w) {
        const double cs = clearsky_poa(plant, when);
        if (cs <= 0.0) return 0.0;
        double p = attenuated_production(cs, w.cloud, w.temperature);
        p += gauss(rng) * 0.02 * plant.p_mpp;
        return std::clamp(p, 0.0, plant.p_mpp);
    };

    double last_production = production_at(t, wx);

    while (set.records.size() < n) {
        const UtcTime target = t + std::chrono::hours{1};
        detail::SynthWeatherState next = wx;
        next.step(target, rng);

        const double clearsky = clearsky_poa(plant, target);
        const double production = production_at(target, next);

        if (clearsky > 0.0) {
            WeatherObservation obs{wx.cloud, wx.temperature, wx.wind,
                                   std::max(0.0, 10.0 * clearsky_poa(plant, t) / plant.p_mpp *
                                                     (1.0 - 0.7 * wx.cloud / 100.0)),
                                   weather_text_for_cloud(wx.cloud)};
            WeatherForecast fcst{std::clamp(next.cloud + 3.0 * gauss(rng), 0.0, 100.0),
                                 next.temperature + 0.5 * gauss(rng),
                                 std::abs(next.wind + 0.3 * gauss(rng)),
                                 std::max(0.0, next.precipitation + 0.05 * gauss(rng)),
                                 std::clamp(next.humidity + 2.0 * gauss(rng), 0.0, 100.0)};
            set.records.push_back(
                {target, obs, fcst, last_production, clearsky, production});
        }

        wx = next;
        last_production = production;
        t = target;
    }
    return set;
}

} // namespace sunbroker
