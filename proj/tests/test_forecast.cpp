#include <catch2/catch_amalgamated.hpp>

#include "sunbroker/forecast.hpp"

using namespace sunbroker;
using Catch::Matchers::WithinAbs;

namespace {
PlantConfig test_plant() { return PlantConfig{GeoLocation{41.4, 2.2}, 0.0, 180.0, 1.0, 0.14}; }

WeatherObservation sunny_obs() { return {5.0, 20.0, 2.0, 7.0, "Sunny"}; }
WeatherForecast mild_fcst() { return {10.0, 21.0, 2.5, 0.0, 55.0}; }
} // namespace

TEST_CASE("feature vector dimension is 12 numeric fields plus the vocabulary") {
    CHECK(feature_dimension() == 12 + weather_vocabulary().size());
    CHECK(feature_dimension() == 18);
    CHECK(feature_names().size() == feature_dimension());

    auto x = make_feature_vector(0.5, sunny_obs(), mild_fcst(), 0.4, 0.45);
    CHECK(x.dimension() == feature_dimension());
}

TEST_CASE("weather text one-hot encodes against the fixed vocabulary") {
    auto x = make_feature_vector(0.5, sunny_obs(), mild_fcst(), 0.4, 0.45);
    const auto& vocab = weather_vocabulary();
    REQUIRE(vocab[0] == "Sunny");
    for (std::size_t i = 0; i < vocab.size(); ++i)
        CHECK(x.values[5 + i] == (i == 0 ? 1.0 : 0.0));

    WeatherObservation cloudy = sunny_obs();
    cloudy.weather_text = "Cloudy";
    auto xc = make_feature_vector(0.5, cloudy, mild_fcst(), 0.4, 0.45);
    CHECK(xc.values[5 + 3] == 1.0);
    CHECK(xc.values[5] == 0.0);
}

TEST_CASE("unknown weather text is rejected and the error lists known labels") {
    WeatherObservation obs = sunny_obs();
    obs.weather_text = "Hail";
    try {
        make_feature_vector(0.5, obs, mild_fcst(), 0.4, 0.45);
        FAIL("expected VocabularyError");
    } catch (const VocabularyError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("Hail") != std::string::npos);
        CHECK(msg.find("Sunny") != std::string::npos);
        CHECK(msg.find("Storm") != std::string::npos);
    }
}

TEST_CASE("weather field bounds are validated") {
    WeatherObservation obs = sunny_obs();
    obs.cloud_cover = 101.0;
    CHECK_THROWS_AS(make_feature_vector(0.5, obs, mild_fcst(), 0.4, 0.45), DomainError);

    WeatherForecast fcst = mild_fcst();
    fcst.precipitation = -1.0;
    CHECK_THROWS_AS(make_feature_vector(0.5, sunny_obs(), fcst, 0.4, 0.45), DomainError);
}

TEST_CASE("night target hour zeroes the clear-sky feature regardless of weather") {
    const auto plant = test_plant();
    Climatology history;
    history.add(make_utc(2021, 6, 10, 23, 0), 0.0);
    auto x = build_features(plant, make_utc(2021, 6, 10, 22, 0), sunny_obs(), mild_fcst(), 0.0,
                            history);
    CHECK(x.clearsky() == 0.0);
}

TEST_CASE("build_features targets the next hour's clear sky") {
    const auto plant = test_plant();
    Climatology history;
    history.add(make_utc(2021, 6, 10, 12, 0), 0.5);
    const auto t = make_utc(2021, 6, 10, 11, 0);
    auto x = build_features(plant, t, sunny_obs(), mild_fcst(), 0.4, history);
    CHECK_THAT(x.clearsky(), WithinAbs(clearsky_poa(plant, t + std::chrono::hours{1}), 1e-15));
    CHECK(x.values[feature_dimension() - 2] == 0.4); // last production
}

TEST_CASE("climatology means key on month and hour with fallbacks") {
    Climatology c;
    c.add(make_utc(2021, 6, 1, 12, 0), 0.8);
    c.add(make_utc(2021, 6, 2, 12, 0), 0.6);
    c.add(make_utc(2021, 6, 1, 7, 0), 0.2);
    CHECK_THAT(c.mean_for(6, 12), WithinAbs(0.7, 1e-12));
    CHECK_THAT(c.mean_for(7, 12), WithinAbs(0.7, 1e-12));  // unseen month: hour mean
    CHECK_THAT(c.mean_for(12, 3), WithinAbs((0.8 + 0.6 + 0.2) / 3.0, 1e-12)); // overall mean
}

TEST_CASE("weather text thresholds cover the cloud-cover range") {
    CHECK(weather_text_for_cloud(0.0) == "Sunny");
    CHECK(weather_text_for_cloud(20.0) == "MostlySunny");
    CHECK(weather_text_for_cloud(50.0) == "PartlyCloudy");
    CHECK(weather_text_for_cloud(70.0) == "Cloudy");
    CHECK(weather_text_for_cloud(90.0) == "Rain");
    CHECK(weather_text_for_cloud(99.0) == "Storm");
}

TEST_CASE("full cloud cover attenuates production to a quarter of clear sky") {
    CHECK(attenuated_production(0.8, 100.0, 20.0) == 0.25 * 0.8);
    CHECK(attenuated_production(0.8, 0.0, 20.0) == 0.8);
    // high-temperature derating on top
    CHECK_THAT(attenuated_production(1.0, 0.0, 35.0), WithinAbs(1.0 - 0.004 * 10.0, 1e-12));
}

TEST_CASE("synthetic dataset is deterministic for a fixed seed") {
    const auto plant = test_plant();
    auto a = synth_dataset(123, 150, plant);
    auto b = synth_dataset(123, 150, plant);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].target_time == b.records[i].target_time);
        CHECK(a.records[i].production == b.records[i].production);
        CHECK(a.records[i].obs.cloud_cover == b.records[i].obs.cloud_cover);
        CHECK(a.records[i].fcst.humidity == b.records[i].fcst.humidity);
    }
    auto c = synth_dataset(124, 150, plant);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        if (a.records[i].production != c.records[i].production) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("synthetic dataset yields daylight records within physical bounds") {
    const auto plant = test_plant();
    auto set = synth_dataset(7, 400, plant);
    REQUIRE(set.records.size() == 400);
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const auto& r = set.records[i];
        CHECK(r.clearsky > 0.0);
        CHECK(r.production >= 0.0);
        CHECK(r.production <= plant.p_mpp);
        CHECK(r.last_production >= 0.0);
        CHECK(r.obs.cloud_cover >= 0.0);
        CHECK(r.obs.cloud_cover <= 100.0);
        if (i > 0) CHECK(set.records[i - 1].target_time < r.target_time);
        CHECK_NOTHROW(weather_text_index(r.obs.weather_text));
    }
}

TEST_CASE("synthetic dataset rejects tiny sizes") {
    CHECK_THROWS_AS(synth_dataset(1, 50, test_plant()), DomainError);
}
